#pragma once

// Local zeta integrals at bad primes, the global zeta-integral assembly for
// cusps near 0, the matrix-coefficient formulas at the formula level, and the
// regulator vectors with the non-splitting certificate.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "unipar/automorphic.hpp"

namespace unipar {

// One local component of a cusp near 0.
struct CuspLocal {
  enum class Component { infinity, zero };
  int64_t p = 0;
  int r = 1;  // v_p(N)
  Component component = Component::infinity;
};

// I(s, infinity_p) / vol(K_p): 1 at deeper ramification, the Steinberg pair
// factor 1/(1 - chi chi' p^{-s-1}) at r = 1.
cplx zeta_local_infinity(const LocalRep& pf, const LocalRep& pg, cplx s);

// I(s, 0_p) / vol(K_p) = eps(1/2,pi) eps(1/2,pi') p^{r(s-1)} I(s,infty_p)/vol.
cplx zeta_local_zero(const LocalRep& pf, const LocalRep& pg, cplx s);

// Number of K_p-cosets in 0_p.
int64_t zero_coset_count(int64_t p, int r);

// |G(Zhat) : K_0(N)| = N prod_{p | N} (1 + 1/p)
double k0_index(int level);

// Checks that the components cover exactly the prime factorization of N.
void validate_cusp_near_zero(int level, const std::vector<CuspLocal>& cusp);

// The bracket 1 - prod_{p : 0_p} eps_p eps'_p |N|_p^{1-s}; at s = 1 this is
// exactly 0 or 2 according to the sign product.
cplx zeta_global_bracket(const EigenformData& f, const EigenformData& g,
                         const std::vector<CuspLocal>& cusp, cplx s);

// I(s; f, g; c) = L(s, pi_f x pi_g) |G(Zhat):K_f|^{-1} (bracket), for a cusp
// near 0. The L-part multiplies the good-prime Euler product by the bad
// factors; outside the convergence region a full-L override must be given.
cplx zeta_global(const EigenformData& f, const EigenformData& g,
                 const std::vector<CuspLocal>& cusp, cplx s, int64_t p_max,
                 std::optional<cplx> L_full_override = std::nullopt);

enum class BaseMode { rational, tangential };

// ---- matrix coefficients ----

// Second case (one holomorphic leg, one Eisenstein leg), for a fixed
// Eisenstein element omega'. pair_values[j][i] = (E_{omega'} omega_j, omega_i).
struct SecondCaseTable {
  std::vector<std::string> h_labels;
  std::string e_label;
  std::vector<std::vector<cplx>> pair_values;
  std::vector<double> h_norms;      // (omega_i, omega_i) > 0
  std::optional<cplx> e_at_base;    // E_{omega'}(b); required in rational mode
};

// result[j][i] = <[omega_j] ⊗ [omega'], phi^{[1,2]}([conj(omega_i)]^v)>;
// every other matrix coefficient of the second case vanishes.
std::vector<std::vector<cplx>> matrix_coeff_second_case(const SecondCaseTable& table,
                                                        BaseMode mode);

// Third case (both legs Eisenstein) under the orthogonality condition.
struct ThirdCaseTable {
  bool orthogonality_declared = false;
  std::vector<std::string> e_labels;
  struct EtaRow {
    std::string label;
    double norm = 0.0;                       // (eta, eta)
    std::vector<std::vector<cplx>> f_pair;  // [e][e'] = (F_{omega_e, omega_e'}, eta)
  };
  std::vector<EtaRow> etas;
};

// result[eta][e][e'] = <[omega_e] ⊗ [omega_e'], phi^{[1,2]}([conj(eta)]^v)>
// = -1/2 (F_{omega_e,omega_e'}, eta) / (eta, eta).
std::vector<std::vector<std::vector<cplx>>> matrix_coeff_third_case(const ThirdCaseTable& table);

// ---- regulator vectors ----

struct RegulatorVector {
  BaseMode mode = BaseMode::tangential;
  std::map<std::string, cplx> coords;
  double max_abs() const;
};

struct Reg2Inputs {
  BaseMode mode = BaseMode::tangential;
  std::vector<std::string> form_labels;
  std::vector<double> petersson_norms;       // (omega_f, omega_f)
  std::vector<std::map<int, int>> epsilons;  // per form: p -> eps(1/2, pi_p)
  std::vector<std::string> cusp_labels;
  std::vector<std::vector<CuspLocal>> cusps;
  double zeta_level_2 = 0.0;  // zeta^{(N)}(2)
  // off_diagonal_L[f][g]: full L(1, pi_f x pi_g) for f != g
  std::vector<std::vector<cplx>> off_diagonal_L;
  // residue_L[f]: Res_{s=1} L(s, pi_f x pi_f) (full L, bad factors included)
  std::vector<double> residue_L;
  // E_c(b, 1) per cusp; required in rational mode, ignored otherwise
  std::vector<double> eis_at_base;
};

// Coordinates on e_{f,g,c}: off-diagonal -2 pi i L(1) (1 - prod eps eps') /
// (zeta^{(N)}(2) (f,f)(g,g)); diagonal 2 pi i Res log(N_S) / (...); rational
// mode adds the real -E_c(b,1)/(f,f) diagonal term.
RegulatorVector reg2_assemble(const Reg2Inputs& in);

struct Reg3Inputs {
  std::vector<std::string> form_labels;
  std::vector<double> petersson_norms;
  std::vector<std::string> cusp_labels;
  double zeta_level_2 = 0.0;
  double index = 0.0;  // |G(Zhat) : K_f|
  // i_n[f][c][d] = I_N(1; E_d, f; c)
  std::vector<std::vector<std::vector<cplx>>> i_n;
  std::vector<cplx> l_half;        // L^{(N)}(1/2, pi_f)
  std::vector<cplx> l_three_half;  // L^{(N)}(3/2, pi_f)
};

// Coordinates on e_{f,c,d} for c != d, antisymmetric in (c,d); the empty
// vector at prime level (a single cusp).
RegulatorVector reg3_assemble(const Reg3Inputs& in);

// ---- residue of the diagonal Rankin-Selberg L-function at s = 1 ----

struct ResidueEstimate {
  double value = 0.0;               // extrapolated Res_{s=1} L(s, pi_f x pi_f)
  std::vector<double> deltas;
  std::vector<double> corrected;    // tail-corrected (s-1) zeta^{(N)}(2s) D(s)
  std::vector<double> richardson;   // pairwise linear extrapolations to 0
  double spread = 0.0;              // max relative deviation across the ladder
};

// Evaluates (s-1) zeta^{(N)}(2s) sum_{n<=M} a_n^2 n^{-s-1} at s = 1 + delta,
// corrected for the Dirichlet tail by 1/(1 - M^{1-s}), and extrapolates the
// delta ladder linearly to delta = 0.
ResidueEstimate residue_rankin_selberg(const EigenformData& f, int64_t n_max,
                                       std::vector<double> deltas = {0.2, 0.1, 0.05});

// ---- N = p desk run ----

struct DeskRunResult {
  RegulatorVector reg2;
  RegulatorVector reg3;
  ResidueEstimate residue;
  double zeta_level_2 = 0.0;
  double petersson_norm = 0.0;
  bool nonsplit = false;
  double residue_stability = 0.0;  // relative spread of the delta ladder
  // The introduction-style rewriting of the diagonal coordinate,
  // -2 pi i Res log(p) / (zeta^{(p)}(2) (4 pi)^2 (f,f)^2) with
  // (4 pi)^2 (f,f)^2 = (omega_f, omega_f)^2. The assembly follows the
  // regulator formula literally, which evaluates the limit of the local
  // bracket to the opposite sign of this display; the ratio is surfaced
  // rather than absorbed.
  cplx intro_display_diagonal = 0.0;
  cplx intro_display_ratio = 0.0;  // assembled coordinate / display value
};

// Full prime-level pipeline for a single eigenform: Petersson norm, residue
// ladder, reg2/reg3 assembly and the non-splitting certificate.
DeskRunResult desk_run_prime_level(const EigenformData& f, BaseMode mode, int64_t n_max,
                                   double eis_at_base = 0.0,
                                   const PeterssonOptions& pet_opt = {});

}  // namespace unipar
