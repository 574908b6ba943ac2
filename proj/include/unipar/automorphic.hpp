#pragma once

// q-expansions and Hecke data for weight-2 level-N eigenforms, Rankin-Selberg
// Dirichlet series and partial Euler products, weight-0 Eisenstein lattice
// sums, and Petersson-type pairings.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "unipar/errors.hpp"

namespace unipar {

using cplx = std::complex<double>;

std::vector<int64_t> primes_up_to(int64_t n);

// Hecke eigenvalue data for a normalized weight-2 eigenform: a(1) = 1,
// multiplicative, and satisfying the Hecke recursion at good prime powers.
class EigenformData {
 public:
  EigenformData(int level, std::vector<double> a_from_1, std::string source_tag = {});

  int level() const { return level_; }
  int64_t n_max() const { return static_cast<int64_t>(a_.size()); }
  double a(int64_t n) const;
  const std::string& source_tag() const { return source_tag_; }

  void set_epsilon(int p, int eps);  // epsilon(1/2, pi_p) for p | N
  int epsilon(int p) const;
  bool has_epsilon(int p) const;

  // multiplicativity, Hecke recursion, a(1) = 1, Ramanujan bound at good p
  void validate() const;

 private:
  int level_;
  std::vector<double> a_;  // a_[i] = a(i+1)
  std::map<int, int> epsilon_local_;
  std::string source_tag_;
};

// CSV with header "n,a_n", n contiguous from 1. Validates on load.
EigenformData ingest_eigenform(std::istream& in, int level, std::string source_tag = {});
EigenformData ingest_eigenform_file(const std::string& path, int level);

// Local representation data at a prime.
struct LocalRep {
  enum class Kind { unramified, steinberg_twist, deep };  // deep: v_p(N) > 1
  Kind kind = Kind::unramified;
  int64_t p = 0;
  int r = 0;                            // v_p(N): 0 unramified, 1 Steinberg, >= 2 deep
  cplx alpha = 0.0, alpha_prime = 0.0;  // Satake pair, alpha*alpha' = 1
  int chi = 1;                          // chi(p) in {+1,-1} for steinberg_twist
  int epsilon = 0;                      // epsilon(1/2, pi_p), when known

  static LocalRep unramified_from_ap(int64_t p, double ap);
  static LocalRep steinberg(int64_t p, int chi, int epsilon);
  static LocalRep deep_ramified(int64_t p, int r, int epsilon);
};

// The good-prime Rankin-Selberg Euler factor
//   1 / prod_{mu in {ab, a'b, ab', a'b'}} (1 - mu p^{-s}),
// the Steinberg/Steinberg bad factor 1/(1 - chi chi' p^{-s-1}), and 1 at
// deeper ramification.
cplx local_L_factor(const LocalRep& pf, const LocalRep& pg, cplx s);

struct ValueWithTail {
  cplx value;
  double tail_bound;  // crude bound on the truncation error
};

// prod_{p not dividing N, p <= p_max} L_p(s, pi_f x pi_g) with Satake pairs
// recovered from a(p).
ValueWithTail partial_L(const EigenformData& f, const EigenformData& g, cplx s, int64_t p_max);

// prod_{p not dividing N, p <= p_max} (1 - p^{-s})^{-1}
ValueWithTail zeta_partial(int level, cplx s, int64_t p_max);

// sum_{n <= n_max} a(n) b(n) n^{-(s+1)}
ValueWithTail rankin_dirichlet(const EigenformData& f, const EigenformData& g, cplx s,
                               int64_t n_max);

// Weight-zero Eisenstein series attached to a cusp of Gamma_0(N) whose local
// components lie in {infinity_p, 0_p}, evaluated as a truncated lattice sum
// over coset representatives: primitive pairs +-(c,d) with N | c for the
// infinity class and with the stated congruences for the cusp class,
// including the -4 pi normalization and the char_infinity - (1/#) char_[g]
// weighting.
class EisensteinEvaluator {
 public:
  // zero_primes: the primes p | N whose local component is 0_p. Must be
  // nonempty (the cusp is != infinity) and each must divide the level.
  EisensteinEvaluator(int level, std::vector<int> zero_primes, double radius = 0.0);

  int level() const { return level_; }
  // number of K_f-cosets in the cusp class, prod p^{v_p(N)} over zero primes
  double coset_count() const;

  // E_c(tau, s); Re(s) >= 1.5 required. If radius == 0 it is chosen from the
  // tail bound so the truncation error stays below tail_target.
  cplx value(cplx tau, cplx s, double tail_target = 1e-7) const;

  // Values at several nearby points sharing one truncation set (anchored at
  // the first point), so finite differences see a smooth function.
  std::vector<cplx> values_fixed_terms(const std::vector<cplx>& taus, cplx s,
                                       double tail_target = 1e-7) const;

 private:
  bool in_infinity_class(int64_t c) const;
  bool in_cusp_class(int64_t c) const;
  int level_;
  std::vector<int> zero_primes_;
  double radius_;
};

// Hermitian pairing (omega_f, omega_g) = 4 pi int_{F_N} f conj(g) dx dy over
// a fundamental domain of Gamma_0(N) tiled by SL_2(Z) coset translates,
// normalized positive-definite. q-expansions are evaluated from the
// eigenvalue data; depth controls the quadrature refinement.
struct PeterssonOptions {
  int depth = 2;          // quadrature refinement level
  double im_cutoff = 40;  // tile truncation height
  int64_t n_terms = 100000;
};

cplx petersson(const EigenformData& f, const EigenformData& g, const PeterssonOptions& opt = {});

// Raw q-expansion variant; coefficients from n = 0. Throws on non-cuspidal
// input (a_0 != 0).
cplx petersson_qexp(int level, const std::vector<double>& af, const std::vector<double>& ag,
                    const PeterssonOptions& opt = {});

}  // namespace unipar
