#pragma once

// Infinite-Frobenius conjugation at the series level: the single-valued
// series I(b,y) = T(gamma) c_B(T(gamma))^{-1}, its Hall-basis coordinates
// (generalized Bloch-Wigner functions), and the closed-form evaluations in
// lengths one and two.

#include <map>
#include <optional>

#include "unipar/iterint.hpp"
#include "unipar/ncalg.hpp"

namespace unipar {

enum class LetterClass { holomorphic, antiholomorphic, eisenstein_plus, eisenstein_minus };

inline bool is_eisenstein(LetterClass c) {
  return c == LetterClass::eisenstein_plus || c == LetterClass::eisenstein_minus;
}
// +1 or -1 for Eisenstein-class letters.
int eigen_sign(LetterClass c);

// Degree-wise action of the infinite Frobenius on letters: an involution on
// degree one (with real structure constants), plus an optional degree-raising
// block sending a letter to a degree-2 series.
class FrobeniusSpec {
 public:
  FrobeniusSpec(Alphabet alphabet, int truncation_degree);

  const Alphabet& alphabet() const { return alphabet_; }
  int degree() const { return degree_; }

  // phi(letter) = sum_m coeff_m * letter_m; coefficients must be real.
  void set_letter_action(int letter, std::vector<std::pair<int, double>> action);
  void set_raising(int letter, Series degree2_block);
  void set_letter_class(int letter, LetterClass c);
  LetterClass letter_class(int letter) const { return classes_.at(letter); }

  // Checks that the degree-one action is an involution.
  void validate() const;

  // phi_infty extended as an algebra homomorphism, truncated.
  Series apply(const Series& x) const;

  // phi(e_i) = -e_i with zero raising block; both letters Eisenstein of sign -1.
  static FrobeniusSpec kz(int truncation_degree);

 private:
  Series letter_image(int letter) const;
  Alphabet alphabet_;
  int degree_;
  std::vector<std::vector<std::pair<int, double>>> actions_;
  std::vector<std::optional<Series>> raisings_;
  std::vector<LetterClass> classes_;
};

// R_eps(z) = z + conj(z) for eps = +1, z - conj(z) for eps = -1.
cplx signed_conj(cplx z, int eps);

// Coefficient-wise complex conjugation (the de Rham conjugation c_dR).
Series conj_coefficients(const Series& x);

// Betti conjugation c_B = c_dR o phi_infty: conjugate each coefficient, then
// apply phi_infty word-wise.
Series conj_betti(const Series& g, const FrobeniusSpec& spec);

// I(b,y) = T(gamma) c_B(T(gamma))^{-1} for any path gamma from b to y;
// group-like and independent of the homotopy class of gamma.
Series frobenius_series(const Connection& conn, const FrobeniusSpec& spec, const Path& gamma,
                        const TransportOptions& opt = {});

// Hall coordinates of log I(b,y) up to the requested depth.
struct BWTable {
  cplx point;
  std::map<std::string, cplx> values;  // Hall label -> D_h(b, y)
};

BWTable bw_table(const Connection& conn, const FrobeniusSpec& spec, const Path& gamma, int depth,
                 const TransportOptions& opt = {}, double lie_tol = 1e-6);

// Inputs for the length-two closed form. All integrals are regularized
// iterated integrals along the same path gamma from b to y. In the mixed
// cases the leading form F of the length-two integrals is omega for
// omega in Bh and conj(omega) for omega in Bah, as in the case display.
struct LengthTwoCase {
  LetterClass class_w, class_wp;
  cplx int_w = 0.0;          // int_gamma omega
  cplx int_wp = 0.0;         // int_gamma omega'
  cplx int_pair = 0.0;       // int_gamma F omega'
  cplx int_pair_conj = 0.0;  // int_gamma F conj(omega')   (mixed cases)
  cplx int_alpha = 0.0;      // int_gamma alpha_{omega,omega'}
  // value of int_gamma conj(alpha_{conj omega, conj omega'}) in the (B0,B0)
  // case, of int_gamma conj(alpha_{conj omega, omega'}) in the (Bh,Be) case
  cplx int_alpha_bar = 0.0;
  // matrix coefficients <[w] ⊗ [w'], phi^{[1,2]}([eta]^v)> paired with the
  // degree-one transports int_gamma eta (conjugated inside the formula)
  std::vector<std::pair<cplx, cplx>> raising_terms;  // (coefficient, int_gamma eta)
};

// The length-two closed form for D_{[w,w']}(b,y); the supported cases are
// (B0,B0) of equal type, (Be,Be), (Bh,Be) and (Bah,Be). Other combinations
// throw ValidationError.
cplx length_two_closed_form(const LengthTwoCase& data);

// Length-one closed form: 0 on B0 letters, R_{-eps(w)}(int_gamma w) on Be.
cplx length_one_closed_form(LetterClass c, cplx int_w);

}  // namespace unipar
