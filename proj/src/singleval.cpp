#include "unipar/singleval.hpp"

#include <cmath>

namespace unipar {

int eigen_sign(LetterClass c) {
  switch (c) {
    case LetterClass::eisenstein_plus:
      return +1;
    case LetterClass::eisenstein_minus:
      return -1;
    default:
      throw ValidationError("eigen_sign: letter is not of Eisenstein class");
  }
}

FrobeniusSpec::FrobeniusSpec(Alphabet alphabet, int truncation_degree)
    : alphabet_(std::move(alphabet)), degree_(truncation_degree) {
  actions_.resize(alphabet_.size());
  raisings_.resize(alphabet_.size());
  classes_.assign(alphabet_.size(), LetterClass::eisenstein_minus);
}

void FrobeniusSpec::set_letter_action(int letter, std::vector<std::pair<int, double>> action) {
  if (letter < 0 || letter >= alphabet_.size()) throw ValidationError("letter out of range");
  for (const auto& [m, c] : action) {
    (void)c;
    if (m < 0 || m >= alphabet_.size()) throw ValidationError("action letter out of range");
  }
  actions_[letter] = std::move(action);
}

void FrobeniusSpec::set_raising(int letter, Series degree2_block) {
  if (letter < 0 || letter >= alphabet_.size()) throw ValidationError("letter out of range");
  if (degree2_block.alphabet() != alphabet_ || degree2_block.degree() != degree_)
    throw ValidationError("raising block alphabet/truncation mismatch");
  for (int n = 0; n <= degree2_block.degree(); ++n)
    if (n != 2 && degree2_block.max_abs_degree(n) != 0.0)
      throw ValidationError("raising block must be concentrated in degree 2");
  raisings_[letter] = std::move(degree2_block);
}

void FrobeniusSpec::set_letter_class(int letter, LetterClass c) {
  if (letter < 0 || letter >= alphabet_.size()) throw ValidationError("letter out of range");
  classes_[letter] = c;
}

void FrobeniusSpec::validate() const {
  const int k = alphabet_.size();
  // degree-one involution test: phi(phi(e)) = e for every letter
  for (int l = 0; l < k; ++l) {
    if (actions_[l].empty()) throw ValidationError("letter without Frobenius action");
    std::vector<double> twice(k, 0.0);
    for (const auto& [m, c] : actions_[l])
      for (const auto& [m2, c2] : actions_.at(m)) twice[m2] += c * c2;
    for (int m = 0; m < k; ++m) {
      const double expect = (m == l) ? 1.0 : 0.0;
      if (std::abs(twice[m] - expect) > 1e-12)
        throw ValidationError("phi_infty is not an involution in degree one");
    }
  }
}

Series FrobeniusSpec::letter_image(int letter) const {
  Series img(alphabet_, degree_);
  if (actions_[letter].empty()) throw ValidationError("letter without Frobenius action");
  for (const auto& [m, c] : actions_[letter]) img.add_coeff(Word{m}, c);
  if (raisings_[letter]) img += *raisings_[letter];
  return img;
}

Series FrobeniusSpec::apply(const Series& x) const {
  Series out(alphabet_, degree_);
  for (const auto& [w, v] : x.entries()) {
    if (w.empty()) {
      out.add_coeff({}, v);
      continue;
    }
    Series prod = letter_image(w[0]);
    for (std::size_t i = 1; i < w.size(); ++i) prod = mul(prod, letter_image(w[i]));
    prod *= v;
    out += prod;
  }
  return out;
}

FrobeniusSpec FrobeniusSpec::kz(int truncation_degree) {
  FrobeniusSpec s(Alphabet::standard(2), truncation_degree);
  s.set_letter_action(0, {{0, -1.0}});
  s.set_letter_action(1, {{1, -1.0}});
  s.set_letter_class(0, LetterClass::eisenstein_minus);
  s.set_letter_class(1, LetterClass::eisenstein_minus);
  return s;
}

cplx signed_conj(cplx z, int eps) {
  if (eps != 1 && eps != -1) throw ValidationError("signed_conj: sign must be +1 or -1");
  return eps == 1 ? z + std::conj(z) : z - std::conj(z);
}

Series conj_coefficients(const Series& x) {
  Series out = x;
  for (int n = 0; n <= out.degree(); ++n)
    for (auto& c : out.degree_data(n)) c = std::conj(c);
  return out;
}

Series conj_betti(const Series& g, const FrobeniusSpec& spec) {
  if (g.alphabet() != spec.alphabet() || g.degree() != spec.degree())
    throw ValidationError("conj_betti: alphabet/truncation mismatch");
  return spec.apply(conj_coefficients(g));
}

Series frobenius_series(const Connection& conn, const FrobeniusSpec& spec, const Path& gamma,
                        const TransportOptions& opt) {
  spec.validate();
  const Series t = regularized_transport(conn, gamma, opt);
  return mul(t, inverse(conj_betti(t, spec)));
}

BWTable bw_table(const Connection& conn, const FrobeniusSpec& spec, const Path& gamma, int depth,
                 const TransportOptions& opt, double lie_tol) {
  if (depth < 1 || depth > conn.degree())
    throw ValidationError("bw_table: depth must lie in [1, truncation degree]");
  if (depth > 4) throw ValidationError("bw_table: depth capped at 4");
  const Series ifrob = frobenius_series(conn, spec, gamma, opt);
  const Series l = log(ifrob);
  // rebuild at the table depth: slices beyond it do not enter the solve
  Series truncated(l.alphabet(), depth);
  for (const auto& [w, v] : l.entries())
    if (!w.empty() && static_cast<int>(w.size()) <= depth) truncated.set_coeff(w, v);
  const auto basis = lyndon_basis(conn.alphabet(), depth);
  BWTable out;
  out.point = gamma.end();
  out.values = hall_coordinates(truncated, basis, lie_tol);
  return out;
}

cplx length_one_closed_form(LetterClass c, cplx int_w) {
  if (!is_eisenstein(c)) return 0.0;
  return signed_conj(int_w, -eigen_sign(c));
}

cplx length_two_closed_form(const LengthTwoCase& d) {
  cplx raising = 0.0;
  for (const auto& [coeff, int_eta] : d.raising_terms) raising += coeff * std::conj(int_eta);

  const bool w_b0 = !is_eisenstein(d.class_w);
  const bool wp_b0 = !is_eisenstein(d.class_wp);

  if (w_b0 && wp_b0) {
    if (d.class_w != d.class_wp)
      throw ValidationError(
          "length_two_closed_form: mixed holomorphic/antiholomorphic pair not computed");
    return -raising + d.int_alpha - d.int_alpha_bar;
  }
  if (!w_b0 && !wp_b0) {
    const int e = eigen_sign(d.class_w);
    const int ep = eigen_sign(d.class_wp);
    return -raising + signed_conj(d.int_pair, -e * ep) -
           0.5 * signed_conj(d.int_w, -e) * signed_conj(d.int_wp, ep);
  }
  if (w_b0 && !wp_b0) {
    const int ep = eigen_sign(d.class_wp);
    // int_gamma F R_{-eps'}(omega') = int F omega' - eps' int F conj(omega')
    const cplx iter = d.int_pair - static_cast<double>(ep) * d.int_pair_conj;
    if (d.class_w == LetterClass::holomorphic)
      return -raising + iter - static_cast<double>(ep) * d.int_alpha_bar;
    return -raising + iter + d.int_alpha;
  }
  throw ValidationError("length_two_closed_form: (Be, B0) pair not computed");
}

}  // namespace unipar
