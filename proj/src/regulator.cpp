#include "unipar/regulator.hpp"

#include <algorithm>
#include <cmath>

namespace unipar {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

cplx zeta_local_infinity(const LocalRep& pf, const LocalRep& pg, cplx s) {
  if (pf.p != pg.p || pf.r != pg.r)
    throw ValidationError("zeta_local_infinity: mismatched local data");
  if (pf.r < 1) throw ValidationError("zeta_local_infinity: p must divide the level");
  if (pf.r > 1) {
    if (pf.kind != LocalRep::Kind::deep || pg.kind != LocalRep::Kind::deep)
      throw ValidationError("zeta_local_infinity: r > 1 requires deep-ramification data");
    return 1.0;
  }
  if (pf.kind != LocalRep::Kind::steinberg_twist || pg.kind != LocalRep::Kind::steinberg_twist)
    throw ValidationError(
        "zeta_local_infinity: r = 1 with trivial central character must be a Steinberg twist");
  const double p = static_cast<double>(pf.p);
  const cplx den = 1.0 - static_cast<double>(pf.chi * pg.chi) * std::pow(p, -s - 1.0);
  if (std::abs(den) < 1e-14) throw ValidationError("zeta_local_infinity: pole at s");
  return 1.0 / den;
}

cplx zeta_local_zero(const LocalRep& pf, const LocalRep& pg, cplx s) {
  if (pf.epsilon == 0 || pg.epsilon == 0)
    throw ValidationError("zeta_local_zero: missing epsilon factor");
  const double sign = static_cast<double>(pf.epsilon * pg.epsilon);
  const double p = static_cast<double>(pf.p);
  return sign * std::pow(p, static_cast<double>(pf.r) * (s - 1.0)) *
         zeta_local_infinity(pf, pg, s);
}

int64_t zero_coset_count(int64_t p, int r) {
  int64_t c = 1;
  for (int i = 0; i < r; ++i) c *= p;
  return c;
}

double k0_index(int level) {
  double idx = static_cast<double>(level);
  int m = level;
  for (int p = 2; p * p <= m || m > 1; ++p) {
    if (p * p > m && m > 1) {
      idx *= 1.0 + 1.0 / m;
      break;
    }
    if (m % p != 0) continue;
    idx *= 1.0 + 1.0 / p;
    while (m % p == 0) m /= p;
  }
  return idx;
}

void validate_cusp_near_zero(int level, const std::vector<CuspLocal>& cusp) {
  int64_t rebuilt = 1;
  for (const auto& comp : cusp) {
    if (comp.p < 2 || comp.r < 1) throw ValidationError("invalid cusp component");
    for (int i = 0; i < comp.r; ++i) rebuilt *= comp.p;
    for (const auto& other : cusp)
      if (&other != &comp && other.p == comp.p)
        throw ValidationError("duplicate cusp component at p");
  }
  if (rebuilt != level)
    throw ValidationError("cusp components do not match the prime factorization of the level");
}

namespace {

LocalRep local_rep_of(const EigenformData& f, int64_t p, int r) {
  if (r == 1) {
    const double ap = f.a(p);
    const int chi = (ap > 0.5) ? 1 : (ap < -0.5 ? -1 : 0);
    if (chi == 0 || std::abs(ap - chi) > 1e-9)
      throw ValidationError("a(p) must be +-1 at a prime exactly dividing the level");
    return LocalRep::steinberg(p, chi, f.has_epsilon(static_cast<int>(p))
                                           ? f.epsilon(static_cast<int>(p))
                                           : 0);
  }
  return LocalRep::deep_ramified(p, r,
                                 f.has_epsilon(static_cast<int>(p))
                                     ? f.epsilon(static_cast<int>(p))
                                     : 0);
}

}  // namespace

cplx zeta_global_bracket(const EigenformData& f, const EigenformData& g,
                         const std::vector<CuspLocal>& cusp, cplx s) {
  validate_cusp_near_zero(f.level(), cusp);
  cplx prod = 1.0;
  for (const auto& comp : cusp) {
    if (comp.component != CuspLocal::Component::zero) continue;
    const int ef = f.epsilon(static_cast<int>(comp.p));
    const int eg = g.epsilon(static_cast<int>(comp.p));
    // |N|_p^{1-s} = p^{-r(1-s)}
    prod *= static_cast<double>(ef * eg) *
            std::pow(static_cast<double>(comp.p), -static_cast<double>(comp.r) * (1.0 - s));
  }
  return 1.0 - prod;
}

cplx zeta_global(const EigenformData& f, const EigenformData& g,
                 const std::vector<CuspLocal>& cusp, cplx s, int64_t p_max,
                 std::optional<cplx> L_full_override) {
  if (f.level() != g.level()) throw ValidationError("zeta_global: mismatched levels");
  validate_cusp_near_zero(f.level(), cusp);
  cplx L;
  if (L_full_override) {
    L = *L_full_override;
  } else {
    if (s.real() <= 1.0)
      throw ValidationError("zeta_global: Re(s) <= 1 requires an L-value override");
    L = partial_L(f, g, s, p_max).value;
    for (const auto& comp : cusp) {
      const auto lf = local_rep_of(f, comp.p, comp.r);
      const auto lg = local_rep_of(g, comp.p, comp.r);
      L *= zeta_local_infinity(lf, lg, s);
    }
  }
  return L / k0_index(f.level()) * zeta_global_bracket(f, g, cusp, s);
}

std::vector<std::vector<cplx>> matrix_coeff_second_case(const SecondCaseTable& table,
                                                        BaseMode mode) {
  const std::size_t n = table.h_labels.size();
  if (table.pair_values.size() != n || table.h_norms.size() != n)
    throw ValidationError("matrix_coeff_second_case: incomplete table");
  for (const auto& row : table.pair_values)
    if (row.size() != n) throw ValidationError("matrix_coeff_second_case: incomplete table");
  for (double nn : table.h_norms)
    if (!(nn > 0.0)) throw ValidationError("matrix_coeff_second_case: norms must be positive");
  if (mode == BaseMode::rational && !table.e_at_base)
    throw ValidationError("matrix_coeff_second_case: rational mode needs E(b)");
  std::vector<std::vector<cplx>> out(n, std::vector<cplx>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      cplx v = table.pair_values[j][i];
      if (i == j && mode == BaseMode::rational) v -= *table.e_at_base * table.h_norms[i];
      out[j][i] = v / table.h_norms[i];
    }
  }
  return out;
}

std::vector<std::vector<std::vector<cplx>>> matrix_coeff_third_case(const ThirdCaseTable& table) {
  if (!table.orthogonality_declared)
    throw ValidationError(
        "matrix_coeff_third_case: the full display without orthogonality is not supported");
  const std::size_t ne = table.e_labels.size();
  std::vector<std::vector<std::vector<cplx>>> out;
  for (const auto& eta : table.etas) {
    if (!(eta.norm > 0.0))
      throw ValidationError("matrix_coeff_third_case: norms must be positive");
    if (eta.f_pair.size() != ne)
      throw ValidationError("matrix_coeff_third_case: incomplete table");
    std::vector<std::vector<cplx>> block(ne, std::vector<cplx>(ne, 0.0));
    for (std::size_t e = 0; e < ne; ++e) {
      if (eta.f_pair[e].size() != ne)
        throw ValidationError("matrix_coeff_third_case: incomplete table");
      for (std::size_t ep = 0; ep < ne; ++ep)
        block[e][ep] = -0.5 * eta.f_pair[e][ep] / eta.norm;
    }
    out.push_back(std::move(block));
  }
  return out;
}

double RegulatorVector::max_abs() const {
  double m = 0.0;
  for (const auto& [k, v] : coords) {
    (void)k;
    m = std::max(m, std::abs(v));
  }
  return m;
}

namespace {

std::string basis_label(const std::string& a, const std::string& b, const std::string& c) {
  return "e[" + a + ";" + b + ";" + c + "]";
}

}  // namespace

RegulatorVector reg2_assemble(const Reg2Inputs& in) {
  const std::size_t nf = in.form_labels.size();
  const std::size_t nc = in.cusp_labels.size();
  if (in.petersson_norms.size() != nf || in.epsilons.size() != nf ||
      in.cusps.size() != nc || in.residue_L.size() != nf)
    throw ValidationError("reg2_assemble: inconsistent input sizes");
  if (in.mode == BaseMode::rational && in.eis_at_base.size() != nc)
    throw ValidationError("reg2_assemble: rational mode needs E_c(b,1) per cusp");
  if (!(in.zeta_level_2 > 0.0)) throw ValidationError("reg2_assemble: zeta^{(N)}(2) required");
  for (double nn : in.petersson_norms)
    if (!(nn > 0.0)) throw ValidationError("reg2_assemble: Petersson norms must be positive");

  RegulatorVector out;
  out.mode = in.mode;
  for (std::size_t c = 0; c < nc; ++c) {
    // sign product and log N_S over the 0_p components of this cusp
    double log_ns = 0.0;
    for (const auto& comp : in.cusps[c])
      if (comp.component == CuspLocal::Component::zero)
        log_ns += comp.r * std::log(static_cast<double>(comp.p));
    for (std::size_t fi = 0; fi < nf; ++fi) {
      for (std::size_t gi = 0; gi < nf; ++gi) {
        int sign_prod = 1;
        for (const auto& comp : in.cusps[c]) {
          if (comp.component != CuspLocal::Component::zero) continue;
          sign_prod *= in.epsilons[fi].at(static_cast<int>(comp.p)) *
                       in.epsilons[gi].at(static_cast<int>(comp.p));
        }
        const double denom =
            in.zeta_level_2 * in.petersson_norms[fi] * in.petersson_norms[gi];
        cplx coord = 0.0;
        if (fi != gi) {
          if (in.off_diagonal_L.size() != nf || in.off_diagonal_L[fi].size() != nf)
            throw ValidationError("reg2_assemble: missing off-diagonal L-values");
          const cplx L1 = in.off_diagonal_L[fi][gi];
          const double bracket = 1.0 - static_cast<double>(sign_prod);
          // -2 pi i L(1) (1 - prod eps) / (zeta (f,f)(g,g))
          const cplx real_part = L1 * bracket / denom;
          coord = cplx(0.0, -2.0 * kPi) * real_part;
        } else {
          if (sign_prod != 1)
            throw ValidationError("reg2_assemble: diagonal sign product must be +1");
          // lim (1 - N_S^{s-1}) / (s-1) = -log N_S against the residue
          const double real_part = in.residue_L[fi] * (-log_ns) / denom;
          coord = cplx(0.0, -2.0 * kPi * real_part);
          if (in.mode == BaseMode::rational)
            coord += cplx(-in.eis_at_base[c] / in.petersson_norms[fi], 0.0);
        }
        out.coords[basis_label(in.form_labels[fi], in.form_labels[gi], in.cusp_labels[c])] =
            coord;
      }
    }
  }
  return out;
}

RegulatorVector reg3_assemble(const Reg3Inputs& in) {
  const std::size_t nf = in.form_labels.size();
  const std::size_t nc = in.cusp_labels.size();
  RegulatorVector out;
  out.mode = BaseMode::tangential;
  if (nc < 2) return out;  // fewer than two cusps: the zero vector
  if (in.petersson_norms.size() != nf || in.i_n.size() != nf || in.l_half.size() != nf ||
      in.l_three_half.size() != nf)
    throw ValidationError("reg3_assemble: inconsistent input sizes");
  if (!(in.zeta_level_2 > 0.0) || !(in.index > 0.0))
    throw ValidationError("reg3_assemble: zeta^{(N)}(2) and index required");
  for (std::size_t fi = 0; fi < nf; ++fi) {
    if (in.i_n[fi].size() != nc) throw ValidationError("reg3_assemble: I_N table incomplete");
    for (std::size_t c = 0; c < nc; ++c) {
      if (in.i_n[fi][c].size() != nc)
        throw ValidationError("reg3_assemble: I_N table incomplete");
      for (std::size_t d = 0; d < nc; ++d) {
        if (c == d) continue;
        const cplx diff = in.i_n[fi][c][d] - in.i_n[fi][d][c];
        const cplx val = cplx(0.0, 2.0 * kPi) * in.index * diff * in.l_half[fi] *
                         in.l_three_half[fi] /
                         (in.zeta_level_2 * in.petersson_norms[fi]);
        out.coords[basis_label(in.form_labels[fi], in.cusp_labels[c], in.cusp_labels[d])] = val;
      }
    }
  }
  return out;
}

namespace {

// Solve Res f1(d) + b d + c d^2 = v over three ladder points, where
// f1(d) = 1 - M^{-d} zeta^{(N)}(2+2d)/zeta^{(N)}(2) models the truncated
// Dirichlet tail: (s-1) zeta^{(N)}(2s) D_M(s) = Res (1 - M^{-d} zr) + O(d).
double solve_residue_triple(const double* d, const double* f1, const double* v) {
  double m[3][4];
  for (int i = 0; i < 3; ++i) {
    m[i][0] = f1[i];
    m[i][1] = d[i];
    m[i][2] = d[i] * d[i];
    m[i][3] = v[i];
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    if (std::abs(m[col][col]) < 1e-14)
      throw ToleranceError("residue ladder system is singular");
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double fac = m[r][col] / m[col][col];
      for (int k = col; k < 4; ++k) m[r][k] -= fac * m[col][k];
    }
  }
  return m[0][3] / m[0][0];
}

}  // namespace

ResidueEstimate residue_rankin_selberg(const EigenformData& f, int64_t n_max,
                                       std::vector<double> deltas) {
  if (deltas.size() < 3) throw ValidationError("residue ladder needs at least three deltas");
  std::sort(deltas.begin(), deltas.end(), std::greater<double>());
  // a fourth, coarser rung supplies the stability comparison
  if (deltas.size() == 3) deltas.insert(deltas.begin(), 2.0 * deltas.front());

  ResidueEstimate est;
  est.deltas = deltas;
  const int64_t p_max = std::min<int64_t>(n_max, 200000);
  const double zeta2 = zeta_partial(f.level(), 2.0, p_max).value.real();
  const double m_log = std::log(static_cast<double>(n_max));
  std::vector<double> vals, basis;
  for (double d : deltas) {
    const cplx s(1.0 + d, 0.0);
    const double dir = rankin_dirichlet(f, f, s, n_max).value.real();
    const double zeta2s = zeta_partial(f.level(), 2.0 * s, p_max).value.real();
    vals.push_back(d * zeta2s * dir);
    basis.push_back(1.0 - std::exp(-d * m_log) * (zeta2s / zeta2));
    est.corrected.push_back(vals.back() / basis.back());
  }
  // overlapping three-point solves across the ladder
  for (std::size_t i = 0; i + 3 <= deltas.size(); ++i)
    est.richardson.push_back(
        solve_residue_triple(&deltas[i], &basis[i], &vals[i]));
  est.value = est.richardson.back();
  double spread = 0.0;
  for (double r : est.richardson)
    spread = std::max(spread, std::abs(r - est.value) / std::abs(est.value));
  est.spread = spread;
  return est;
}

DeskRunResult desk_run_prime_level(const EigenformData& f, BaseMode mode, int64_t n_max,
                                   double eis_at_base, const PeterssonOptions& pet_opt) {
  const int p = f.level();
  // prime level check
  for (int q = 2; q * q <= p; ++q)
    if (p % q == 0) throw ValidationError("desk run supports prime level only");
  if (!f.has_epsilon(p)) throw ValidationError("desk run needs the epsilon factor at the level");

  DeskRunResult out;
  out.zeta_level_2 = zeta_partial(p, 2.0, std::min<int64_t>(n_max, 200000)).value.real();
  out.petersson_norm = petersson(f, f, pet_opt).real();
  out.residue = residue_rankin_selberg(f, n_max);
  out.residue_stability = out.residue.spread;

  Reg2Inputs r2;
  r2.mode = mode;
  r2.form_labels = {f.source_tag().empty() ? std::string("f") : f.source_tag()};
  r2.petersson_norms = {out.petersson_norm};
  r2.epsilons = {{{p, f.epsilon(p)}}};
  r2.cusp_labels = {"0"};
  r2.cusps = {{CuspLocal{p, 1, CuspLocal::Component::zero}}};
  r2.zeta_level_2 = out.zeta_level_2;
  r2.off_diagonal_L = {{0.0}};
  r2.residue_L = {out.residue.value};
  if (mode == BaseMode::rational) r2.eis_at_base = {eis_at_base};
  out.reg2 = reg2_assemble(r2);

  Reg3Inputs r3;
  r3.form_labels = r2.form_labels;
  r3.petersson_norms = r2.petersson_norms;
  r3.cusp_labels = r2.cusp_labels;  // a single cusp: reg3 vanishes
  r3.zeta_level_2 = out.zeta_level_2;
  r3.index = k0_index(p);
  out.reg3 = reg3_assemble(r3);

  out.nonsplit = out.residue.value > 0.0 && out.reg2.max_abs() > 0.0 &&
                 out.residue.spread <= 0.05;

  out.intro_display_diagonal =
      cplx(0.0, -2.0 * kPi) * out.residue.value * std::log(static_cast<double>(p)) /
      (out.zeta_level_2 * out.petersson_norm * out.petersson_norm);
  const cplx assembled = out.reg2.coords.begin()->second;
  out.intro_display_ratio =
      std::abs(out.intro_display_diagonal) > 0.0 ? assembled / out.intro_display_diagonal
                                                 : cplx(0.0);
  return out;
}

}  // namespace unipar
