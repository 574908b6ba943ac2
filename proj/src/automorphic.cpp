#include "unipar/automorphic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "unipar/parallel.hpp"

namespace unipar {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool close(double a, double b, double tol = 1e-9) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// smallest-prime-factor table for factoring every n <= n_max
std::vector<int32_t> spf_table(int64_t n) {
  std::vector<int32_t> spf(n + 1, 0);
  for (int64_t i = 2; i <= n; ++i) {
    if (spf[i] == 0)
      for (int64_t j = i; j <= n; j += i)
        if (spf[j] == 0) spf[j] = static_cast<int32_t>(i);
  }
  return spf;
}

}  // namespace

std::vector<int64_t> primes_up_to(int64_t n) {
  if (n > 50'000'000) throw ValidationError("prime bound too large");
  std::vector<bool> comp(n + 1, false);
  std::vector<int64_t> out;
  for (int64_t i = 2; i <= n; ++i) {
    if (comp[i]) continue;
    out.push_back(i);
    for (int64_t j = i * i; j <= n; j += i) comp[j] = true;
  }
  return out;
}

EigenformData::EigenformData(int level, std::vector<double> a_from_1, std::string source_tag)
    : level_(level), a_(std::move(a_from_1)), source_tag_(std::move(source_tag)) {
  if (level_ < 1) throw ValidationError("level must be positive");
  if (a_.empty()) throw ValidationError("eigenvalue list is empty");
}

double EigenformData::a(int64_t n) const {
  if (n < 1 || n > n_max()) throw ValidationError("a(n) requested beyond available data");
  return a_[n - 1];
}

void EigenformData::set_epsilon(int p, int eps) {
  if (level_ % p != 0) throw ValidationError("epsilon factors attach to primes dividing the level");
  if (eps != 1 && eps != -1) throw ValidationError("epsilon must be +1 or -1");
  epsilon_local_[p] = eps;
}

int EigenformData::epsilon(int p) const {
  auto it = epsilon_local_.find(p);
  if (it == epsilon_local_.end()) throw ValidationError("missing epsilon factor at p");
  return it->second;
}

bool EigenformData::has_epsilon(int p) const { return epsilon_local_.count(p) > 0; }

void EigenformData::validate() const {
  if (!close(a_[0], 1.0)) throw ValidationError("eigenform not normalized: a(1) != 1");
  const int64_t M = n_max();
  const auto spf = spf_table(M);
  // prime power checks
  for (int64_t p = 2; p <= M; ++p) {
    if (spf[p] != p) continue;  // not prime
    const bool good = (level_ % p != 0);
    if (good && std::abs(a(p)) > 2.0 * std::sqrt(static_cast<double>(p)) + 1e-9)
      throw ValidationError("Ramanujan bound violated at p=" + std::to_string(p));
    double prev = 1.0, cur = a(p);
    for (int64_t q = p * p; q <= M; q *= p) {
      const double expect = good ? a(p) * cur - static_cast<double>(p) * prev : a(p) * cur;
      if (!close(a(q), expect))
        throw ValidationError("Hecke recursion violated at " + std::to_string(q));
      prev = cur;
      cur = a(q);
    }
  }
  // multiplicativity across coprime factors, via the factorization
  for (int64_t n = 2; n <= M; ++n) {
    int64_t m = n;
    double prod = 1.0;
    while (m > 1) {
      const int64_t p = spf[m];
      int64_t q = 1;
      while (m % p == 0) {
        m /= p;
        q *= p;
      }
      prod *= a(q);
    }
    if (!close(a(n), prod))
      throw ValidationError("multiplicativity violated at n=" + std::to_string(n));
  }
}

EigenformData ingest_eigenform(std::istream& in, int level, std::string source_tag) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty eigenvalue file");
  auto strip = [](std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(),
                           [](char c) { return c == ' ' || c == '\r' || c == '\t'; }),
            s.end());
    return s;
  };
  if (strip(line) != "n,a_n") throw ValidationError("expected header 'n,a_n'");
  std::vector<double> a;
  int64_t expect = 1;
  while (std::getline(in, line)) {
    line = strip(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError("malformed eigenvalue row: " + line);
    const int64_t n = std::stoll(line.substr(0, comma));
    if (n != expect)
      throw ValidationError("eigenvalue rows must be contiguous from 1; got n=" +
                            std::to_string(n));
    a.push_back(std::stod(line.substr(comma + 1)));
    ++expect;
  }
  EigenformData data(level, std::move(a), std::move(source_tag));
  data.validate();
  return data;
}

EigenformData ingest_eigenform_file(const std::string& path, int level) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open eigenvalue file: " + path);
  // tag with the file stem
  std::string tag = path;
  if (const auto slash = tag.find_last_of("/\\"); slash != std::string::npos)
    tag = tag.substr(slash + 1);
  if (const auto dot = tag.find_last_of('.'); dot != std::string::npos && dot > 0)
    tag = tag.substr(0, dot);
  return ingest_eigenform(in, level, tag);
}

LocalRep LocalRep::unramified_from_ap(int64_t p, double ap) {
  LocalRep r;
  r.kind = Kind::unramified;
  r.p = p;
  const cplx half = ap / (2.0 * std::sqrt(static_cast<double>(p)));
  const cplx disc = std::sqrt(half * half - 1.0);
  r.alpha = half + disc;
  r.alpha_prime = half - disc;
  return r;
}

LocalRep LocalRep::steinberg(int64_t p, int chi, int epsilon) {
  if (chi != 1 && chi != -1) throw ValidationError("steinberg twist chi must be +1 or -1");
  LocalRep rep;
  rep.kind = Kind::steinberg_twist;
  rep.p = p;
  rep.r = 1;
  rep.chi = chi;
  rep.epsilon = epsilon;
  return rep;
}

LocalRep LocalRep::deep_ramified(int64_t p, int r, int epsilon) {
  if (r < 2) throw ValidationError("deep ramification requires v_p(N) >= 2");
  LocalRep rep;
  rep.kind = Kind::deep;
  rep.p = p;
  rep.r = r;
  rep.epsilon = epsilon;
  return rep;
}

cplx local_L_factor(const LocalRep& pf, const LocalRep& pg, cplx s) {
  if (pf.p != pg.p) throw ValidationError("local L-factor: mismatched primes");
  const double p = static_cast<double>(pf.p);
  if (pf.kind != pg.kind)
    throw ValidationError("local L-factor: mixed local types are not supported");
  if (pf.kind == LocalRep::Kind::deep) return 1.0;
  if (pf.kind == LocalRep::Kind::steinberg_twist) {
    const cplx den = 1.0 - static_cast<double>(pf.chi * pg.chi) * std::pow(p, -s - 1.0);
    if (std::abs(den) < 1e-14) throw ValidationError("local L-factor has a pole at s");
    return 1.0 / den;
  }
  // expand prod (1 - mu x) over mu in {ab, a'b, ab', a'b'} by symmetric
  // functions; with aa' = bb' = 1 this is 1 - s1 x + s2 x^2 - s1 x^3 + x^4,
  // exactly real for real eigenvalue data
  const cplx x = std::pow(p, -s);
  const cplx sf = pf.alpha + pf.alpha_prime;
  const cplx sg = pg.alpha + pg.alpha_prime;
  const cplx s1 = sf * sg;
  const cplx s2 = sf * sf + sg * sg - 2.0;
  const cplx den = 1.0 - s1 * x + s2 * x * x - s1 * x * x * x + x * x * x * x;
  if (std::abs(den) < 1e-14) throw ValidationError("local L-factor has a pole at s");
  return 1.0 / den;
}

ValueWithTail partial_L(const EigenformData& f, const EigenformData& g, cplx s, int64_t p_max) {
  if (f.level() != g.level()) throw ValidationError("partial_L: mismatched levels");
  const double sigma = s.real();
  if (sigma <= 1.0) throw ValidationError("partial_L: Re(s) must exceed 1");
  if (p_max < 2) throw ValidationError("partial_L: p_max must be at least 2");
  if (p_max > std::min(f.n_max(), g.n_max()))
    throw ValidationError("partial_L: insufficient eigenvalue data");
  const auto primes = primes_up_to(p_max);
  cplx prod = 1.0;
  for (int64_t p : primes) {
    if (f.level() % p == 0) continue;
    const auto lf = LocalRep::unramified_from_ap(p, f.a(p));
    const auto lg = LocalRep::unramified_from_ap(p, g.a(p));
    prod *= local_L_factor(lf, lg, s);
  }
  const double tail_log = 4.0 * std::pow(static_cast<double>(p_max), 1.0 - sigma) /
                          ((sigma - 1.0) * std::log(static_cast<double>(p_max)));
  return {prod, std::abs(prod) * tail_log};
}

ValueWithTail zeta_partial(int level, cplx s, int64_t p_max) {
  const double sigma = s.real();
  if (sigma <= 1.0) throw ValidationError("zeta_partial: Re(s) must exceed 1");
  const auto primes = primes_up_to(p_max);
  cplx prod = 1.0;
  for (int64_t p : primes) {
    if (level % p == 0) continue;
    prod /= 1.0 - std::pow(static_cast<double>(p), -s);
  }
  const double tail_log = std::pow(static_cast<double>(p_max), 1.0 - sigma) /
                          ((sigma - 1.0) * std::log(static_cast<double>(p_max)));
  return {prod, std::abs(prod) * tail_log};
}

ValueWithTail rankin_dirichlet(const EigenformData& f, const EigenformData& g, cplx s,
                               int64_t n_max) {
  const double sigma = s.real();
  if (sigma <= 1.0) throw ValidationError("rankin_dirichlet: Re(s) must exceed 1");
  if (n_max > std::min(f.n_max(), g.n_max()))
    throw ValidationError("rankin_dirichlet: insufficient eigenvalue data");
  const cplx sum = chunked_reduce<cplx>(
      n_max, 0.0,
      [&](int64_t lo, int64_t hi) {
        cplx acc = 0.0;
        for (int64_t i = lo; i < hi; ++i) {
          const int64_t n = i + 1;
          acc += f.a(n) * g.a(n) * std::pow(static_cast<double>(n), -(s + 1.0));
        }
        return acc;
      },
      [](cplx a, cplx b) { return a + b; });
  // |a_n b_n| <= C n on average (Rankin-Selberg); estimate C from the data
  double c_est = 0.0;
  for (int64_t n = std::max<int64_t>(1, n_max - 100); n <= n_max; ++n)
    c_est = std::max(c_est, std::abs(f.a(n) * g.a(n)) / static_cast<double>(n));
  const double tail =
      c_est * std::pow(static_cast<double>(n_max), 1.0 - sigma) / (sigma - 1.0);
  return {sum, tail};
}

EisensteinEvaluator::EisensteinEvaluator(int level, std::vector<int> zero_primes, double radius)
    : level_(level), zero_primes_(std::move(zero_primes)), radius_(radius) {
  if (level_ < 2) throw ValidationError("eisenstein: level must be at least 2");
  if (zero_primes_.empty())
    throw ValidationError("eisenstein: cusp must differ from infinity (no zero components)");
  for (int p : zero_primes_) {
    if (p < 2 || level_ % p != 0)
      throw ValidationError("eisenstein: zero components must sit at primes dividing the level");
  }
}

double EisensteinEvaluator::coset_count() const {
  double c = 1.0;
  for (int p : zero_primes_) {
    int64_t q = 1, m = level_;
    while (m % p == 0) {
      m /= p;
      q *= p;
    }
    c *= static_cast<double>(q);
  }
  return c;
}

bool EisensteinEvaluator::in_infinity_class(int64_t c) const { return c % level_ == 0; }

bool EisensteinEvaluator::in_cusp_class(int64_t c) const {
  for (int p : zero_primes_) {
    if (c % p == 0) return false;
  }
  int64_t m = level_;
  for (int p : zero_primes_)
    while (m % p == 0) m /= p;
  // remaining prime powers of the level must divide c
  return c % m == 0;
}

std::vector<cplx> EisensteinEvaluator::values_fixed_terms(const std::vector<cplx>& taus, cplx s,
                                                          double tail_target) const {
  if (taus.empty()) return {};
  if (s.real() < 1.5) throw ValidationError("eisenstein: Re(s) >= 1.5 required (convergence)");
  const cplx anchor = taus.front();
  const double y0 = anchor.imag();
  if (y0 <= 0.0) throw ValidationError("eisenstein: tau must lie in the upper half-plane");
  const double sigma = s.real();

  double R = radius_;
  if (R <= 0.0) {
    // tail of the truncated lattice sum, with a factor-2 slack on the count
    const double covol_bound = (1.0 / level_ + 1.0 / coset_count());
    const double num = 2.0 * 4.0 * kPi * kPi * std::pow(y0, sigma - 1.0) * covol_bound;
    R = std::pow(num / ((sigma - 1.0) * tail_target), 1.0 / (2.0 * sigma - 2.0));
    R = std::max(R, 10.0 * (1.0 + y0));
  }

  const bool real_s = (s.imag() == 0.0);
  const std::size_t npts = taus.size();
  std::vector<cplx> inf_sum(npts, 0.0), cusp_sum(npts, 0.0);

  // c = 0 row: the single primitive pair (0,1), infinity class
  for (std::size_t i = 0; i < npts; ++i)
    inf_sum[i] += real_s ? cplx(std::pow(taus[i].imag(), sigma))
                         : std::pow(cplx(taus[i].imag()), s);

  const double x0 = anchor.real();
  const int64_t c_hi = static_cast<int64_t>(R / y0) + 1;

  // per-point powers y^s reused across terms
  std::vector<double> y_sig(npts);
  std::vector<cplx> y_pow(npts);
  for (std::size_t i = 0; i < npts; ++i) {
    y_sig[i] = std::pow(taus[i].imag(), sigma);
    if (!real_s) y_pow[i] = std::pow(cplx(taus[i].imag()), s);
  }

  struct Acc {
    std::vector<cplx> inf, cusp;
  };
  Acc total = chunked_reduce<Acc>(
      c_hi, Acc{std::vector<cplx>(npts, 0.0), std::vector<cplx>(npts, 0.0)},
      [&](int64_t lo, int64_t hi) {
        Acc acc{std::vector<cplx>(npts, 0.0), std::vector<cplx>(npts, 0.0)};
        std::vector<int64_t> cfac;
        std::vector<int64_t> rem;
        for (int64_t c = lo + 1; c <= hi; ++c) {
          const bool inf_class = in_infinity_class(c);
          const bool cusp_class = in_cusp_class(c);
          if (!inf_class && !cusp_class) continue;
          const double cy = static_cast<double>(c) * y0;
          if (cy > R) continue;
          const double w = std::sqrt(R * R - cy * cy);
          const int64_t d_lo = static_cast<int64_t>(std::ceil(-c * x0 - w));
          const int64_t d_hi = static_cast<int64_t>(std::floor(-c * x0 + w));
          // prime factors of c drive the coprimality walk over d
          cfac.clear();
          int64_t m = c;
          for (int64_t q = 2; q * q <= m; ++q) {
            if (m % q) continue;
            cfac.push_back(q);
            while (m % q == 0) m /= q;
          }
          if (m > 1) cfac.push_back(m);
          rem.assign(cfac.size(), 0);
          for (std::size_t k = 0; k < cfac.size(); ++k)
            rem[k] = ((d_lo % cfac[k]) + cfac[k]) % cfac[k];
          for (int64_t d = d_lo; d <= d_hi; ++d) {
            bool coprime = true;
            for (std::size_t k = 0; k < cfac.size(); ++k) {
              if (rem[k] == 0) coprime = false;
              if (++rem[k] == cfac[k]) rem[k] = 0;
            }
            if (!coprime) continue;
            for (std::size_t i = 0; i < npts; ++i) {
              const double re = static_cast<double>(c) * taus[i].real() + static_cast<double>(d);
              const double im = static_cast<double>(c) * taus[i].imag();
              const double r2 = re * re + im * im;
              cplx term;
              if (real_s)
                term = (sigma == 2.0) ? cplx(y_sig[i] / (r2 * r2))
                                      : cplx(y_sig[i] * std::pow(r2, -sigma));
              else
                term = y_pow[i] * std::pow(cplx(r2), -s);
              if (inf_class) acc.inf[i] += term;
              if (cusp_class) acc.cusp[i] += term;
            }
          }
        }
        return acc;
      },
      [npts](Acc a, const Acc& b) {
        for (std::size_t i = 0; i < npts; ++i) {
          a.inf[i] += b.inf[i];
          a.cusp[i] += b.cusp[i];
        }
        return a;
      },
      128);

  std::vector<cplx> out(npts);
  const double inv_count = 1.0 / coset_count();
  for (std::size_t i = 0; i < npts; ++i) {
    inf_sum[i] += total.inf[i];
    cusp_sum[i] += total.cusp[i];
    out[i] = -4.0 * kPi * (inf_sum[i] - inv_count * cusp_sum[i]);
  }
  return out;
}

cplx EisensteinEvaluator::value(cplx tau, cplx s, double tail_target) const {
  return values_fixed_terms({tau}, s, tail_target)[0];
}

namespace {

// coset representatives of Gamma_0(N) \ SL_2(Z) indexed by P^1(Z/N)
struct CosetRep {
  int64_t a, b, c, d;
};

int64_t ext_gcd(int64_t a, int64_t b, int64_t& x, int64_t& y) {
  if (b == 0) {
    x = (a >= 0) ? 1 : -1;
    y = 0;
    return std::abs(a);
  }
  int64_t x1, y1;
  const int64_t g = ext_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

std::vector<CosetRep> coset_reps(int N) {
  std::vector<bool> covered(static_cast<std::size_t>(N) * N, false);
  std::vector<CosetRep> out;
  for (int c = 0; c < N; ++c) {
    for (int d = 0; d < N; ++d) {
      if (std::gcd(std::gcd(c, d), N) != 1) continue;
      if (covered[static_cast<std::size_t>(c) * N + d]) continue;
      // mark the whole unit orbit of (c:d)
      for (int u = 1; u < N || (N == 1 && u == 1); ++u) {
        if (std::gcd(u, N) != 1) continue;
        covered[static_cast<std::size_t>((c * u) % N) * N + (d * u) % N] = true;
      }
      int64_t cl = c, dl = d;
      while (std::gcd(cl, dl) > 1) dl += N;
      if (cl == 0 && dl == 0) dl = 1;
      int64_t x, y;
      if (ext_gcd(dl, cl, x, y) != 1) throw ValidationError("coset lift failed");
      // a*dl - b*cl = 1
      const int64_t a = x, b = -y;
      if (a * dl - b * cl != 1) throw ValidationError("coset lift failed");
      out.push_back({a, b, cl, dl});
    }
  }
  return out;
}

double gauss_legendre_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
  // Newton iteration on Legendre polynomials; nodes on [-1, 1]
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  return 0.0;
}

// f(tau) = sum a_n q^n with adaptive cutoff; coefficients indexed from n=1
cplx qexp_eval(const std::vector<double>& a, cplx tau, int64_t n_terms) {
  const cplx q = std::exp(cplx(0.0, 2.0 * kPi) * tau);
  const double aq = std::abs(q);
  if (aq >= 0.999) throw ValidationError("q-expansion evaluated too close to the boundary");
  cplx qn = 1.0;
  cplx acc = 0.0;
  const int64_t limit = std::min<int64_t>(n_terms, static_cast<int64_t>(a.size()));
  for (int64_t n = 1; n <= limit; ++n) {
    qn *= q;
    if (a[n - 1] != 0.0) acc += a[n - 1] * qn;
    // |a_m| <= m^2 comfortably covers d(m) sqrt(m); stop when the tail bound
    // drops below working precision
    if (n > 16 && static_cast<double>(n * n) * std::abs(qn) / (1.0 - aq) < 1e-16) break;
  }
  return acc;
}

}  // namespace

cplx petersson_qexp(int level, const std::vector<double>& af_from0,
                    const std::vector<double>& ag_from0, const PeterssonOptions& opt) {
  if (af_from0.empty() || ag_from0.empty()) throw ValidationError("petersson: empty q-expansion");
  if (af_from0[0] != 0.0 || ag_from0[0] != 0.0)
    throw ValidationError("petersson: non-cuspidal input (a_0 != 0)");
  const std::vector<double> af(af_from0.begin() + 1, af_from0.end());
  const std::vector<double> ag(ag_from0.begin() + 1, ag_from0.end());

  const auto reps = coset_reps(level);
  const int nx = 24 << (opt.depth - 1);
  const int ny = 12 << (opt.depth - 1);
  std::vector<double> gx, gw;
  gauss_legendre_nodes(nx, gx, gw);
  std::vector<double> hy, hw;
  gauss_legendre_nodes(ny, hy, hw);

  const std::vector<double> panel_edges = {0.0, 1.5, 3.0, 6.0, 12.0, opt.im_cutoff};

  const cplx integral = chunked_reduce<cplx>(
      nx, 0.0,
      [&](int64_t lo, int64_t hi) {
        cplx acc = 0.0;
        for (int64_t ix = lo; ix < hi; ++ix) {
          const double x = 0.5 * gx[ix];
          const double wx = 0.5 * gw[ix];
          const double y_floor = std::sqrt(std::max(0.0, 1.0 - x * x));
          for (std::size_t pe = 0; pe + 1 < panel_edges.size(); ++pe) {
            const double ya = std::max(y_floor, panel_edges[pe]);
            const double yb = std::max(y_floor, panel_edges[pe + 1]);
            if (yb <= ya) continue;
            for (int iy = 0; iy < ny; ++iy) {
              const double y = 0.5 * (ya + yb) + 0.5 * (yb - ya) * hy[iy];
              const double wy = 0.5 * (yb - ya) * hw[iy];
              const cplx tau(x, y);
              cplx h = 0.0;
              for (const auto& r : reps) {
                const cplx den = static_cast<double>(r.c) * tau + static_cast<double>(r.d);
                const cplx atau =
                    (static_cast<double>(r.a) * tau + static_cast<double>(r.b)) / den;
                const double im = atau.imag();
                const cplx fv = qexp_eval(af, atau, opt.n_terms);
                const cplx gv = qexp_eval(ag, atau, opt.n_terms);
                h += fv * std::conj(gv) * (im * im);
              }
              acc += wx * wy * h / (y * y);
            }
          }
        }
        return acc;
      },
      [](cplx a, cplx b) { return a + b; },
      32);

  return 4.0 * kPi * integral;
}

cplx petersson(const EigenformData& f, const EigenformData& g, const PeterssonOptions& opt) {
  if (f.level() != g.level()) throw ValidationError("petersson: mismatched levels");
  std::vector<double> af{0.0}, ag{0.0};
  for (int64_t n = 1; n <= f.n_max(); ++n) af.push_back(f.a(n));
  for (int64_t n = 1; n <= g.n_max(); ++n) ag.push_back(g.a(n));
  return petersson_qexp(f.level(), af, ag, opt);
}

}  // namespace unipar
