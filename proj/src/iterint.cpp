#include "unipar/iterint.hpp"

#include <algorithm>
#include <cmath>

namespace unipar {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

cplx OneForm::eval(cplx t) const {
  cplx acc = 0.0;
  for (const auto& p : poles) acc += p.residue / (t - p.location);
  cplx tp = 1.0;
  for (const cplx& c : poly) {
    acc += c * tp;
    tp *= t;
  }
  return acc;
}

cplx OneForm::residue_at(cplx c, double match_tol) const {
  for (const auto& p : poles)
    if (std::abs(p.location - c) <= match_tol) return p.residue;
  return 0.0;
}

bool OneForm::has_pole_at(cplx c, double match_tol) const {
  for (const auto& p : poles)
    if (std::abs(p.location - c) <= match_tol && std::abs(p.residue) != 0.0) return true;
  return false;
}

cplx Path::Segment::at(double u) const {
  if (kind == Kind::line) return line.from + u * (line.to - line.from);
  const double th = arc.theta_from + u * (arc.theta_to - arc.theta_from);
  return arc.center + arc.radius * cplx(std::cos(th), std::sin(th));
}

cplx Path::Segment::velocity(double u) const {
  if (kind == Kind::line) return line.to - line.from;
  const double sweep = arc.theta_to - arc.theta_from;
  const double th = arc.theta_from + u * sweep;
  return arc.radius * sweep * cplx(-std::sin(th), std::cos(th));
}

Path Path::from_segments(std::vector<Segment> segments,
                         std::optional<Tangential> start_decoration,
                         std::optional<Tangential> end_decoration) {
  if (segments.empty()) throw ValidationError("path needs at least one segment");
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    if (std::abs(segments[i].end() - segments[i + 1].start()) > 1e-9)
      throw ValidationError("path segments are not contiguous");
  }
  auto check_decoration = [](const Tangential& t, const Segment& seg, bool at_start) {
    if (std::abs(t.tangent) == 0.0) throw ValidationError("tangential datum has zero tangent");
    if (seg.kind != Segment::Kind::line)
      throw ValidationError("segment adjacent to a tangential endpoint must be a line");
    const cplx tip = at_start ? seg.line.from : seg.line.to;
    const cplx far = at_start ? seg.line.to : seg.line.from;
    if (std::abs(tip - t.puncture) > 1e-12 * (1.0 + std::abs(t.puncture)))
      throw ValidationError("decorated endpoint does not sit at its puncture");
    const cplx ratio = (far - t.puncture) / t.tangent;
    if (!(ratio.real() > 0.0) || std::abs(ratio.imag()) > 1e-9 * std::abs(ratio))
      throw ValidationError("segment at a tangential endpoint must leave along the tangent ray");
  };
  if (start_decoration) check_decoration(*start_decoration, segments.front(), true);
  if (end_decoration) check_decoration(*end_decoration, segments.back(), false);
  Path p;
  p.segments_ = std::move(segments);
  p.start_decoration_ = start_decoration;
  p.end_decoration_ = end_decoration;
  return p;
}

Path Path::straight(cplx from, cplx to) {
  Segment s;
  s.kind = Segment::Kind::line;
  s.line = {from, to};
  return from_segments({s});
}

Path Path::polyline(const std::vector<cplx>& points) {
  if (points.size() < 2) throw ValidationError("polyline needs at least two points");
  std::vector<Segment> segs;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    Segment s;
    s.kind = Segment::Kind::line;
    s.line = {points[i], points[i + 1]};
    segs.push_back(s);
  }
  return from_segments(std::move(segs));
}

Path Path::reversed() const {
  std::vector<Segment> segs;
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
    Segment s = *it;
    if (s.kind == Segment::Kind::line) {
      std::swap(s.line.from, s.line.to);
    } else {
      std::swap(s.arc.theta_from, s.arc.theta_to);
    }
    segs.push_back(s);
  }
  return from_segments(std::move(segs), end_decoration_, start_decoration_);
}

Path Path::concatenate(const Path& first, const Path& second) {
  if (first.end_decoration_ || second.start_decoration_)
    throw ValidationError("cannot concatenate across a tangential endpoint");
  if (std::abs(first.end() - second.start()) > 1e-9)
    throw ValidationError("paths do not meet");
  std::vector<Segment> segs = first.segments_;
  segs.insert(segs.end(), second.segments_.begin(), second.segments_.end());
  return from_segments(std::move(segs), first.start_decoration_, second.end_decoration_);
}

Path Path::with_start_decoration(Tangential t) const {
  return from_segments(segments_, t, end_decoration_);
}

Path Path::with_end_decoration(Tangential t) const {
  return from_segments(segments_, start_decoration_, t);
}

Connection::Connection(Alphabet alphabet, int truncation_degree)
    : alphabet_(std::move(alphabet)), degree_(truncation_degree) {
  if (degree_ < 0 || degree_ > Series::kMaxDegree)
    throw ValidationError("truncation degree out of supported range [0,6]");
  letter_forms_.assign(alphabet_.size(), OneForm::zero());
}

void Connection::set_letter_form(int letter, OneForm form) {
  if (letter < 0 || letter >= alphabet_.size()) throw ValidationError("letter index out of range");
  for (std::size_t i = 0; i < form.poles.size(); ++i)
    for (std::size_t j = i + 1; j < form.poles.size(); ++j)
      if (std::abs(form.poles[i].location - form.poles[j].location) < 1e-12)
        throw ValidationError("one-form has duplicate pole locations");
  letter_forms_[letter] = std::move(form);
}

void Connection::set_word_form(const Word& w, OneForm form) {
  if (static_cast<int>(w.size()) < 2) throw ValidationError("word blocks require length >= 2");
  if (static_cast<int>(w.size()) > degree_) throw ValidationError("word exceeds truncation degree");
  for (int c : w)
    if (c < 0 || c >= alphabet_.size()) throw ValidationError("letter index out of range");
  word_forms_.emplace_back(w, std::move(form));
}

std::vector<cplx> Connection::punctures(double merge_tol) const {
  std::vector<cplx> out;
  auto add = [&](cplx c) {
    for (const cplx& x : out)
      if (std::abs(x - c) <= merge_tol) return;
    out.push_back(c);
  };
  for (const auto& f : letter_forms_)
    for (const auto& p : f.poles) add(p.location);
  for (const auto& [w, f] : word_forms_)
    for (const auto& p : f.poles) add(p.location);
  return out;
}

bool Connection::is_puncture(cplx c, double tol) const {
  for (const cplx& x : punctures(tol))
    if (std::abs(x - c) <= tol) return true;
  return false;
}

Series Connection::residue_series(cplx c, cplx tangent) const {
  if (std::abs(tangent) == 0.0) throw ValidationError("zero tangent vector");
  if (!is_puncture(c)) throw ValidationError("residue_series: not a puncture of the connection");
  Series out(alphabet_, degree_);
  for (int l = 0; l < alphabet_.size(); ++l) {
    const cplx r = letter_forms_[l].residue_at(c, 1e-9);
    if (std::abs(r) != 0.0 && degree_ >= 1) out.add_coeff(Word{l}, r);
  }
  for (const auto& [w, f] : word_forms_) {
    const cplx r = f.residue_at(c, 1e-9);
    if (std::abs(r) != 0.0) out.add_coeff(w, r);
  }
  return out;
}

Connection Connection::kz(int truncation_degree) {
  Connection c(Alphabet::standard(2), truncation_degree);
  c.set_letter_form(0, OneForm::dlog(0.0));
  c.set_letter_form(1, OneForm::dlog(1.0));
  return c;
}

namespace {

// out = A(z) dz . S where A is the letter/word-weighted connection matrix.
// Writing the product directly via rank shifts avoids building A as a series.
void apply_connection(const Connection& conn, cplx z, cplx dz, const Series& s, Series& out) {
  out.clear();
  const int N = conn.degree();
  const int k = conn.alphabet().size();
  for (int l = 0; l < k; ++l) {
    const cplx w = conn.letter_form(l).eval(z) * dz;
    if (w == cplx(0.0)) continue;
    for (int d = 0; d + 1 <= N; ++d) {
      const auto& in = s.degree_data(d);
      auto& dst = out.degree_data(d + 1);
      const std::size_t base = static_cast<std::size_t>(l) * in.size();
      for (std::size_t r = 0; r < in.size(); ++r) dst[base + r] += w * in[r];
    }
  }
  for (const auto& [word, form] : conn.word_forms()) {
    const cplx w = form.eval(z) * dz;
    if (w == cplx(0.0)) continue;
    const int lw = static_cast<int>(word.size());
    const std::size_t wr = Series::word_rank(word, k);
    for (int d = 0; d + lw <= N; ++d) {
      const auto& in = s.degree_data(d);
      auto& dst = out.degree_data(d + lw);
      const std::size_t base = wr * in.size();
      for (std::size_t r = 0; r < in.size(); ++r) dst[base + r] += w * in[r];
    }
  }
}

struct SeriesRk4 {
  Series k1, k2, k3, k4, tmp;
  explicit SeriesRk4(const Series& proto) : k1(proto), k2(proto), k3(proto), k4(proto), tmp(proto) {}
};

// One RK4 sweep of S' = A(gamma(u)) gamma'(u) S over [a,b] in n steps.
// The parametrisation is supplied as position/velocity callables.
template <typename Pos, typename Vel>
void rk4_sweep(const Connection& conn, const Pos& pos, const Vel& vel, double a, double b, int n,
               Series& s, SeriesRk4& ws) {
  const double h = (b - a) / n;
  for (int i = 0; i < n; ++i) {
    const double u = a + i * h;
    apply_connection(conn, pos(u), vel(u), s, ws.k1);
    ws.tmp = s;
    ws.tmp.add_scaled(ws.k1, 0.5 * h);
    apply_connection(conn, pos(u + 0.5 * h), vel(u + 0.5 * h), ws.tmp, ws.k2);
    ws.tmp = s;
    ws.tmp.add_scaled(ws.k2, 0.5 * h);
    apply_connection(conn, pos(u + 0.5 * h), vel(u + 0.5 * h), ws.tmp, ws.k3);
    ws.tmp = s;
    ws.tmp.add_scaled(ws.k3, h);
    apply_connection(conn, pos(u + h), vel(u + h), ws.tmp, ws.k4);
    s.add_scaled(ws.k1, h / 6.0);
    s.add_scaled(ws.k2, h / 3.0);
    s.add_scaled(ws.k3, h / 3.0);
    s.add_scaled(ws.k4, h / 6.0);
  }
}

double series_distance(const Series& a, const Series& b) {
  Series d = a;
  d -= b;
  return d.max_abs();
}

// Step-doubling driver: integrate with n and 2n steps until they agree.
template <typename Pos, typename Vel>
Series integrate_adaptive(const Connection& conn, const Pos& pos, const Vel& vel, double a,
                          double b, const Series& init, const TransportOptions& opt,
                          int n_start = 32) {
  SeriesRk4 ws(init);
  Series coarse = init;
  rk4_sweep(conn, pos, vel, a, b, n_start, coarse, ws);
  int n = n_start * 2;
  while (true) {
    Series fine = init;
    rk4_sweep(conn, pos, vel, a, b, n, fine, ws);
    const double err = series_distance(fine, coarse);
    const double scale = std::max(1.0, fine.max_abs());
    if (err <= opt.ode_tol * scale) return fine;
    if (n >= opt.max_steps_per_segment)
      throw ToleranceError("transport: step size failed to meet tolerance");
    coarse = std::move(fine);
    n *= 2;
  }
}

void check_clearance(const Connection& conn, const Path::Segment& seg, const TransportOptions& opt,
                     const std::vector<cplx>& skip = {}) {
  const auto poles = conn.punctures();
  for (int i = 0; i <= 64; ++i) {
    const cplx z = seg.at(i / 64.0);
    for (const cplx& p : poles) {
      bool skipped = false;
      for (const cplx& s : skip)
        if (std::abs(s - p) < 1e-9) skipped = true;
      if (skipped && std::abs(z - p) < 0.5) continue;
      if (std::abs(z - p) < opt.pole_clearance)
        throw ValidationError("path passes through a pole of the connection");
    }
  }
}

Series transport_segments(const Connection& conn, const std::vector<Path::Segment>& segs,
                          const TransportOptions& opt, Series init) {
  for (const auto& seg : segs) {
    check_clearance(conn, seg, opt);
    auto pos = [&seg](double u) { return seg.at(u); };
    auto vel = [&seg](double u) { return seg.velocity(u); };
    init = integrate_adaptive(conn, pos, vel, 0.0, 1.0, init, opt);
  }
  return init;
}

// Data for one tangential end of a path: the straight run into/out of the
// puncture in the local parameter t (z = c + t v), plus the residue series.
struct TailSpec {
  cplx puncture;
  cplx tangent;
  double t0 = 0.0;  // outer end of the tail in the local parameter
  Series residue;
  TailSpec(cplx c, cplx v, double t, Series r)
      : puncture(c), tangent(v), t0(t), residue(std::move(r)) {}
};

// t A(c + t v) v - Res_c, evaluated in the local parameter so that the
// residue term cancels exactly; reconstructing z - c from z = c + t v would
// lose ~eps/t relative digits near the puncture.
cplx tail_field_eval(const OneForm& f, cplx c, cplx v, double t) {
  cplx acc = 0.0;
  const cplx tv = t * v;
  for (const auto& p : f.poles) {
    if (std::abs(p.location - c) <= 1e-9) continue;  // the dq/q part
    acc += p.residue * tv / ((c - p.location) + tv);
  }
  if (!f.poly.empty()) {
    const cplx z = c + tv;
    cplx zp = 1.0;
    for (const cplx& pc : f.poly) {
      acc += pc * zp * tv;
      zp *= z;
    }
  }
  return acc;
}

Series tail_field(const Connection& conn, cplx c, cplx v, double t) {
  Series a(conn.alphabet(), conn.degree());
  for (int l = 0; l < conn.alphabet().size(); ++l) {
    const cplx w = tail_field_eval(conn.letter_form(l), c, v, t);
    if (w != cplx(0.0)) a.add_coeff(Word{l}, w);
  }
  for (const auto& [word, form] : conn.word_forms()) {
    const cplx w = tail_field_eval(form, c, v, t);
    if (w != cplx(0.0)) a.add_coeff(word, w);
  }
  return a;
}

// Tail ODE near a puncture in the conjugated variable. For the inbound tail,
// Y(u) = exp(-uR) S(e^u) with S the transport from the outer end, so that
// Y(log eps) is exactly exp(-log(eps) R) T(tail) and stays O(1) all the way
// down. Y' = M(u) Y with M(u) = exp(-uR) (t A(z) v - R) exp(uR), which decays
// like t = e^u. The outbound tail satisfies the transposed equation
// G' = -G M(u) with G(log eps) = T(out-tail) exp(log(eps) R).
class TailIntegrator {
 public:
  TailIntegrator(const Connection& conn, const TailSpec& tail, bool inbound)
      : conn_(conn), tail_(tail), inbound_(inbound) {
    Series p = Series::unit(conn.alphabet(), conn.degree());
    r_powers_.push_back(p);
    for (int m = 1; m <= conn.degree(); ++m) {
      p = mul(p, tail.residue);
      r_powers_.push_back(p);
    }
  }

  Series exp_ur(double u) const {
    Series e = r_powers_[0];
    double f = 1.0;
    for (int m = 1; m < static_cast<int>(r_powers_.size()); ++m) {
      f *= u / m;
      e.add_scaled(r_powers_[m], f);
    }
    return e;
  }

  Series deriv(double u, const Series& y) const {
    const double t = std::exp(u);
    const Series tg = tail_field(conn_, tail_.puncture, tail_.tangent, t);
    if (inbound_) {
      Series out = mul(exp_ur(-u), mul(tg, mul(exp_ur(u), y)));
      return out;
    }
    Series out = mul(mul(mul(y, exp_ur(-u)), tg), exp_ur(u));
    out *= cplx(-1.0);
    return out;
  }

  // RK4 sweep of the tail ODE from ua to ub with the step-doubling driver.
  Series integrate(double ua, double ub, Series y, const TransportOptions& opt) const {
    auto sweep = [&](int n, Series s) {
      const double h = (ub - ua) / n;
      for (int i = 0; i < n; ++i) {
        const double u = ua + i * h;
        Series k1 = deriv(u, s);
        Series tmp = s;
        tmp.add_scaled(k1, 0.5 * h);
        Series k2 = deriv(u + 0.5 * h, tmp);
        tmp = s;
        tmp.add_scaled(k2, 0.5 * h);
        Series k3 = deriv(u + 0.5 * h, tmp);
        tmp = s;
        tmp.add_scaled(k3, h);
        Series k4 = deriv(u + h, tmp);
        s.add_scaled(k1, h / 6.0);
        s.add_scaled(k2, h / 3.0);
        s.add_scaled(k3, h / 3.0);
        s.add_scaled(k4, h / 6.0);
      }
      return s;
    };
    int n = std::max(64, static_cast<int>(12.0 * std::abs(ub - ua)));
    Series coarse = sweep(n, y);
    while (true) {
      n *= 2;
      Series fine = sweep(n, y);
      if (series_distance(fine, coarse) <= opt.ode_tol * std::max(1.0, fine.max_abs()))
        return fine;
      if (n >= opt.max_steps_per_segment)
        throw ToleranceError("regularized_transport: tail step size failed to meet tolerance");
      coarse = std::move(fine);
    }
  }

 private:
  const Connection& conn_;
  const TailSpec& tail_;
  bool inbound_;
  std::vector<Series> r_powers_;
};

struct SplitPath {
  std::optional<TailSpec> start_tail;
  std::optional<TailSpec> end_tail;
  std::vector<Path::Segment> middle;
};

Path::Segment make_line(cplx from, cplx to) {
  Path::Segment s;
  s.kind = Path::Segment::Kind::line;
  s.line = {from, to};
  return s;
}

// Carve tangential runs off the decorated ends. Path validation has already
// ensured the adjacent segments are lines along the tangent rays.
SplitPath split_for_regularization(const Connection& conn, const Path& path) {
  SplitPath out;
  std::vector<Path::Segment> segs = path.segments();
  const bool ds = path.start_decoration().has_value();
  const bool de = path.end_decoration().has_value();
  if (!ds && !de) {
    out.middle = std::move(segs);
    return out;
  }
  if (ds && de && segs.size() == 1) {
    // single segment between two punctures: split at the midpoint
    const cplx mid = segs[0].at(0.5);
    Path::Segment a = make_line(segs[0].start(), mid);
    Path::Segment b = make_line(mid, segs[0].end());
    segs = {a, b};
  }
  if (ds) {
    const Tangential t = *path.start_decoration();
    const Path::Segment lead = segs.front();
    segs.erase(segs.begin());
    const double t0 = ((lead.line.to - t.puncture) / t.tangent).real();
    out.start_tail.emplace(t.puncture, t.tangent, t0,
                           conn.residue_series(t.puncture, t.tangent));
  }
  if (de) {
    const Tangential t = *path.end_decoration();
    const Path::Segment last = segs.back();
    segs.pop_back();
    const double t0 = ((last.line.from - t.puncture) / t.tangent).real();
    out.end_tail.emplace(t.puncture, t.tangent, t0,
                         conn.residue_series(t.puncture, t.tangent));
  }
  out.middle = std::move(segs);
  return out;
}

void check_tail_clearance(const Connection& conn, const TailSpec& tail,
                          const TransportOptions& opt) {
  const auto seg = make_line(tail.puncture + tail.t0 * tail.tangent, tail.puncture);
  check_clearance(conn, seg, opt, {tail.puncture});
}

}  // namespace

Series transport(const Connection& conn, const Path& path, const TransportOptions& opt) {
  if (path.decorated())
    throw ValidationError("transport: decorated path requires regularized_transport");
  return transport_segments(conn, path.segments(), opt,
                            Series::unit(conn.alphabet(), conn.degree()));
}

cplx iterated_integral(const std::vector<OneForm>& forms, const Path& path,
                       const TransportOptions& opt) {
  if (path.decorated())
    throw ValidationError("iterated_integral: decorated paths need regularization");
  if (forms.empty()) return 1.0;
  const int n = static_cast<int>(forms.size());

  // chain state G_j = iterated integral of forms[j-1..n-1] up to current time
  std::vector<cplx> g(n + 1, 0.0);
  g[n] = 1.0;
  for (const auto& seg : path.segments()) {
    for (int i = 0; i <= 64; ++i) {
      const cplx z = seg.at(i / 64.0);
      for (const auto& f : forms)
        for (const auto& p : f.poles)
          if (std::abs(z - p.location) < opt.pole_clearance)
            throw ValidationError("iterated_integral: pole on path");
    }
    auto deriv = [&](double u, const std::vector<cplx>& s) {
      std::vector<cplx> d(n + 1, 0.0);
      const cplx z = seg.at(u);
      const cplx v = seg.velocity(u);
      for (int j = 0; j < n; ++j) d[j] = forms[j].eval(z) * v * s[j + 1];
      return d;
    };
    auto sweep = [&](int steps, std::vector<cplx> s) {
      const double h = 1.0 / steps;
      for (int i = 0; i < steps; ++i) {
        const double u = i * h;
        auto k1 = deriv(u, s);
        auto add = [n](std::vector<cplx> base, const std::vector<cplx>& k, double f) {
          for (int j = 0; j <= n; ++j) base[j] += f * k[j];
          return base;
        };
        auto k2 = deriv(u + h / 2, add(s, k1, h / 2));
        auto k3 = deriv(u + h / 2, add(s, k2, h / 2));
        auto k4 = deriv(u + h, add(s, k3, h));
        for (int j = 0; j <= n; ++j)
          s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      }
      return s;
    };
    int steps = 64;
    auto coarse = sweep(steps, g);
    while (true) {
      steps *= 2;
      auto fine = sweep(steps, g);
      double err = 0.0;
      for (int j = 0; j <= n; ++j) err = std::max(err, std::abs(fine[j] - coarse[j]));
      if (err <= opt.ode_tol * std::max(1.0, std::abs(fine[0]))) {
        g = fine;
        break;
      }
      if (steps >= opt.max_steps_per_segment)
        throw ToleranceError("iterated_integral: step size failed to meet tolerance");
      coarse = std::move(fine);
    }
  }
  return g[0];
}

Series regularized_transport(const Connection& conn, const Path& path,
                             const TransportOptions& opt) {
  if (!path.decorated()) return transport(conn, path, opt);
  const SplitPath sp = split_for_regularization(conn, path);
  const Series unit = Series::unit(conn.alphabet(), conn.degree());
  const Series middle =
      sp.middle.empty() ? unit : transport_segments(conn, sp.middle, opt, unit);
  const double eps = opt.epsilon;

  // Each decorated end contributes its conjugated tail factor at eps and at
  // eps/2; the Richardson combination 2 V(eps/2) - V(eps) removes the leading
  // eps log eps tail of the limit.
  Series v1 = middle;
  Series v2 = middle;
  if (sp.end_tail) {
    const TailSpec& t = *sp.end_tail;
    check_tail_clearance(conn, t, opt);
    TailIntegrator ti(conn, t, /*inbound=*/true);
    Series y = ti.exp_ur(-std::log(t.t0));
    y = ti.integrate(std::log(t.t0), std::log(eps), y, opt);
    v1 = mul(y, v1);
    y = ti.integrate(std::log(eps), std::log(eps / 2.0), y, opt);
    v2 = mul(y, v2);
  }
  if (sp.start_tail) {
    const TailSpec& t = *sp.start_tail;
    check_tail_clearance(conn, t, opt);
    TailIntegrator ti(conn, t, /*inbound=*/false);
    Series g = ti.exp_ur(std::log(t.t0));
    g = ti.integrate(std::log(t.t0), std::log(eps), g, opt);
    v1 = mul(v1, g);
    g = ti.integrate(std::log(eps), std::log(eps / 2.0), g, opt);
    v2 = mul(v2, g);
  }

  Series result = v2;
  result *= 2.0;
  result -= v1;
  const double residual = series_distance(v1, v2);
  if (residual > opt.reg_residual_tol * std::max(1.0, result.max_abs()))
    throw ToleranceError("regularized_transport: extrapolation residual " +
                         std::to_string(residual) + " above tolerance");
  return result;
}

namespace {

// Taylor coefficients in t of f(c + t v) v with the pole at c removed;
// coefficient of t^-1 (the residue) is handled by the caller.
std::vector<cplx> regular_taylor(const OneForm& f, cplx c, cplx v, int terms) {
  std::vector<cplx> out(terms, 0.0);
  for (const auto& p : f.poles) {
    if (std::abs(p.location - c) <= 1e-9) continue;  // the dq/q part
    const cplx d = c - p.location;
    cplx coef = p.residue * v / d;
    for (int k = 0; k < terms; ++k) {
      out[k] += coef;
      coef *= -v / d;
    }
  }
  for (int m = 0; m < static_cast<int>(f.poly.size()); ++m) {
    for (int j = 0; j <= m && j < terms; ++j)
      out[j] += f.poly[m] * binomial(m, j) * std::pow(c, m - j) * std::pow(v, j) * v;
  }
  return out;
}

// Smallest distance from c to another pole of the connection, in units of v.
double convergence_radius(const Connection& conn, cplx c, cplx v) {
  double r = 1e30;
  for (const cplx& p : conn.punctures())
    if (std::abs(p - c) > 1e-9) r = std::min(r, std::abs(p - c) / std::abs(v));
  return r;
}

// (k - ad_R)^{-1} X = sum_m ad_R^m(X) / k^{m+1}; ad_R is nilpotent because R
// has no constant term.
Series solve_resonance_free(const Series& residue, int k, const Series& x) {
  Series acc = x;
  Series term = x;
  for (int m = 1; m <= x.degree(); ++m) {
    term = mul(residue, term) - mul(term, residue);
    Series t = term;
    t *= cplx(std::pow(static_cast<double>(k), -m));
    acc += t;
  }
  acc *= cplx(1.0 / k);
  return acc;
}

// W(t0) for the fundamental solution Phi(t) = W(t) t^R of the tail ODE,
// via the recursion (k - ad_R) W_k = sum_j B_j W_{k-1-j}.
Series frobenius_w(const Connection& conn, const TailSpec& tail, double t0) {
  const int N = conn.degree();
  const int kk = conn.alphabet().size();
  const double radius = convergence_radius(conn, tail.puncture, tail.tangent);
  if (t0 > 0.6 * radius)
    throw ValidationError("frobenius_w: evaluation point outside safe convergence radius");

  const int max_terms = 400;
  // B_k as series: sum over letters/words of their Taylor coefficients.
  std::vector<std::vector<cplx>> letter_taylor;
  for (int l = 0; l < kk; ++l)
    letter_taylor.push_back(regular_taylor(conn.letter_form(l), tail.puncture, tail.tangent,
                                           max_terms));
  std::vector<std::vector<cplx>> word_taylor;
  for (const auto& [w, f] : conn.word_forms())
    word_taylor.push_back(regular_taylor(f, tail.puncture, tail.tangent, max_terms));

  auto b_series = [&](int k) {
    Series b(conn.alphabet(), N);
    for (int l = 0; l < kk; ++l)
      if (letter_taylor[l][k] != cplx(0.0)) b.add_coeff(Word{l}, letter_taylor[l][k]);
    int wi = 0;
    for (const auto& [w, f] : conn.word_forms()) {
      (void)f;
      if (word_taylor[wi][k] != cplx(0.0)) b.add_coeff(w, word_taylor[wi][k]);
      ++wi;
    }
    return b;
  };

  std::vector<Series> w_terms;
  w_terms.push_back(Series::unit(conn.alphabet(), N));
  Series acc = w_terms[0];
  double tp = 1.0;
  for (int k = 1; k < max_terms; ++k) {
    Series rhs(conn.alphabet(), N);
    for (int j = 0; j < k; ++j) {
      const Series bj = b_series(j);
      if (bj.max_abs() == 0.0) continue;
      rhs += mul(bj, w_terms[k - 1 - j]);
    }
    Series wk = solve_resonance_free(tail.residue, k, rhs);
    w_terms.push_back(wk);
    tp *= t0;
    Series contrib = wk;
    contrib *= cplx(tp);
    acc += contrib;
    if (k > 4 && contrib.max_abs() < 1e-16 * std::max(1.0, acc.max_abs())) break;
  }
  return acc;
}

}  // namespace

Series regularized_transport_closed_form(const Connection& conn, const Path& path,
                                         const TransportOptions& opt) {
  if (!path.decorated()) return transport(conn, path, opt);
  SplitPath sp = split_for_regularization(conn, path);

  // Keep the tail evaluation point inside the convergence disc of the Taylor
  // expansion at the puncture; hand the rest of the run to the middle part.
  auto shrink = [&](TailSpec& tail, bool at_start) {
    const double radius = convergence_radius(conn, tail.puncture, tail.tangent);
    const double keep = std::min(tail.t0, 0.45 * radius);
    if (keep < tail.t0) {
      const cplx zkeep = tail.puncture + keep * tail.tangent;
      const cplx zfull = tail.puncture + tail.t0 * tail.tangent;
      if (at_start)
        sp.middle.insert(sp.middle.begin(), make_line(zkeep, zfull));
      else
        sp.middle.push_back(make_line(zfull, zkeep));
      tail.t0 = keep;
    }
  };
  if (sp.start_tail) shrink(*sp.start_tail, true);
  if (sp.end_tail) shrink(*sp.end_tail, false);

  const Series unit = Series::unit(conn.alphabet(), conn.degree());
  Series v = sp.middle.empty() ? unit : transport_segments(conn, sp.middle, opt, unit);
  if (sp.start_tail) {
    const TailSpec& t = *sp.start_tail;
    check_tail_clearance(conn, t, opt);
    Series r = t.residue;
    r *= cplx(std::log(t.t0));
    v = mul(v, mul(frobenius_w(conn, t, t.t0), exp(r)));
  }
  if (sp.end_tail) {
    const TailSpec& t = *sp.end_tail;
    check_tail_clearance(conn, t, opt);
    Series r = t.residue;
    r *= cplx(-std::log(t.t0));
    v = mul(mul(exp(r), inverse(frobenius_w(conn, t, t.t0))), v);
  }
  return v;
}

}  // namespace unipar
