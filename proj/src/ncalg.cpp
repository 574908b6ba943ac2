#include "unipar/ncalg.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace unipar {

Alphabet::Alphabet(std::vector<std::string> letters) : letters_(std::move(letters)) {
  if (letters_.empty()) throw ValidationError("alphabet must be nonempty");
  if (static_cast<int>(letters_.size()) > kMaxLetters)
    throw ValidationError("alphabet exceeds supported size (8 letters)");
  std::set<std::string> seen;
  for (const auto& l : letters_) {
    if (l.empty()) throw ValidationError("empty letter name");
    if (!seen.insert(l).second) throw ValidationError("duplicate letter name: " + l);
  }
}

int Alphabet::index(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (letters_[i] == name) return i;
  throw ValidationError("unknown letter: " + name);
}

Alphabet Alphabet::standard(int k) {
  std::vector<std::string> names;
  for (int i = 0; i < k; ++i) names.push_back("e" + std::to_string(i));
  return Alphabet(std::move(names));
}

std::string word_to_string(const Alphabet& a, const Word& w) {
  if (w.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += '.';
    s += a.name(w[i]);
  }
  return s;
}

Word word_from_string(const Alphabet& a, const std::string& s) {
  if (s == "1") return {};
  Word w;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, '.')) w.push_back(a.index(tok));
  return w;
}

Series::Series(Alphabet alphabet, int truncation_degree)
    : alphabet_(std::move(alphabet)), degree_(truncation_degree) {
  if (degree_ < 0 || degree_ > kMaxDegree)
    throw ValidationError("truncation degree out of supported range [0,6]");
  std::size_t sz = 1;
  coeffs_.resize(degree_ + 1);
  for (int n = 0; n <= degree_; ++n) {
    coeffs_[n].assign(sz, cplx(0.0));
    sz *= static_cast<std::size_t>(alphabet_.size());
  }
}

Series Series::unit(Alphabet alphabet, int truncation_degree) {
  Series s(std::move(alphabet), truncation_degree);
  s.coeffs_[0][0] = 1.0;
  return s;
}

Series Series::letter(const Alphabet& alphabet, int truncation_degree, int letter_index) {
  Series s(alphabet, truncation_degree);
  s.set_coeff(Word{letter_index}, 1.0);
  return s;
}

std::size_t Series::word_rank(const Word& w, int k) {
  std::size_t r = 0;
  for (int c : w) r = r * static_cast<std::size_t>(k) + static_cast<std::size_t>(c);
  return r;
}

cplx Series::coeff(const Word& w) const {
  const int n = static_cast<int>(w.size());
  if (n > degree_) return 0.0;
  for (int c : w)
    if (c < 0 || c >= alphabet_.size()) throw ValidationError("letter index out of range");
  return coeffs_[n][word_rank(w, alphabet_.size())];
}

void Series::set_coeff(const Word& w, cplx v) {
  const int n = static_cast<int>(w.size());
  if (n > degree_) throw ValidationError("word exceeds truncation degree");
  for (int c : w)
    if (c < 0 || c >= alphabet_.size()) throw ValidationError("letter index out of range");
  coeffs_[n][word_rank(w, alphabet_.size())] = v;
}

void Series::add_coeff(const Word& w, cplx v) {
  const int n = static_cast<int>(w.size());
  if (n > degree_) throw ValidationError("word exceeds truncation degree");
  coeffs_[n][word_rank(w, alphabet_.size())] += v;
}

Series Series::slice(int n) const {
  Series out(alphabet_, degree_);
  if (n >= 0 && n <= degree_) out.coeffs_[n] = coeffs_[n];
  return out;
}

Series& Series::operator+=(const Series& other) {
  if (alphabet_ != other.alphabet_ || degree_ != other.degree_)
    throw ValidationError("series alphabet/truncation mismatch");
  for (int n = 0; n <= degree_; ++n)
    for (std::size_t i = 0; i < coeffs_[n].size(); ++i) coeffs_[n][i] += other.coeffs_[n][i];
  return *this;
}

Series& Series::operator-=(const Series& other) {
  if (alphabet_ != other.alphabet_ || degree_ != other.degree_)
    throw ValidationError("series alphabet/truncation mismatch");
  for (int n = 0; n <= degree_; ++n)
    for (std::size_t i = 0; i < coeffs_[n].size(); ++i) coeffs_[n][i] -= other.coeffs_[n][i];
  return *this;
}

Series& Series::operator*=(cplx scalar) {
  for (auto& deg : coeffs_)
    for (auto& c : deg) c *= scalar;
  return *this;
}

void Series::add_scaled(const Series& other, cplx factor) {
  if (alphabet_ != other.alphabet_ || degree_ != other.degree_)
    throw ValidationError("series alphabet/truncation mismatch");
  for (int n = 0; n <= degree_; ++n)
    for (std::size_t i = 0; i < coeffs_[n].size(); ++i)
      coeffs_[n][i] += factor * other.coeffs_[n][i];
}

void Series::clear() {
  for (auto& deg : coeffs_)
    for (auto& c : deg) c = cplx(0.0);
}

double Series::max_abs() const {
  double m = 0.0;
  for (const auto& deg : coeffs_)
    for (const auto& c : deg) m = std::max(m, std::abs(c));
  return m;
}

double Series::max_abs_degree(int n) const {
  double m = 0.0;
  if (n < 0 || n > degree_) return 0.0;
  for (const auto& c : coeffs_[n]) m = std::max(m, std::abs(c));
  return m;
}

std::vector<std::pair<Word, cplx>> Series::entries(double drop_below) const {
  std::vector<std::pair<Word, cplx>> out;
  const int k = alphabet_.size();
  for (int n = 0; n <= degree_; ++n) {
    for (std::size_t r = 0; r < coeffs_[n].size(); ++r) {
      const cplx v = coeffs_[n][r];
      if (std::abs(v) == 0.0 || std::abs(v) < drop_below) continue;
      Word w(n);
      std::size_t rr = r;
      for (int i = n - 1; i >= 0; --i) {
        w[i] = static_cast<int>(rr % k);
        rr /= k;
      }
      out.emplace_back(std::move(w), v);
    }
  }
  return out;
}

Series mul(const Series& a, const Series& b) {
  if (a.alphabet() != b.alphabet() || a.degree() != b.degree())
    throw ValidationError("series alphabet/truncation mismatch");
  const int N = a.degree();
  const int k = a.alphabet().size();
  Series out(a.alphabet(), N);
  for (int da = 0; da <= N; ++da) {
    const auto& A = a.degree_data(da);
    bool a_zero = true;
    for (const auto& c : A)
      if (c != cplx(0.0)) { a_zero = false; break; }
    if (a_zero) continue;
    for (int db = 0; da + db <= N; ++db) {
      const auto& B = b.degree_data(db);
      auto& C = out.degree_data(da + db);
      std::size_t kb = 1;
      for (int i = 0; i < db; ++i) kb *= static_cast<std::size_t>(k);
      for (std::size_t ra = 0; ra < A.size(); ++ra) {
        const cplx va = A[ra];
        if (va == cplx(0.0)) continue;
        const std::size_t base = ra * kb;
        for (std::size_t rb = 0; rb < B.size(); ++rb) C[base + rb] += va * B[rb];
      }
    }
  }
  return out;
}

Series exp(const Series& x) {
  if (std::abs(x.coeff({})) != 0.0)
    throw ValidationError("exp requires zero constant term");
  const int N = x.degree();
  Series out = Series::unit(x.alphabet(), N);
  Series term = Series::unit(x.alphabet(), N);
  for (int kk = 1; kk <= N; ++kk) {
    term = mul(term, x);
    term *= cplx(1.0 / kk);
    out += term;
  }
  return out;
}

Series log(const Series& g) {
  if (std::abs(g.coeff({}) - cplx(1.0)) > 1e-12)
    throw ValidationError("log requires constant term 1");
  const int N = g.degree();
  Series u = g;
  u.add_coeff({}, -1.0);
  Series out(g.alphabet(), N);
  Series term = Series::unit(g.alphabet(), N);
  for (int kk = 1; kk <= N; ++kk) {
    term = mul(term, u);
    Series t = term;
    t *= cplx((kk % 2 == 1 ? 1.0 : -1.0) / kk);
    out += t;
  }
  return out;
}

Series inverse(const Series& g) {
  const cplx c0 = g.coeff({});
  if (std::abs(c0) == 0.0) throw ValidationError("inverse requires nonzero constant term");
  const int N = g.degree();
  Series u = g;
  u *= cplx(1.0) / c0;
  u.add_coeff({}, -1.0);  // u = g/c0 - 1, nilpotent
  Series out = Series::unit(g.alphabet(), N);
  Series term = Series::unit(g.alphabet(), N);
  for (int kk = 1; kk <= N; ++kk) {
    term = mul(term, u);
    Series t = term;
    t *= cplx(kk % 2 == 1 ? -1.0 : 1.0);
    out += t;
  }
  out *= cplx(1.0) / c0;
  return out;
}

namespace {

void shuffle_rec(const Word& u, std::size_t iu, const Word& v, std::size_t iv,
                 Word& scratch, Series& out, cplx weight) {
  if (iu == u.size() && iv == v.size()) {
    out.add_coeff(scratch, weight);
    return;
  }
  if (iu < u.size()) {
    scratch.push_back(u[iu]);
    shuffle_rec(u, iu + 1, v, iv, scratch, out, weight);
    scratch.pop_back();
  }
  if (iv < v.size()) {
    scratch.push_back(v[iv]);
    shuffle_rec(u, iu, v, iv + 1, scratch, out, weight);
    scratch.pop_back();
  }
}

cplx shuffle_pair_rec(const Series& g, const Word& u, std::size_t iu, const Word& v,
                      std::size_t iv, Word& scratch) {
  if (iu == u.size() && iv == v.size()) return g.coeff(scratch);
  cplx acc = 0.0;
  if (iu < u.size()) {
    scratch.push_back(u[iu]);
    acc += shuffle_pair_rec(g, u, iu + 1, v, iv, scratch);
    scratch.pop_back();
  }
  if (iv < v.size()) {
    scratch.push_back(v[iv]);
    acc += shuffle_pair_rec(g, u, iu, v, iv + 1, scratch);
    scratch.pop_back();
  }
  return acc;
}

}  // namespace

Series shuffle_product(const Alphabet& a, int truncation_degree, const Word& u, const Word& v) {
  if (static_cast<int>(u.size() + v.size()) > truncation_degree)
    throw ValidationError("shuffle of words longer than truncation degree");
  Series out(a, truncation_degree);
  Word scratch;
  scratch.reserve(u.size() + v.size());
  shuffle_rec(u, 0, v, 0, scratch, out, 1.0);
  return out;
}

cplx shuffle_pair(const Series& g, const Word& u, const Word& v) {
  Word scratch;
  scratch.reserve(u.size() + v.size());
  return shuffle_pair_rec(g, u, 0, v, 0, scratch);
}

namespace {

// Enumerate all words of each length up to n as ranks; reconstruct letters on
// the fly from the rank.
Word rank_to_word(std::size_t r, int len, int k) {
  Word w(len);
  for (int i = len - 1; i >= 0; --i) {
    w[i] = static_cast<int>(r % k);
    r /= static_cast<std::size_t>(k);
  }
  return w;
}

}  // namespace

double grouplike_defect(const Series& g) {
  const int N = g.degree();
  const int k = g.alphabet().size();
  double worst = 0.0;
  for (int lu = 1; lu <= N - 1; ++lu) {
    std::size_t nu = 1;
    for (int i = 0; i < lu; ++i) nu *= static_cast<std::size_t>(k);
    for (int lv = 1; lu + lv <= N; ++lv) {
      std::size_t nv = 1;
      for (int i = 0; i < lv; ++i) nv *= static_cast<std::size_t>(k);
      for (std::size_t ru = 0; ru < nu; ++ru) {
        const Word u = rank_to_word(ru, lu, k);
        for (std::size_t rv = 0; rv < nv; ++rv) {
          const Word v = rank_to_word(rv, lv, k);
          const cplx lhs = shuffle_pair(g, u, v);
          const cplx rhs = g.coeff(u) * g.coeff(v);
          worst = std::max(worst, std::abs(lhs - rhs));
        }
      }
    }
  }
  return worst;
}

bool is_grouplike(const Series& g, double tol) {
  if (std::abs(g.coeff({}) - cplx(1.0)) > tol) return false;
  return grouplike_defect(g) <= tol;
}

Series dynkin_projection(const Series& x) {
  const int N = x.degree();
  const int k = x.alphabet().size();
  Series out(x.alphabet(), N);
  for (int n = 1; n <= N; ++n) {
    const auto& in = x.degree_data(n);
    for (std::size_t r = 0; r < in.size(); ++r) {
      const cplx v = in[r];
      if (v == cplx(0.0)) continue;
      const Word w = rank_to_word(r, n, k);
      // [[...[w1,w2],...],wn] expanded by iterated bracketing
      Series bracket = Series::letter(x.alphabet(), N, w[0]);
      for (int i = 1; i < n; ++i) {
        const Series li = Series::letter(x.alphabet(), N, w[i]);
        bracket = mul(bracket, li) - mul(li, bracket);
      }
      bracket *= v;
      out += bracket;
    }
  }
  return out;
}

double primitivity_defect(const Series& x) {
  if (std::abs(x.coeff({})) != 0.0) return std::abs(x.coeff({}));
  const Series pi = dynkin_projection(x);
  double worst = 0.0;
  for (int n = 1; n <= x.degree(); ++n) {
    Series diff = pi.slice(n) - cplx(static_cast<double>(n)) * x.slice(n);
    worst = std::max(worst, diff.max_abs());
  }
  return worst;
}

bool is_primitive(const Series& x, double tol) { return primitivity_defect(x) <= tol; }

namespace {

bool is_lyndon(const Word& w) {
  // strictly smaller than each of its proper rotations
  const std::size_t n = w.size();
  if (n == 0) return false;
  for (std::size_t s = 1; s < n; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const int a = w[i];
      const int b = w[(i + s) % n];
      if (a < b) break;
      if (a > b) return false;
      if (i + 1 == n) return false;  // equal to a rotation: not Lyndon
    }
  }
  return true;
}

// Standard factorisation split point: the longest proper Lyndon suffix.
int standard_split(const Word& w) {
  const int n = static_cast<int>(w.size());
  for (int s = 1; s < n; ++s) {
    Word suf(w.begin() + s, w.end());
    if (is_lyndon(suf)) return s;
  }
  throw ValidationError("standard_split: not a Lyndon word of length >= 2");
}

}  // namespace

std::vector<HallElement> lyndon_basis(const Alphabet& a, int max_degree) {
  if (max_degree < 1 || max_degree > Series::kMaxDegree)
    throw ValidationError("max_degree out of supported range [1,6]");
  const int k = a.size();

  // Duval's algorithm.
  std::vector<Word> lyndon;
  Word w{0};
  while (!w.empty()) {
    if (static_cast<int>(w.size()) <= max_degree) lyndon.push_back(w);
    const int n = static_cast<int>(w.size());
    Word t = w;
    while (static_cast<int>(t.size()) < max_degree) t.push_back(t[static_cast<int>(t.size()) % n]);
    while (!t.empty() && t.back() == k - 1) t.pop_back();
    if (!t.empty()) t.back() += 1;
    w = t;
  }
  std::sort(lyndon.begin(), lyndon.end(), [](const Word& x, const Word& y) {
    if (x.size() != y.size()) return x.size() < y.size();
    return x < y;
  });

  std::map<Word, std::pair<Series, std::string>> expanded;
  std::vector<HallElement> out;
  for (const Word& lw : lyndon) {
    if (lw.size() == 1) {
      Series e = Series::letter(a, max_degree, lw[0]);
      expanded.emplace(lw, std::make_pair(e, a.name(lw[0])));
      out.emplace_back(lw, 0, e, a.name(lw[0]));
      continue;
    }
    const int s = standard_split(lw);
    const Word left(lw.begin(), lw.begin() + s);
    const Word right(lw.begin() + s, lw.end());
    const auto& [le, ll] = expanded.at(left);
    const auto& [re, rl] = expanded.at(right);
    Series e = mul(le, re) - mul(re, le);
    std::string label = "[" + ll + "," + rl + "]";
    expanded.emplace(lw, std::make_pair(e, label));
    out.emplace_back(lw, s, e, label);
  }
  return out;
}

std::map<std::string, cplx> hall_coordinates(const Series& lie,
                                             const std::vector<HallElement>& basis,
                                             double tol) {
  if (std::abs(lie.coeff({})) > tol)
    throw ToleranceError("hall_coordinates: nonzero constant term");
  Series residual = lie;
  std::map<std::string, cplx> coords;
  // The expansion of a Lyndon bracketing is its word plus lex-larger words of
  // the same degree, so eliminating in (degree, lex) order is triangular.
  for (const auto& h : basis) {
    if (h.degree > lie.degree()) continue;
    const cplx d = residual.coeff(h.word);
    coords[h.label] = d;
    Series t = h.expansion;
    t *= -d;
    residual += t;
  }
  const double defect = residual.max_abs();
  if (defect > tol)
    throw ToleranceError("hall_coordinates: input is not a Lie element (residual " +
                         std::to_string(defect) + ")");
  return coords;
}

}  // namespace unipar
