#pragma once

// Truncated completed tensor algebra over C on a finite alphabet, with the
// concatenation product, exp/log, shuffle products, group-likeness tests and
// Lyndon-word Hall bases of the free Lie algebra.

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "unipar/errors.hpp"

namespace unipar {

using cplx = std::complex<double>;

// Ordered set of letter names. The order is fixed at construction and defines
// the Lyndon order on words.
class Alphabet {
 public:
  explicit Alphabet(std::vector<std::string> letters);

  int size() const { return static_cast<int>(letters_.size()); }
  const std::string& name(int i) const { return letters_.at(i); }
  int index(const std::string& name) const;  // throws if unknown

  bool operator==(const Alphabet& other) const { return letters_ == other.letters_; }
  bool operator!=(const Alphabet& other) const { return !(*this == other); }

  // "e0","e1",...,"e{k-1}"
  static Alphabet standard(int k);

  static constexpr int kMaxLetters = 8;

 private:
  std::vector<std::string> letters_;
};

// A word is a sequence of letter indices; the empty word is the unit.
using Word = std::vector<int>;

std::string word_to_string(const Alphabet& a, const Word& w);  // letters joined by '.', empty -> "1"
Word word_from_string(const Alphabet& a, const std::string& s);

// Element of the tensor algebra truncated in degree: all words of length
// <= truncation_degree carry a (possibly zero) complex coefficient.
// Storage is dense per degree, indexed by the base-k rank of the word.
class Series {
 public:
  Series(Alphabet alphabet, int truncation_degree);

  static Series unit(Alphabet alphabet, int truncation_degree);
  static Series letter(const Alphabet& alphabet, int truncation_degree, int letter_index);

  const Alphabet& alphabet() const { return alphabet_; }
  int degree() const { return degree_; }

  cplx coeff(const Word& w) const;
  void set_coeff(const Word& w, cplx v);
  void add_coeff(const Word& w, cplx v);

  // Degree-n slice as a standalone series (all other degrees zero).
  Series slice(int n) const;

  Series& operator+=(const Series& other);
  Series& operator-=(const Series& other);
  Series& operator*=(cplx scalar);
  void add_scaled(const Series& other, cplx factor);  // this += factor * other
  void clear();                                       // zero all coefficients
  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator*(Series a, cplx s) { return a *= s; }
  friend Series operator*(cplx s, Series a) { return a *= s; }

  // Largest absolute coefficient.
  double max_abs() const;
  double max_abs_degree(int n) const;

  // Nonzero coefficients as (word, value), degree by degree, rank order.
  std::vector<std::pair<Word, cplx>> entries(double drop_below = 0.0) const;

  // Raw slice access for hot loops: coefficient of the word of given degree
  // and rank (rank = big-endian base-k value of the letter sequence).
  const std::vector<cplx>& degree_data(int n) const { return coeffs_[n]; }
  std::vector<cplx>& degree_data(int n) { return coeffs_[n]; }
  static std::size_t word_rank(const Word& w, int k);

  static constexpr int kMaxDegree = 6;

 private:
  Alphabet alphabet_;
  int degree_;
  std::vector<std::vector<cplx>> coeffs_;  // [deg][rank]
};

// Concatenation product truncated at the common degree.
Series mul(const Series& a, const Series& b);

// exp of a series with zero constant term / log of a series with constant
// term 1; mutually inverse up to the truncation degree.
Series exp(const Series& x);
Series log(const Series& g);

// Multiplicative inverse; requires nonzero constant term.
Series inverse(const Series& g);

// Formal sum of all shuffles of u and v (with multiplicity).
Series shuffle_product(const Alphabet& a, int truncation_degree, const Word& u, const Word& v);

// <u sh v, g> without materialising the shuffle series.
cplx shuffle_pair(const Series& g, const Word& u, const Word& v);

// True iff <u sh v, g> = <u,g><v,g> for every word pair with |u|+|v| <= degree.
bool is_grouplike(const Series& g, double tol);
// Largest violation of the shuffle relations (diagnostic form of the above).
double grouplike_defect(const Series& g);

// Dynkin left-bracketing projection, degree by degree: on the degree-n slice,
// w1...wn -> [[...[w1,w2],...],wn]. A series with zero constant term is a Lie
// element iff the projection of each degree-n slice equals n times the slice.
Series dynkin_projection(const Series& x);
bool is_primitive(const Series& x, double tol);
double primitivity_defect(const Series& x);

// Lyndon word with its standard bracketing, as an element of the chosen Hall
// family of the free Lie algebra.
struct HallElement {
  Word word;                 // the Lyndon word
  int degree = 0;            // = word length
  int split = 0;             // standard factorisation word = word[0:split) * word[split:)
  Series expansion;          // the bracket expanded in the tensor algebra
  std::string label;         // e.g. "[e0,[e0,e1]]"

  HallElement(Word w, int s, Series e, std::string l)
      : word(std::move(w)), degree(static_cast<int>(word.size())), split(s),
        expansion(std::move(e)), label(std::move(l)) {}
};

// All Lyndon words of length <= max_degree with standard bracketings and
// expansions, ordered by degree then lexicographically.
std::vector<HallElement> lyndon_basis(const Alphabet& a, int max_degree);

// Coordinates of a Lie element in the Lyndon basis. The expansion of a Lyndon
// bracketing is the Lyndon word itself plus lexicographically larger words,
// so the system is triangular. Throws ToleranceError if the residual after
// elimination exceeds tol (the input was not a Lie element).
std::map<std::string, cplx> hall_coordinates(const Series& lie,
                                             const std::vector<HallElement>& basis,
                                             double tol = 1e-8);

}  // namespace unipar
