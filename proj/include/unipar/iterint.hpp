#pragma once

// Numerical iterated integrals of rational one-forms along piecewise paths in
// the complex plane, Chen transport series of unipotent connections, and
// regularized transport at tangential base points.

#include <optional>
#include <vector>

#include "unipar/ncalg.hpp"

namespace unipar {

// Rational one-form  sum_k c_k dt/(t - a_k)  +  (p_0 + p_1 t + ...) dt,
// with distinct pole locations.
struct OneForm {
  struct Pole {
    cplx location;
    cplx residue;
  };
  std::vector<Pole> poles;
  std::vector<cplx> poly;  // polynomial part coefficients, constant first

  // f(t) where the form is f(t) dt; undefined at the poles.
  cplx eval(cplx t) const;
  cplx residue_at(cplx c, double match_tol = 1e-12) const;
  bool has_pole_at(cplx c, double match_tol = 1e-12) const;

  static OneForm dlog(cplx pole) { return OneForm{{{pole, 1.0}}, {}}; }  // dt/(t-pole)
  static OneForm zero() { return OneForm{}; }
};

// Tangential datum: a puncture together with a nonzero tangent vector.
struct Tangential {
  cplx puncture;
  cplx tangent;
};

// Piecewise path made of line segments and circular arcs, with optional
// tangential decorations at the endpoints. A decorated endpoint must sit at
// its puncture, and the adjacent segment must be a line leaving the puncture
// along the tangent ray (this pins the branch of log used in regularization
// to the principal branch of the local parameter).
class Path {
 public:
  struct Line {
    cplx from, to;
  };
  struct Arc {
    cplx center;
    double radius;
    double theta_from, theta_to;  // radians; orientation given by the sign of the sweep
  };
  struct Segment {
    enum class Kind { line, arc } kind;
    Line line{};
    Arc arc{};

    cplx at(double u) const;        // u in [0,1]
    cplx velocity(double u) const;  // d/du of at()
    cplx start() const { return at(0.0); }
    cplx end() const { return at(1.0); }
  };

  static Path from_segments(std::vector<Segment> segments,
                            std::optional<Tangential> start_decoration = std::nullopt,
                            std::optional<Tangential> end_decoration = std::nullopt);
  static Path straight(cplx from, cplx to);
  static Path polyline(const std::vector<cplx>& points);

  const std::vector<Segment>& segments() const { return segments_; }
  const std::optional<Tangential>& start_decoration() const { return start_decoration_; }
  const std::optional<Tangential>& end_decoration() const { return end_decoration_; }
  bool decorated() const { return start_decoration_.has_value() || end_decoration_.has_value(); }

  cplx start() const { return segments_.front().start(); }
  cplx end() const { return segments_.back().end(); }

  Path reversed() const;
  static Path concatenate(const Path& first, const Path& second);

  Path with_start_decoration(Tangential t) const;
  Path with_end_decoration(Tangential t) const;

 private:
  Path() = default;
  std::vector<Segment> segments_;
  std::optional<Tangential> start_decoration_;
  std::optional<Tangential> end_decoration_;
};

// Degree-graded connection data on the free algebra of the alphabet:
// a one-form per letter (degree-1 block) and optional one-forms attached to
// words of length >= 2 (higher blocks, zero by default).
class Connection {
 public:
  Connection(Alphabet alphabet, int truncation_degree);

  const Alphabet& alphabet() const { return alphabet_; }
  int degree() const { return degree_; }

  void set_letter_form(int letter, OneForm form);
  void set_word_form(const Word& w, OneForm form);
  const OneForm& letter_form(int letter) const { return letter_forms_.at(letter); }
  const std::vector<std::pair<Word, OneForm>>& word_forms() const { return word_forms_; }

  // All pole locations appearing in any block.
  std::vector<cplx> punctures(double merge_tol = 1e-9) const;
  bool is_puncture(cplx c, double tol = 1e-9) const;

  // Letter-weighted residue series sum_w w Res_c(alpha_w). The tangent only
  // fixes the local parameter; residues of dq/q coefficients do not depend
  // on it. Throws if c is not a pole of any block.
  Series residue_series(cplx c, cplx tangent) const;

  // The Knizhnik-Zamolodchikov connection e0 dt/t + e1 dt/(t-1) on
  // P^1 minus {0,1,infinity}.
  static Connection kz(int truncation_degree);

 private:
  Alphabet alphabet_;
  int degree_;
  std::vector<OneForm> letter_forms_;
  std::vector<std::pair<Word, OneForm>> word_forms_;
};

struct TransportOptions {
  double ode_tol = 1e-11;        // step-doubling target per segment (max-abs)
  int max_steps_per_segment = 1 << 17;
  double epsilon = 1e-10;        // regularization cut parameter
  double reg_residual_tol = 1e-7;  // allowed Richardson disagreement
  double pole_clearance = 1e-9;  // path interior must stay this far from poles
};

// Time-ordered iterated integral of the given forms along an undecorated
// path, with forms[0] at the largest time.
cplx iterated_integral(const std::vector<OneForm>& forms, const Path& path,
                       const TransportOptions& opt = {});

// Chen series sum_n int_gamma Omega^n truncated at the connection degree,
// computed as the solution at time 1 of S' = A(t) S, S(0) = 1.
Series transport(const Connection& conn, const Path& path, const TransportOptions& opt = {});

// Transport with tangential endpoints removed by regularization:
// lim_{eps->0} exp(-log(eps) Res_b(Omega)) . T(gamma_eps) for a path into a
// puncture, and the inverse of the reverse-path value for a path out of one.
// Evaluated at eps and eps/2 with Richardson extrapolation of the eps log eps
// and eps tails.
Series regularized_transport(const Connection& conn, const Path& path,
                             const TransportOptions& opt = {});

// Same value computed by the closed-form route: the singular factor t^R is
// split off analytically on the final straight segment via the Frobenius
// recursion for W(t) with Phi = W(t) t^R, and the finite part read off at the
// segment end. Requires the decorated endpoints' adjacent segments to be
// straight (which Path validation already enforces).
Series regularized_transport_closed_form(const Connection& conn, const Path& path,
                                         const TransportOptions& opt = {});

}  // namespace unipar
