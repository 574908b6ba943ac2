// Command-line driver: Hall bases, iterated integrals, parallel transport,
// generalized Bloch-Wigner tables, Rankin-Selberg checks, local zeta
// integrals and the regulator desk run.
//
// Exit codes: 0 success, 2 usage error, 3 input/output error, 4 tolerance
// failure. UNIPAR_THREADS controls worker threads (default 1); all outputs
// are deterministic for a fixed input regardless of thread count.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "unipar/io.hpp"
#include "unipar/regulator.hpp"

namespace {

using namespace unipar;

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw ValidationError("cannot open output file: " + path);
  return file;
}

cplx parse_complex(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) return cplx(std::stod(s), 0.0);
  return cplx(std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1)));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct BwBaseSpec {
  bool tangential = false;
  cplx point;  // puncture for tangential, base point otherwise
};

BwBaseSpec parse_base(const std::string& s) {
  BwBaseSpec b;
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ValidationError("base must be tangential:Z or point:Z");
  const std::string kind = s.substr(0, colon);
  b.point = parse_complex(s.substr(colon + 1));
  if (kind == "tangential")
    b.tangential = true;
  else if (kind == "point")
    b.tangential = false;
  else
    throw ValidationError("base must be tangential:Z or point:Z");
  return b;
}

// Path from the base to y on P^1 minus {0,1,infinity}, leaving a tangential
// base along the tangent direction first.
Path kz_path(const BwBaseSpec& base, cplx y) {
  if (!base.tangential) {
    if (std::abs(base.point - y) < 1e-12)
      throw ValidationError("base and target coincide");
    return Path::straight(base.point, y);
  }
  const cplx c = base.point;
  if (std::abs(c) > 1e-12 && std::abs(c - 1.0) > 1e-12)
    throw ValidationError("tangential base must sit at the puncture 0 or 1");
  const cplx tangent = (std::abs(c) < 0.5) ? cplx(1.0) : cplx(-1.0);
  const cplx first_stop = c + 0.1 * tangent;
  Path p = std::abs(first_stop - y) < 1e-12
               ? Path::straight(c, y)
               : Path::polyline({c, first_stop, y});
  return p.with_start_decoration({c, tangent});
}

int cmd_hall(int alphabet_size, int max_degree, const std::string& out_path, bool dry_run) {
  if (dry_run) {
    std::cout << "ok\n";
    return 0;
  }
  const auto basis = lyndon_basis(Alphabet::standard(alphabet_size), max_degree);
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  const Alphabet a = Alphabet::standard(alphabet_size);
  for (const auto& h : basis)
    out << h.degree << '\t' << word_to_string(a, h.word) << '\t' << h.label << '\n';
  return 0;
}

int cmd_iterint(const std::string& forms_path, const std::string& path_path,
                const std::string& out_path, bool dry_run) {
  std::ifstream ff(forms_path);
  if (!ff) throw ValidationError("cannot open forms file: " + forms_path);
  std::stringstream buf;
  buf << ff.rdbuf();
  // forms file: a connection-style JSON whose letter forms e0, e1, ... give
  // the integrand order
  const Connection conn = connection_from_json_text(buf.str());
  const Path path = path_from_json_file(path_path);
  std::vector<OneForm> forms;
  for (int l = 0; l < conn.alphabet().size(); ++l) forms.push_back(conn.letter_form(l));
  if (dry_run) {
    std::cout << "ok\n";
    return 0;
  }
  const cplx v = iterated_integral(forms, path);
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  out << fmt(v.real()) << '\t' << fmt(v.imag()) << '\n';
  return 0;
}

int cmd_transport(const std::string& conn_path, const std::string& path_path,
                  bool closed_form, const std::string& out_path, bool dry_run) {
  const Connection conn = connection_from_json_file(conn_path);
  const Path path = path_from_json_file(path_path);
  if (dry_run) {
    std::cout << "ok\n";
    return 0;
  }
  const Series t = closed_form ? regularized_transport_closed_form(conn, path)
                               : regularized_transport(conn, path);
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  write_series_lines(out, t);
  return 0;
}

int cmd_bw(const std::string& curve, const std::string& base_str,
           const std::vector<std::string>& targets, int depth, const std::string& out_path,
           bool dry_run) {
  if (curve != "p1-minus-012")
    throw ValidationError("supported curves: p1-minus-012 (the KZ connection)");
  const BwBaseSpec base = parse_base(base_str);
  if (targets.empty()) throw ValidationError("at least one --target required");
  std::vector<cplx> ys;
  for (const auto& t : targets) ys.push_back(parse_complex(t));
  if (dry_run) {
    std::cout << "ok\n";
    return 0;
  }
  const Connection conn = Connection::kz(depth);
  const FrobeniusSpec spec = FrobeniusSpec::kz(depth);
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  out << "y_re,y_im,hall_label,value_re,value_im\n";
  for (const cplx y : ys) {
    const BWTable table = bw_table(conn, spec, kz_path(base, y), depth);
    for (const auto& [label, value] : table.values)
      out << fmt(y.real()) << ',' << fmt(y.imag()) << ',' << label << ','
          << fmt(value.real()) << ',' << fmt(value.imag()) << '\n';
  }
  return 0;
}

int cmd_rs_check(const std::string& eigen_path, int level, const std::string& reps_path,
                 double s, int64_t terms, int64_t pmax, double tol, bool dry_run) {
  EigenformData f = ingest_eigenform_file(eigen_path, level);
  if (!reps_path.empty()) apply_local_reps(f, local_reps_from_json_file(reps_path));
  if (terms > f.n_max())
    throw ValidationError("--terms exceeds the eigenvalue data in the file");
  if (dry_run) {
    std::cout << "ok\n";
    return 0;
  }
  if (pmax == 0) pmax = std::min<int64_t>(terms, 100000);
  const double dirichlet = rankin_dirichlet(f, f, s, terms).value.real();
  double euler = partial_L(f, f, s, pmax).value.real() /
                 zeta_partial(level, 2.0 * s, pmax).value.real();
  int m = level;
  for (int p = 2; m > 1; ++p) {
    if (m % p != 0) continue;
    int r = 0;
    while (m % p == 0) {
      m /= p;
      ++r;
    }
    if (r == 1) {
      const auto rep = LocalRep::steinberg(p, f.a(p) > 0 ? 1 : -1, 0);
      euler *= zeta_local_infinity(rep, rep, s).real();
    }
    // r > 1: the bad Euler factor is 1
  }
  const double rel = std::abs(dirichlet - euler) / std::abs(euler);
  std::cout << (rel < tol ? "PASS" : "FAIL") << " rel_err=" << fmt(rel)
            << " dirichlet=" << fmt(dirichlet) << " euler=" << fmt(euler) << '\n';
  return rel < tol ? 0 : 4;
}

int cmd_zeta_local(int64_t p, int r, int chi, int chi2, int eps, int eps2,
                   const std::string& s_str, bool dry_run) {
  if (dry_run) {
    std::cout << "ok\n";
    return 0;
  }
  const cplx s = parse_complex(s_str);
  LocalRep pf, pg;
  if (r == 1) {
    pf = LocalRep::steinberg(p, chi, eps);
    pg = LocalRep::steinberg(p, chi2, eps2);
  } else {
    pf = LocalRep::deep_ramified(p, r, eps);
    pg = LocalRep::deep_ramified(p, r, eps2);
  }
  const cplx inf = zeta_local_infinity(pf, pg, s);
  const cplx zero = zeta_local_zero(pf, pg, s);
  std::cout << "I_infinity/vol=" << fmt(inf.real()) << (inf.imag() < 0 ? "-" : "+")
            << fmt(std::abs(inf.imag())) << "i\n";
  std::cout << "I_zero/vol=" << fmt(zero.real()) << (zero.imag() < 0 ? "-" : "+")
            << fmt(std::abs(zero.imag())) << "i\n";
  std::cout << "zero_coset_count=" << zero_coset_count(p, r) << '\n';
  return 0;
}

int cmd_regulator(const std::string& eigen_path, int level, const std::string& reps_path,
                  const std::string& base_str, double eis_b, int64_t terms, bool certificate,
                  const std::string& out_path, bool dry_run) {
  EigenformData f = ingest_eigenform_file(eigen_path, level);
  apply_local_reps(f, local_reps_from_json_file(reps_path));
  BaseMode mode;
  if (base_str == "tangential")
    mode = BaseMode::tangential;
  else if (base_str == "rational")
    mode = BaseMode::rational;
  else
    throw ValidationError("--base must be tangential or rational");
  if (terms > f.n_max()) throw ValidationError("--terms exceeds the eigenvalue data");
  if (dry_run) {
    std::cout << "ok\n";
    return 0;
  }
  const DeskRunResult res = desk_run_prime_level(f, mode, terms, eis_b);
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  out << "basis_label,re,im\n";
  for (const auto& [label, v] : res.reg2.coords)
    out << label << ',' << format_complex_csv(v) << '\n';
  for (const auto& [label, v] : res.reg3.coords)
    out << label << ',' << format_complex_csv(v) << '\n';
  std::cerr << "residue=" << fmt(res.residue.value) << " spread=" << fmt(res.residue.spread)
            << " petersson=" << fmt(res.petersson_norm)
            << " zeta_level_2=" << fmt(res.zeta_level_2) << '\n';
  std::cerr << "intro_display_diagonal=" << fmt(res.intro_display_diagonal.imag())
            << "i ratio_to_assembled=" << fmt(res.intro_display_ratio.real())
            << (res.intro_display_ratio.imag() < 0 ? "-" : "+")
            << fmt(std::abs(res.intro_display_ratio.imag())) << "i\n";
  if (res.residue.spread > 0.05)
    throw ToleranceError("residue ladder spread exceeds 5%");
  if (certificate) std::cout << (res.nonsplit ? "NONSPLIT=true" : "NONSPLIT=false") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unipotent parallel transport, Bloch-Wigner tables and modular regulators"};
  app.require_subcommand(1);
  app.fallthrough();
  bool dry_run = false;
  app.add_flag("--dry-run", dry_run, "validate inputs without computing");

  auto* hall = app.add_subcommand("hall", "Lyndon/Hall basis of the free Lie algebra");
  int alphabet_size = 2, max_degree = 4;
  std::string out_path;
  hall->add_option("--alphabet", alphabet_size, "number of letters")
      ->check(CLI::Range(1, 8))
      ->required();
  hall->add_option("--max-degree", max_degree, "largest bracket degree")
      ->check(CLI::Range(1, 6))
      ->required();
  hall->add_option("--out", out_path, "output file (default stdout)");

  auto* iter = app.add_subcommand("iterint", "iterated integral of one-forms along a path");
  std::string forms_path, path_path;
  iter->add_option("--forms", forms_path, "connection-style JSON with the integrand forms")
      ->required();
  iter->add_option("--path", path_path, "path JSON file")->required();
  iter->add_option("--out", out_path, "output file (default stdout)");

  auto* trans = app.add_subcommand("transport", "Chen series of a connection along a path");
  std::string conn_path;
  bool closed_form = false;
  trans->add_option("--connection", conn_path, "connection JSON file")->required();
  trans->add_option("--path", path_path, "path JSON file")->required();
  trans->add_flag("--closed-form", closed_form,
                  "use the closed-form regularization backend");
  trans->add_option("--out", out_path, "output file (default stdout)");

  auto* bw = app.add_subcommand("bw", "generalized Bloch-Wigner table");
  std::string curve = "p1-minus-012", base_str = "tangential:0";
  std::vector<std::string> targets;
  int depth = 2;
  bw->add_option("--curve", curve, "curve id (p1-minus-012)");
  bw->add_option("--base", base_str, "tangential:Z or point:Z");
  bw->add_option("--target", targets, "target point(s) re[,im]")->required();
  bw->add_option("--depth", depth, "table depth")->check(CLI::Range(1, 4));
  bw->add_option("--out", out_path, "output file (default stdout)");

  auto* rs = app.add_subcommand("rs-check", "Dirichlet-vs-Euler Rankin-Selberg identity");
  std::string eigen_path, reps_path;
  int level = 11;
  double s_real = 2.0, tol = 1e-4;
  int64_t terms = 100000, pmax = 0;
  rs->add_option("--eigenform", eigen_path, "eigenvalue CSV (n,a_n)")->required();
  rs->add_option("--level", level, "level N")->check(CLI::PositiveNumber);
  rs->add_option("--local-reps", reps_path, "local-rep sidecar JSON");
  rs->add_option("--s", s_real, "evaluation point (real, > 1)");
  rs->add_option("--terms", terms, "Dirichlet series length");
  rs->add_option("--pmax", pmax, "Euler product cutoff (default min(terms, 1e5))");
  rs->add_option("--tol", tol, "relative tolerance");

  auto* zl = app.add_subcommand("zeta-local", "local zeta integrals at a bad prime");
  int64_t zp = 11;
  int zr = 1, chi = 1, chi2 = 1, eps = -1, eps2 = -1;
  std::string s_str = "2";
  zl->add_option("--p", zp, "prime")->required();
  zl->add_option("--r", zr, "v_p(N)")->check(CLI::PositiveNumber);
  zl->add_option("--chi", chi, "Steinberg twist chi(p) for pi");
  zl->add_option("--chi2", chi2, "Steinberg twist chi(p) for pi'");
  zl->add_option("--eps", eps, "epsilon(1/2, pi_p)");
  zl->add_option("--eps2", eps2, "epsilon(1/2, pi'_p)");
  zl->add_option("--s", s_str, "evaluation point re[,im]");

  auto* reg = app.add_subcommand("regulator", "prime-level regulator desk run");
  std::string base_mode = "tangential";
  double eis_b = 0.0;
  bool certificate = false;
  reg->add_option("--eigenform", eigen_path, "eigenvalue CSV (n,a_n)")->required();
  reg->add_option("--level", level, "prime level")->check(CLI::PositiveNumber);
  reg->add_option("--local-reps", reps_path, "local-rep sidecar JSON")->required();
  reg->add_option("--base", base_mode, "tangential or rational");
  reg->add_option("--eis-b", eis_b, "E_c(b,1) input value (rational mode)");
  reg->add_option("--terms", terms, "Dirichlet/Euler cutoff");
  reg->add_flag("--certificate", certificate, "emit the NONSPLIT certificate line");
  reg->add_option("--out", out_path, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(hall)) return cmd_hall(alphabet_size, max_degree, out_path, dry_run);
    if (app.got_subcommand(iter)) return cmd_iterint(forms_path, path_path, out_path, dry_run);
    if (app.got_subcommand(trans))
      return cmd_transport(conn_path, path_path, closed_form, out_path, dry_run);
    if (app.got_subcommand(bw))
      return cmd_bw(curve, base_str, targets, depth, out_path, dry_run);
    if (app.got_subcommand(rs))
      return cmd_rs_check(eigen_path, level, reps_path, s_real, terms, pmax, tol, dry_run);
    if (app.got_subcommand(zl))
      return cmd_zeta_local(zp, zr, chi, chi2, eps, eps2, s_str, dry_run);
    if (app.got_subcommand(reg))
      return cmd_regulator(eigen_path, level, reps_path, base_mode, eis_b, terms, certificate,
                           out_path, dry_run);
  } catch (const unipar::ToleranceError& e) {
    std::cerr << "tolerance failure: " << e.what() << '\n';
    return 4;
  } catch (const unipar::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
