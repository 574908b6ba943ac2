#include "unipar/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace unipar {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

cplx complex_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2)
    throw ValidationError(std::string(what) + ": expected [re, im]");
  return cplx(j[0].get<double>(), j[1].get<double>());
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

Path path_from_json(const json& j) {
  json segments;
  std::optional<Tangential> start, end;
  if (j.is_array()) {
    segments = j;
  } else if (j.is_object()) {
    if (!j.contains("segments")) throw ValidationError("path object needs \"segments\"");
    segments = j["segments"];
    auto read_tang = [](const json& t) {
      return Tangential{complex_from(t.at("puncture"), "puncture"),
                        complex_from(t.at("tangent"), "tangent")};
    };
    if (j.contains("tangential_start")) start = read_tang(j["tangential_start"]);
    if (j.contains("tangential_end")) end = read_tang(j["tangential_end"]);
  } else {
    throw ValidationError("path file must be a JSON list or object");
  }
  std::vector<Path::Segment> segs;
  for (const auto& s : segments) {
    const std::string type = s.at("type").get<std::string>();
    Path::Segment seg;
    if (type == "line") {
      seg.kind = Path::Segment::Kind::line;
      seg.line = {complex_from(s.at("from"), "from"), complex_from(s.at("to"), "to")};
    } else if (type == "arc") {
      seg.kind = Path::Segment::Kind::arc;
      seg.arc = {complex_from(s.at("center"), "center"), s.at("radius").get<double>(),
                 s.at("theta_from").get<double>(), s.at("theta_to").get<double>()};
    } else {
      throw ValidationError("unknown segment type: " + type);
    }
    segs.push_back(seg);
  }
  return Path::from_segments(std::move(segs), start, end);
}

Connection connection_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("connection file must be a JSON object");
  std::vector<std::string> letters;
  for (const auto& l : j.at("alphabet")) letters.push_back(l.get<std::string>());
  Alphabet alphabet(letters);
  const int degree = j.at("truncation_degree").get<int>();
  Connection conn(alphabet, degree);
  if (j.contains("forms")) {
    for (const auto& [word_str, body] : j.at("forms").items()) {
      OneForm form;
      if (body.contains("poles"))
        for (const auto& p : body.at("poles")) {
          if (!p.is_array() || p.size() != 4)
            throw ValidationError("pole record must be [loc_re,loc_im,res_re,res_im]");
          form.poles.push_back({cplx(p[0].get<double>(), p[1].get<double>()),
                                cplx(p[2].get<double>(), p[3].get<double>())});
        }
      if (body.contains("poly"))
        for (const auto& c : body.at("poly")) form.poly.push_back(complex_from(c, "poly"));
      const Word w = word_from_string(alphabet, word_str);
      if (w.empty()) throw ValidationError("connection forms attach to nonempty words");
      if (w.size() == 1)
        conn.set_letter_form(w[0], std::move(form));
      else
        conn.set_word_form(w, std::move(form));
    }
  }
  return conn;
}

}  // namespace

void write_series_lines(std::ostream& out, const Series& s) {
  for (const auto& [w, v] : s.entries()) {
    out << word_to_string(s.alphabet(), w) << '\t' << fmt_double(v.real()) << '\t'
        << fmt_double(v.imag()) << '\n';
  }
}

Series read_series_lines(std::istream& in, const Alphabet& a, int truncation_degree) {
  Series s(a, truncation_degree);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string word_str, re_str, im_str;
    if (!std::getline(ss, word_str, '\t') || !std::getline(ss, re_str, '\t') ||
        !std::getline(ss, im_str))
      throw ValidationError("malformed series line: " + line);
    s.add_coeff(word_from_string(a, word_str), cplx(std::stod(re_str), std::stod(im_str)));
  }
  return s;
}

namespace {

// json access errors (missing keys, wrong types) surface as ValidationError
template <typename Fn>
auto guarded(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed input: ") + e.what());
  }
}

}  // namespace

Path path_from_json_text(const std::string& text) {
  return guarded([&] { return path_from_json(parse_json_text(text)); });
}
Path path_from_json_file(const std::string& path) {
  return guarded([&] { return path_from_json(load_json_file(path)); });
}

Connection connection_from_json_text(const std::string& text) {
  return guarded([&] { return connection_from_json(parse_json_text(text)); });
}
Connection connection_from_json_file(const std::string& path) {
  return guarded([&] { return connection_from_json(load_json_file(path)); });
}

namespace {

std::vector<LocalRepRecord> local_reps_from_json(const json& j) {
  std::vector<LocalRepRecord> out;
  auto read_one = [](const json& o) {
    LocalRepRecord r;
    r.p = o.at("p").get<int>();
    r.kind = o.at("kind").get<std::string>();
    if (o.contains("chi")) r.chi = o.at("chi").get<int>();
    if (o.contains("r")) r.r = o.at("r").get<int>();
    r.epsilon = o.at("epsilon").get<int>();
    if (r.kind != "steinberg" && r.kind != "deep")
      throw ValidationError("local rep kind must be steinberg or deep");
    if (r.epsilon != 1 && r.epsilon != -1)
      throw ValidationError("epsilon must be +1 or -1");
    return r;
  };
  if (j.is_array())
    for (const auto& o : j) out.push_back(read_one(o));
  else
    out.push_back(read_one(j));
  return out;
}

}  // namespace

std::vector<LocalRepRecord> local_reps_from_json_text(const std::string& text) {
  return guarded([&] { return local_reps_from_json(parse_json_text(text)); });
}
std::vector<LocalRepRecord> local_reps_from_json_file(const std::string& path) {
  return guarded([&] { return local_reps_from_json(load_json_file(path)); });
}

void apply_local_reps(EigenformData& f, const std::vector<LocalRepRecord>& reps) {
  for (const auto& r : reps) f.set_epsilon(r.p, r.epsilon);
}

void write_bw_csv(std::ostream& out, const BWTable& table) {
  out << "y_re,y_im,hall_label,value_re,value_im\n";
  for (const auto& [label, value] : table.values) {
    out << fmt_double(table.point.real()) << ',' << fmt_double(table.point.imag()) << ','
        << label << ',' << fmt_double(value.real()) << ',' << fmt_double(value.imag()) << '\n';
  }
}

std::string format_complex_csv(cplx v) {
  return fmt_double(v.real()) + "," + fmt_double(v.imag());
}

}  // namespace unipar
