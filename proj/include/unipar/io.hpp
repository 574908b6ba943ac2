#pragma once

// File formats: series line dumps, path and connection JSON, local-rep
// sidecars, and the CSV emitters used by the CLI.

#include <iosfwd>
#include <string>
#include <vector>

#include "unipar/automorphic.hpp"
#include "unipar/iterint.hpp"
#include "unipar/ncalg.hpp"
#include "unipar/singleval.hpp"

namespace unipar {

// One line per stored word: `word<TAB>re<TAB>im`, letters joined by '.',
// the empty word spelled `1`. Zero coefficients are skipped.
void write_series_lines(std::ostream& out, const Series& s);
Series read_series_lines(std::istream& in, const Alphabet& a, int truncation_degree);

// Path file: a JSON list of segments, or an object {"segments": [...],
// "tangential_start": {...}, "tangential_end": {...}}. Segment records are
// {"type":"line","from":[re,im],"to":[re,im]} or
// {"type":"arc","center":[re,im],"radius":r,"theta_from":t0,"theta_to":t1};
// tangential records are {"puncture":[re,im],"tangent":[re,im]}.
Path path_from_json_text(const std::string& text);
Path path_from_json_file(const std::string& path);

// Connection file: {"alphabet":[...], "truncation_degree":N, "forms":
// {word: {"poles":[[loc_re,loc_im,res_re,res_im],...], "poly":[[re,im],...]}}}
Connection connection_from_json_text(const std::string& text);
Connection connection_from_json_file(const std::string& path);

// Local-rep sidecar: one object or a list of objects like
// {"p":11,"kind":"steinberg","chi":1,"epsilon":-1} (deep ramification adds
// "r":v_p(N)). Applies the epsilon data to the eigenform.
struct LocalRepRecord {
  int p = 0;
  std::string kind;
  int chi = 1;
  int r = 1;
  int epsilon = 0;
};
std::vector<LocalRepRecord> local_reps_from_json_text(const std::string& text);
std::vector<LocalRepRecord> local_reps_from_json_file(const std::string& path);
void apply_local_reps(EigenformData& f, const std::vector<LocalRepRecord>& reps);

// CSV rows `y_re,y_im,hall_label,value_re,value_im`.
void write_bw_csv(std::ostream& out, const BWTable& table);

std::string format_complex_csv(cplx v);

}  // namespace unipar
