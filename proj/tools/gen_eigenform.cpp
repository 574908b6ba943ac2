// Generates the Hecke eigenvalue table of the level-11 weight-2 newform from
// the eta-product q prod (1-q^n)^2 (1-q^{11n})^2, whose q-expansion is the
// unique normalized cusp form of level 11. Euler's pentagonal number theorem
// keeps every factor sparse, so the expansion is exact integer arithmetic.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "unipar/automorphic.hpp"

namespace {

// prod_{n>=1} (1 - q^n) = sum_k (-1)^k q^{k(3k-1)/2}, both signs of k
std::vector<std::pair<int64_t, int64_t>> pentagonal_series(int64_t max_n, int64_t scale) {
  std::vector<std::pair<int64_t, int64_t>> terms;  // (exponent, coefficient)
  terms.emplace_back(0, 1);
  for (int64_t k = 1;; ++k) {
    const int64_t g1 = scale * (k * (3 * k - 1)) / 2;
    const int64_t g2 = scale * (k * (3 * k + 1)) / 2;
    const int64_t sign = (k % 2 == 0) ? 1 : -1;
    bool any = false;
    if (g1 <= max_n) {
      terms.emplace_back(g1, sign);
      any = true;
    }
    if (g2 <= max_n) {
      terms.emplace_back(g2, sign);
      any = true;
    }
    if (!any) break;
  }
  return terms;
}

std::vector<int64_t> square_sparse(const std::vector<std::pair<int64_t, int64_t>>& s,
                                   int64_t max_n) {
  std::vector<int64_t> out(max_n + 1, 0);
  for (const auto& [e1, c1] : s) {
    if (e1 > max_n) continue;
    for (const auto& [e2, c2] : s) {
      const int64_t e = e1 + e2;
      if (e > max_n) continue;
      out[e] += c1 * c2;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eta-product eigenvalue table generator (level 11 newform)"};
  std::string curve = "11a";
  int64_t max_n = 100000;
  std::string out_path = "11a.csv";
  app.add_option("--curve", curve, "curve label (11a)");
  app.add_option("--max-n", max_n, "number of eigenvalues")->check(CLI::PositiveNumber);
  app.add_option("--out", out_path, "output CSV path")->required();
  CLI11_PARSE(app, argc, argv);
  if (curve != "11a") {
    std::cerr << "only the level-11 newform is built in\n";
    return 2;
  }

  const auto eta1 = pentagonal_series(max_n, 1);
  const auto eta11 = pentagonal_series(max_n, 11);
  const auto a = square_sparse(eta1, max_n);   // prod (1-q^n)^2
  const auto b = square_sparse(eta11, max_n);  // prod (1-q^{11n})^2

  // c = q * a * b, coefficient of q^n is sum_{i+j=n-1} a_i b_j
  std::vector<int64_t> c(max_n + 1, 0);
  for (int64_t j = 0; j <= max_n; ++j) {
    if (b[j] == 0) continue;
    const int64_t lim = max_n - 1 - j;
    for (int64_t i = 0; i <= lim; ++i) {
      if (a[i] != 0) c[i + j + 1] += a[i] * b[j];
    }
  }

  const std::vector<int64_t> expected = {1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2};
  for (std::size_t i = 0; i < expected.size() && static_cast<int64_t>(i) < max_n; ++i) {
    if (c[i + 1] != expected[i]) {
      std::cerr << "self-check failed at n=" << (i + 1) << ": got " << c[i + 1] << "\n";
      return 1;
    }
  }

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot open " << out_path << "\n";
    return 3;
  }
  out << "n,a_n\n";
  for (int64_t n = 1; n <= max_n; ++n) out << n << ',' << c[n] << '\n';

  // run the full Hecke validation before declaring success
  std::vector<double> ad(c.begin() + 1, c.end());
  try {
    unipar::EigenformData data(11, ad, curve);
    data.validate();
  } catch (const std::exception& e) {
    std::cerr << "validation failed: " << e.what() << "\n";
    return 1;
  }
  std::cout << "wrote " << max_n << " eigenvalues to " << out_path << "\n";
  return 0;
}
