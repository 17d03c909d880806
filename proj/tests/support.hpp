#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "onomast/morpho.hpp"
#include "onomast/transform.hpp"

namespace testing_support {

inline const std::filesystem::path kData = ONOMAST_DATA_DIR;
inline const std::filesystem::path kFixtures = ONOMAST_FIXTURE_DIR;

inline std::shared_ptr<const onomast::Transformer> transformer() {
  static const auto t = std::make_shared<const onomast::Transformer>(
      onomast::Transformer::load_directory(kData / "rules"));
  return t;
}

inline const onomast::Morphology& morphology() {
  static const auto m =
      onomast::Morphology::load(kData / "morpho" / "declension.tsv", kData / "morpho" / "stem_exceptions.tsv");
  return m;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Non-empty, non-comment lines split on tabs.
inline std::vector<std::vector<std::string>> read_tsv(const std::filesystem::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      cells.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    rows.push_back(cells);
  }
  return rows;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::vector<std::string> out;
  for (auto& row : read_tsv(p)) out.push_back(row[0]);
  return out;
}

// Brute-force n-gram similarity, written without the library: every window
// is compared against every window of the other string.
namespace oracle {

inline std::vector<std::string> windows(const std::string& s, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) out.push_back(s.substr(i, n));
  return out;
}

inline double cosine(const std::string& a, const std::string& b, std::size_t n) {
  const auto wa = windows(a, n);
  const auto wb = windows(b, n);
  if (wa.empty() || wb.empty()) return 0.0;
  // dot = number of matching window pairs; |v|^2 = matching pairs within one string.
  double dot = 0, aa = 0, bb = 0;
  for (const auto& x : wa)
    for (const auto& y : wb) dot += x == y;
  for (const auto& x : wa)
    for (const auto& y : wa) aa += x == y;
  for (const auto& x : wb)
    for (const auto& y : wb) bb += x == y;
  return dot / std::sqrt(aa * bb);
}

inline std::string consonants(const std::string& s) {
  std::string kept;
  for (char c : s) {
    if (std::string("aeiou").find(c) == std::string::npos) kept += c;
  }
  std::string out;
  for (char c : kept) {
    if (c == ' ' && (out.empty() || out.back() == ' ')) continue;
    out += c;
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

struct Score {
  double bigram, trigram, consonant_bigram, combined;
};

inline Score similarity(const std::string& a, const std::string& b, bool arabic) {
  Score s{};
  s.bigram = cosine(a, b, 2);
  s.trigram = cosine(a, b, 3);
  s.consonant_bigram = cosine(consonants(a), consonants(b), 2);
  s.combined = arabic ? s.consonant_bigram : (s.bigram + s.trigram + s.consonant_bigram) / 3.0;
  return s;
}

// G² in entropy form: 2 (Σ k ln k − Σ row ln row − Σ col ln col + N ln N),
// in long double because the terms cancel heavily for large tables.
inline double g2(long double k11, long double k12, long double k21, long double k22) {
  const auto xlx = [](long double x) { return x > 0 ? x * std::log(x) : 0.0L; };
  const long double n = k11 + k12 + k21 + k22;
  const long double cells = xlx(k11) + xlx(k12) + xlx(k21) + xlx(k22);
  const long double rows = xlx(k11 + k12) + xlx(k21 + k22);
  const long double cols = xlx(k11 + k21) + xlx(k12 + k22);
  return static_cast<double>(2.0L * (cells - rows - cols + xlx(n)));
}

}  // namespace oracle
}  // namespace testing_support
