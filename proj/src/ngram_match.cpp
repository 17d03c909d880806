#include "onomast/ngram_match.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace onomast {

int NGramProfile::total() const {
  int sum = 0;
  for (const auto& [gram, count] : counts) sum += count;
  return sum;
}

std::string_view to_string(MatchMode mode) { return mode == MatchMode::arabic ? "arabic" : "standard"; }

NGramProfile ngram_profile(std::string_view isr, int n) {
  if (n != 2 && n != 3) throw std::invalid_argument("n-gram size must be 2 or 3");
  NGramProfile profile;
  profile.n = n;
  const auto width = static_cast<std::size_t>(n);
  if (isr.size() < width) return profile;
  for (std::size_t i = 0; i + width <= isr.size(); ++i) {
    ++profile.counts[std::string(isr.substr(i, width))];
  }
  return profile;
}

double cosine(const NGramProfile& p, const NGramProfile& q) {
  if (p.n != q.n) throw std::invalid_argument("cosine of profiles with different n");
  if (p.empty() || q.empty()) return 0.0;

  // Both maps are ordered, so the dot product is a merge walk.
  double dot = 0.0;
  auto pi = p.counts.begin();
  auto qi = q.counts.begin();
  while (pi != p.counts.end() && qi != q.counts.end()) {
    if (pi->first < qi->first) {
      ++pi;
    } else if (qi->first < pi->first) {
      ++qi;
    } else {
      dot += static_cast<double>(pi->second) * qi->second;
      ++pi;
      ++qi;
    }
  }
  double pp = 0.0;
  for (const auto& [gram, count] : p.counts) pp += static_cast<double>(count) * count;
  double qq = 0.0;
  for (const auto& [gram, count] : q.counts) qq += static_cast<double>(count) * count;
  const double value = dot / std::sqrt(pp * qq);
  return std::min(1.0, value);
}

std::string strip_vowels(std::string_view isr) {
  std::string kept;
  kept.reserve(isr.size());
  for (char c : isr) {
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') continue;
    kept.push_back(c);
  }
  return canonical_whitespace(kept);
}

SimilarityScore name_similarity(const IsrName& a, const IsrName& b) {
  SimilarityScore s;
  s.mode = (a.source_script == Script::arabic || b.source_script == Script::arabic) ? MatchMode::arabic
                                                                                     : MatchMode::standard;
  s.bigram = cosine(ngram_profile(a.text, 2), ngram_profile(b.text, 2));
  s.trigram = cosine(ngram_profile(a.text, 3), ngram_profile(b.text, 3));
  s.consonant_bigram = cosine(ngram_profile(strip_vowels(a.text), 2), ngram_profile(strip_vowels(b.text), 2));
  s.combined = s.mode == MatchMode::arabic ? s.consonant_bigram : (s.bigram + s.trigram + s.consonant_bigram) / 3.0;
  return s;
}

}  // namespace onomast
