#pragma once

#include <map>
#include <string>
#include <string_view>

#include "onomast/transform.hpp"

namespace onomast {

/// Letter n-gram frequencies of an ISR string. Windows slide over the raw
/// string, internal spaces included, without boundary padding.
struct NGramProfile {
  int n = 2;
  std::map<std::string, int> counts;

  int total() const;
  bool empty() const { return counts.empty(); }
};

enum class MatchMode { standard, arabic };

std::string_view to_string(MatchMode mode);

struct SimilarityScore {
  double bigram = 0.0;
  double trigram = 0.0;
  double consonant_bigram = 0.0;
  double combined = 0.0;
  MatchMode mode = MatchMode::standard;
};

/// Throws std::invalid_argument unless n is 2 or 3.
NGramProfile ngram_profile(std::string_view isr, int n);

/// Cosine of the two count vectors; 0 when either is empty. Throws
/// std::invalid_argument when the profiles use different n.
double cosine(const NGramProfile& p, const NGramProfile& q);

/// Removes a, e, i, o, u (y stays) and collapses the spaces left behind.
std::string strip_vowels(std::string_view isr);

/// Average of bigram, trigram and vowel-less bigram cosines; when either
/// side was romanised from Arabic only the vowel-less bigram cosine counts.
SimilarityScore name_similarity(const IsrName& a, const IsrName& b);

}  // namespace onomast
