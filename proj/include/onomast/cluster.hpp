#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "onomast/text.hpp"

namespace onomast {

using TermVector = std::map<std::string, double, std::less<>>;
using TermCounts = std::map<std::string, std::int64_t, std::less<>>;

/// `term<TAB>count` reference frequencies for one text type.
struct FrequencyList {
  TermCounts counts;
  std::int64_t total = 0;

  std::int64_t count(std::string_view term) const;
  bool contains(std::string_view term) const { return counts.find(term) != counts.end(); }

  /// Throws ConfigError on malformed lines.
  static FrequencyList parse(std::string_view tsv);
  /// Throws ConfigError when the file is missing.
  static FrequencyList load(const std::filesystem::path& path);
};

/// G² for the 2x2 table (term, other) x (document, reference).
double log_likelihood(std::int64_t doc_count, std::int64_t doc_total, std::int64_t ref_count, std::int64_t ref_total);

/// Lowercased letter runs of at least two letters, minus stopwords.
TermCounts count_terms(std::string_view text, const std::set<std::string, std::less<>>& stopwords);

/// Keyness per term. Terms no more frequent in the document than in the
/// reference are left out (their keyness is 0).
TermVector keyness(const TermCounts& doc_counts, const FrequencyList& reference);

/// Terms by descending keyness, ties by term.
std::vector<std::pair<std::string, double>> ranked_terms(const TermVector& weights);

/// Country pseudo-terms carry this prefix so they never collide with words.
inline constexpr std::string_view kCountryPrefix = "#";

struct DocumentVector {
  std::string doc_id;
  TermVector weights;
};

/// Adds `#<iso>` terms weighted by the same G² over country-mention counts.
/// Codes missing from `country_reference` are skipped with a diagnostic.
DocumentVector enrich_countries(DocumentVector vec, const std::vector<std::pair<std::string, int>>& country_tags,
                                const FrequencyList& country_reference, Diagnostics* diagnostics = nullptr);

double cosine(const TermVector& a, const TermVector& b);

struct ClusterNode {
  std::size_t id = 0;                                     // index in Dendrogram::nodes
  std::optional<std::pair<std::size_t, std::size_t>> children;
  std::optional<std::size_t> parent;
  int weight = 1;
  TermVector vector;
  double cohesiveness = 1.0;
  std::vector<std::string> members;  // sorted doc ids

  bool leaf() const { return !children.has_value(); }
};

/// Leaves come first, in input order; internal nodes follow in merge order.
struct Dendrogram {
  std::vector<ClusterNode> nodes;
  std::size_t root = 0;

  const ClusterNode& root_node() const { return nodes[root]; }
};

/// Centroid-linkage agglomeration: repeatedly merges the most similar pair
/// of active nodes into their weight-averaged vector. Ties go to the pair
/// with the smallest member doc ids. Vectors without any nonzero term are
/// dropped with a diagnostic; throws std::invalid_argument when nothing is
/// left to cluster.
Dendrogram build_dendrogram(const std::vector<DocumentVector>& vectors, Diagnostics* diagnostics = nullptr);

struct Topic {
  std::size_t node = 0;
  std::string title_doc;
  std::vector<std::string> keywords;
};

/// Maximal internal subtrees with cohesiveness >= min_sim, largest first.
std::vector<Topic> detect_topics(const Dendrogram& dendrogram, double min_sim = 0.5, std::size_t keyword_count = 10);

}  // namespace onomast
