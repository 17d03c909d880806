#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "onomast/morpho.hpp"
#include "onomast/text.hpp"

namespace onomast {

using PersonId = std::int64_t;

struct Document {
  std::string id;
  std::string language;
  std::string date;
  std::string title;
  std::string body;
  std::string source;
  std::vector<std::pair<std::string, int>> country_tags;
};

/// Word token with the layout facts name guessing depends on.
struct Token {
  std::string text;
  std::string lower;
  std::size_t begin = 0;  // byte offsets into the tokenised text
  std::size_t end = 0;
  bool upper_initial = false;
  bool sentence_start = false;
  bool break_before = false;  // punctuation separates this token from the previous one
};

std::vector<Token> tokenize(std::string_view text);

enum class TriggerKind { title, country_adjective, profession, regex };
enum class TriggerSide { left, right };

struct TriggerPattern {
  std::string language;
  TriggerKind kind = TriggerKind::title;
  TriggerSide side = TriggerSide::left;
  std::string surface;
  int max_gap_tokens = 2;

  std::vector<std::string> tokens;        // lowercased surface tokens (non-regex kinds)
  std::shared_ptr<const std::regex> regex;  // regex kind only
};

/// TSV `language<TAB>kind<TAB>side<TAB>surface-or-regex<TAB>max_gap`; the
/// max_gap column may be empty for the default of 2. Throws ConfigError on
/// malformed lines or regexes that do not compile.
std::vector<TriggerPattern> parse_triggers(std::string_view tsv);
std::vector<TriggerPattern> load_triggers(const std::filesystem::path& path);

/// Per-language lexical resources used to guess new names.
struct LanguageResources {
  std::string language;
  std::vector<TriggerPattern> triggers;
  std::set<std::string, std::less<>> stopwords;    // lowercased
  std::set<std::string, std::less<>> first_names;  // lowercased
};

enum class RecognitionMethod { lookup, component, trigger_guess };
std::string_view to_string(RecognitionMethod method);

struct NameCandidate {
  std::string surface;       // base form for lookups, document text otherwise
  std::string matched_text;  // text as it appears in the document
  std::size_t token_begin = 0;
  std::size_t token_end = 0;
  std::string doc_id;
  std::optional<std::string> cluster_id;
  std::vector<std::string> triggers;
  RecognitionMethod method = RecognitionMethod::trigger_guess;
  std::string language;
  Script script = Script::latin;
  std::optional<PersonId> person_id;  // lookup hits only
};

/// A stored orthography of a known person.
struct KnownName {
  PersonId person_id = 0;
  std::string surface;
  std::int64_t person_count = 0;  // summed occurrences of the person
};

/// Token-level trie over every accepted orthography of the known names of
/// one language. Immutable once built.
class KnownNameMatcher {
 public:
  KnownNameMatcher();

  std::size_t pattern_count() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Longest entry starting at `start`; returns its index and end token.
  std::optional<std::pair<std::size_t, std::size_t>> longest_at(const std::vector<Token>& tokens,
                                                                std::size_t start) const;

  struct Entry {
    PersonId person_id;
    std::string surface;
  };
  const Entry& entry(std::size_t i) const { return entries_[i]; }

  /// Whether some accepted orthography equals `name` token for token.
  bool accepts(std::string_view name) const;

 private:
  friend KnownNameMatcher compile_known_names(const std::vector<KnownName>&, std::string_view, const Morphology*);

  struct Node {
    std::map<std::string, std::size_t, std::less<>> children;
    std::optional<std::size_t> entry;
  };
  void insert(const std::vector<std::vector<std::string>>& alternatives, std::size_t entry);

  std::vector<Node> nodes_;
  std::vector<Entry> entries_;
};

/// Only persons seen at least twice are searched for; names in languages
/// with a declension table also match their inflected forms.
KnownNameMatcher compile_known_names(const std::vector<KnownName>& names, std::string_view language,
                                     const Morphology* morphology);

/// Leftmost-longest, non-overlapping lookups, one candidate per person.
std::vector<NameCandidate> scan_known(const Document& doc, const KnownNameMatcher& matcher);

/// Trigger- and first-name-driven guessing of multi-token names.
std::vector<NameCandidate> guess_new(const Document& doc, const LanguageResources& resources);

/// Union of both paths. Guesses overlapping a lookup only contribute their
/// trigger words to it.
std::vector<NameCandidate> recognize_document(const Document& doc, const KnownNameMatcher& matcher,
                                              const LanguageResources& resources);

/// A distinct surface form found somewhere in a cluster.
struct ClusterName {
  std::string surface;
  std::string language;
  Script script = Script::latin;
  RecognitionMethod method = RecognitionMethod::trigger_guess;
  std::optional<PersonId> person_id;
  std::vector<std::string> doc_ids;
  std::map<std::string, int> trigger_counts;  // lowercased trigger phrase -> count
};

/// Treats the cluster as one meta-text: one entry per distinct surface,
/// sorted by surface.
std::vector<ClusterName> aggregate_cluster_names(const std::vector<NameCandidate>& candidates,
                                                 std::string_view cluster_id);

/// Loads `triggers.tsv`, `stopwords/<lang>.txt` and `lexicon/<lang>/first_names.txt`
/// below `root` for each requested language. Missing trigger files are a
/// ConfigError; absent per-language lists are simply empty.
std::map<std::string, LanguageResources> load_language_resources(const std::filesystem::path& root,
                                                                 const std::vector<std::string>& languages);

}  // namespace onomast
