#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace onomast {

/// One row of a declension table. An empty `ending` with `consonant_class`
/// set is the default rule for consonant-final tokens; `any_final` rows
/// append their suffixes to every token (per-name alternation lists).
struct DeclensionRule {
  std::string language;
  std::string ending;
  std::vector<std::string> suffixes;  // replacements for `ending`; empty when not declined
  bool consonant_class = false;
  bool any_final = false;
  std::string notes;

  bool declined() const { return !suffixes.empty(); }
};

/// Token alternatives: the token is matched as `stem + suffix` for one of
/// `suffixes`, or as one of the listed whole `forms` (stem mutations).
struct TokenPattern {
  std::string stem;
  std::vector<std::string> suffixes;
  std::vector<std::string> forms;

  bool matches(std::string_view lowered_token) const;
  /// Every surface form this token pattern accepts, base form first.
  std::vector<std::string> expand() const;
};

struct NamePattern {
  std::string base;
  std::string language;
  std::vector<TokenPattern> tokens;
};

struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the last token
};

/// Declension tables and per-name stem mutations for the languages that
/// inflect names. Immutable after loading. Matching is case-insensitive.
class Morphology {
 public:
  /// TSV `language<TAB>ending<TAB>suffixes`. Ending `@consonant` marks the
  /// default consonant class, `@any` an append-to-every-token list; a
  /// suffix field of `-` marks an indeclinable ending.
  static Morphology parse(std::string_view declension_tsv, std::string_view exceptions_tsv = {});
  static Morphology load(const std::filesystem::path& declension_file,
                         const std::filesystem::path& exceptions_file = {});

  bool has_language(std::string_view language) const;
  std::vector<std::string> languages() const;

  /// Base form followed by each inflected form, deduplicated. Throws
  /// ConfigError for a language without a table.
  std::vector<std::string> declension_variants(std::string_view token, std::string_view language) const;

  /// Throws std::invalid_argument for names with fewer than two tokens and
  /// ConfigError for a language without a table.
  NamePattern build_pattern(std::string_view full_name, std::string_view language) const;

 private:
  TokenPattern token_pattern(std::string_view token, std::string_view language) const;

  std::map<std::string, std::vector<DeclensionRule>, std::less<>> rules_;
  // language -> lowercased base token -> extra lowercased surface forms
  std::map<std::string, std::map<std::string, std::vector<std::string>>, std::less<>> stem_forms_;
};

/// First window of `tokens` matched by `pattern`, comparing lowercased
/// tokens. Each pattern token must match one text token.
std::optional<TokenSpan> match_inflected(const std::vector<std::string>& tokens, const NamePattern& pattern);

/// Splits a name on whitespace.
std::vector<std::string> split_name(std::string_view name);

}  // namespace onomast
