#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "onomast/text.hpp"

namespace onomast {

/// Raised by the rule-file parser; carries the 1-based offending line.
class RuleParseError : public std::runtime_error {
 public:
  RuleParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Missing or unusable resources (unregistered script, absent rule file).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RuleKind { transliteration, normalization, exception };
enum class Anchor { anywhere, word_start, word_end };

struct Rule {
  std::string pattern;
  std::string replacement;
  Anchor anchor = Anchor::anywhere;
};

/// Ordered substitution rules. Exception rule sets match whole tokens only.
struct RuleSet {
  std::string id;
  RuleKind kind = RuleKind::normalization;
  Script script = Script::latin;
  std::vector<Rule> rules;
};

/// Parses `PATTERN => REPLACEMENT [@start|@end]` lines. Patterns are
/// lowercased on load since `apply_rules` lowercases its input first.
RuleSet load_ruleset(std::string_view source, std::string id, RuleKind kind, Script script,
                     Diagnostics* diagnostics = nullptr);

RuleSet load_ruleset_file(const std::filesystem::path& path, RuleKind kind, Script script,
                          Diagnostics* diagnostics = nullptr);

/// Lowercases, runs every rule in order as a global left-to-right
/// non-overlapping replacement, then canonicalises whitespace.
std::string apply_rules(const RuleSet& rules, std::string_view text);

/// A name projected to the internal standard representation: lowercase
/// ASCII letters, single spaces, hyphens and apostrophes only.
struct IsrName {
  std::string text;
  Script source_script = Script::latin;
  std::string original;
};

bool is_isr_text(std::string_view text);

/// Script-aware projection of names to ISR. Immutable once loaded.
class Transformer {
 public:
  Transformer() = default;

  /// Loads `normalization.rules` (required), `normalization.exceptions`,
  /// and for each script `<script>.translit` plus `<script>.exceptions`.
  static Transformer load_directory(const std::filesystem::path& dir, Diagnostics* diagnostics = nullptr);

  void set_normalization(RuleSet rules, RuleSet exceptions = {});
  void register_script(Script script, RuleSet transliteration, RuleSet exceptions = {});
  bool has_script(Script script) const;

  /// Romanises `name`. Characters the rules leave unmapped are dropped and
  /// reported. Throws ConfigError if no rules are registered for `script`.
  std::string transliterate(Script script, std::string_view name, Diagnostics* diagnostics = nullptr) const;

  /// Lowercased, diacritic-folded and normalised form; applied repeatedly
  /// until it stops changing so that ISR is a projection.
  std::string normalize(std::string_view latin_name, Diagnostics* diagnostics = nullptr) const;

  IsrName to_isr(std::string_view name, Script script, Diagnostics* diagnostics = nullptr) const;
  IsrName to_isr(std::string_view name) const { return to_isr(name, detect_script(name)); }

 private:
  struct ScriptRules {
    RuleSet exceptions;
    RuleSet transliteration;
  };

  RuleSet normalization_;
  RuleSet normalization_exceptions_;
  std::map<Script, ScriptRules> scripts_;
};

}  // namespace onomast
