#include "onomast/transform.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace onomast {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool is_token_boundary(char c) { return c == ' ' || c == '-'; }

std::string replace_all(std::string_view text, const Rule& rule, bool whole_word) {
  const std::string_view pattern = rule.pattern;
  const bool need_start = whole_word || rule.anchor == Anchor::word_start;
  const bool need_end = whole_word || rule.anchor == Anchor::word_end;

  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, pattern.size(), pattern) == 0) {
      const std::size_t end = i + pattern.size();
      const bool start_ok = !need_start || i == 0 || is_token_boundary(text[i - 1]);
      const bool end_ok = !need_end || end == text.size() || is_token_boundary(text[end]);
      if (start_ok && end_ok) {
        out += rule.replacement;
        i = end;
        continue;
      }
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

bool is_isr_char(char c) { return (c >= 'a' && c <= 'z') || c == ' ' || c == '-' || c == '\''; }

// Drops everything outside the ISR alphabet; other whitespace becomes a space.
std::string restrict_to_isr(std::string_view text, Diagnostics* diagnostics) {
  std::string out;
  out.reserve(text.size());
  std::string dropped;
  for (char32_t cp : utf8::decode(text)) {
    if (cp < 0x80 && is_isr_char(static_cast<char>(cp))) {
      out.push_back(static_cast<char>(cp));
    } else if (cp == '\t' || cp == '\n' || cp == '\r') {
      out.push_back(' ');
    } else {
      utf8::append(dropped, cp);
    }
  }
  if (diagnostics != nullptr && !dropped.empty()) {
    diagnostics->note("dropped characters outside the ISR alphabet: '" + dropped + "' in '" + std::string(text) + "'");
  }
  return canonical_whitespace(out);
}

}  // namespace

RuleSet load_ruleset(std::string_view source, std::string id, RuleKind kind, Script script,
                     Diagnostics* diagnostics) {
  RuleSet rs;
  rs.id = std::move(id);
  rs.kind = kind;
  rs.script = script;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    auto nl = source.find('\n', pos);
    if (nl == std::string_view::npos) nl = source.size();
    std::string_view line = source.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (nl == source.size()) break;
      continue;
    }

    const auto sep = line.find("=>");
    if (sep == std::string_view::npos) throw RuleParseError(line_no, "missing '=>' separator");

    Rule rule;
    const std::string_view pattern = trim(line.substr(0, sep));
    std::string_view rhs = trim(line.substr(sep + 2));
    if (pattern.empty()) throw RuleParseError(line_no, "empty pattern");

    if (const auto at = rhs.rfind('@'); at != std::string_view::npos &&
                                        (at == 0 || rhs[at - 1] == ' ' || rhs[at - 1] == '\t')) {
      const std::string_view tag = rhs.substr(at);
      if (tag == "@start") {
        rule.anchor = Anchor::word_start;
      } else if (tag == "@end") {
        rule.anchor = Anchor::word_end;
      } else {
        throw RuleParseError(line_no, "unknown anchor '" + std::string(tag) + "'");
      }
      rhs = trim(rhs.substr(0, at));
    }

    rule.pattern = utf8::to_lower(pattern);
    rule.replacement = std::string(rhs);

    const auto dup = std::find_if(rs.rules.begin(), rs.rules.end(), [&](const Rule& r) {
      return r.pattern == rule.pattern && r.anchor == rule.anchor;
    });
    if (dup != rs.rules.end()) {
      if (diagnostics != nullptr) {
        diagnostics->note(rs.id + ":" + std::to_string(line_no) + ": duplicate pattern '" + rule.pattern +
                          "', keeping the later rule");
      }
      rs.rules.erase(dup);
    }
    rs.rules.push_back(std::move(rule));
    if (nl == source.size()) break;
  }
  return rs;
}

RuleSet load_ruleset_file(const std::filesystem::path& path, RuleKind kind, Script script,
                          Diagnostics* diagnostics) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read rule file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return load_ruleset(buf.str(), path.filename().string(), kind, script, diagnostics);
  } catch (const RuleParseError& e) {
    throw RuleParseError(e.line(), path.string() + ": " + e.what());
  }
}

std::string apply_rules(const RuleSet& rules, std::string_view text) {
  std::string s = canonical_whitespace(utf8::to_lower(text));
  const bool whole_word = rules.kind == RuleKind::exception;
  for (const Rule& rule : rules.rules) s = replace_all(s, rule, whole_word);
  return canonical_whitespace(s);
}

bool is_isr_text(std::string_view text) {
  if (text.empty()) return true;
  if (text.front() == ' ' || text.back() == ' ') return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_isr_char(text[i])) return false;
    if (text[i] == ' ' && i > 0 && text[i - 1] == ' ') return false;
  }
  return true;
}

Transformer Transformer::load_directory(const std::filesystem::path& dir, Diagnostics* diagnostics) {
  namespace fs = std::filesystem;
  Transformer t;
  const fs::path norm = dir / "normalization.rules";
  if (!fs::exists(norm)) throw ConfigError("missing " + norm.string());
  RuleSet norm_exceptions{"normalization.exceptions", RuleKind::exception, Script::latin, {}};
  if (fs::exists(dir / "normalization.exceptions")) {
    norm_exceptions =
        load_ruleset_file(dir / "normalization.exceptions", RuleKind::exception, Script::latin, diagnostics);
  }
  t.set_normalization(load_ruleset_file(norm, RuleKind::normalization, Script::latin, diagnostics),
                      std::move(norm_exceptions));

  for (Script script : {Script::greek, Script::cyrillic, Script::arabic, Script::devanagari}) {
    const std::string tag(to_string(script));
    const fs::path translit = dir / (tag + ".translit");
    if (!fs::exists(translit)) continue;
    RuleSet exceptions{tag + ".exceptions", RuleKind::exception, script, {}};
    if (fs::exists(dir / (tag + ".exceptions"))) {
      exceptions = load_ruleset_file(dir / (tag + ".exceptions"), RuleKind::exception, script, diagnostics);
    }
    t.register_script(script, load_ruleset_file(translit, RuleKind::transliteration, script, diagnostics),
                      std::move(exceptions));
  }
  return t;
}

void Transformer::set_normalization(RuleSet rules, RuleSet exceptions) {
  normalization_ = std::move(rules);
  normalization_exceptions_ = std::move(exceptions);
  normalization_exceptions_.kind = RuleKind::exception;
}

void Transformer::register_script(Script script, RuleSet transliteration, RuleSet exceptions) {
  exceptions.kind = RuleKind::exception;
  scripts_[script] = ScriptRules{std::move(exceptions), std::move(transliteration)};
}

bool Transformer::has_script(Script script) const { return scripts_.count(script) > 0; }

std::string Transformer::transliterate(Script script, std::string_view name, Diagnostics* diagnostics) const {
  const auto it = scripts_.find(script);
  if (it == scripts_.end()) {
    throw ConfigError("no transliteration rules registered for script '" + std::string(to_string(script)) + "'");
  }
  const std::string romanised = apply_rules(it->second.transliteration, apply_rules(it->second.exceptions, name));

  std::string out;
  std::string dropped;
  for (char32_t cp : utf8::decode(romanised)) {
    if (cp >= 0x80 && utf8::script_of(cp) == script) {
      utf8::append(dropped, cp);
    } else {
      utf8::append(out, cp);
    }
  }
  if (diagnostics != nullptr && !dropped.empty()) {
    diagnostics->note("unmapped " + std::string(to_string(script)) + " characters dropped: '" + dropped +
                      "' in '" + std::string(name) + "'");
  }
  return canonical_whitespace(out);
}

std::string Transformer::normalize(std::string_view latin_name, Diagnostics* diagnostics) const {
  std::string current = canonical_whitespace(utf8::to_lower(latin_name));
  // Each pass only shortens or folds; eight passes is far beyond what any
  // bundled rule file needs to reach a fixpoint.
  for (int pass = 0; pass < 8; ++pass) {
    std::string next = apply_rules(normalization_, apply_rules(normalization_exceptions_, current));
    next = restrict_to_isr(next, pass == 0 ? diagnostics : nullptr);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

IsrName Transformer::to_isr(std::string_view name, Script script, Diagnostics* diagnostics) const {
  IsrName isr;
  isr.source_script = script;
  isr.original = std::string(name);
  if (script == Script::latin) {
    isr.text = normalize(name, diagnostics);
  } else {
    isr.text = normalize(transliterate(script, name, diagnostics), diagnostics);
  }
  return isr;
}

}  // namespace onomast
