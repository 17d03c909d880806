#include "onomast/morpho.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "onomast/text.hpp"
#include "onomast/transform.hpp"

namespace onomast {
namespace {

std::vector<std::string> split_fields(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

bool is_vowel_or_soft(char32_t cp) {
  static constexpr std::u32string_view kVowels = U"aeiouyаеёиоуыэюяьйіїє";
  return kVowels.find(utf8::to_lower(cp)) != std::u32string_view::npos;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void push_unique(std::vector<std::string>& v, std::string s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(std::move(s));
}

}  // namespace

bool TokenPattern::matches(std::string_view lowered_token) const {
  if (lowered_token.size() >= stem.size() && lowered_token.compare(0, stem.size(), stem) == 0) {
    const std::string_view rest = lowered_token.substr(stem.size());
    for (const auto& suffix : suffixes) {
      if (rest == suffix) return true;
    }
  }
  for (const auto& form : forms) {
    if (utf8::to_lower(form) == lowered_token) return true;
  }
  return false;
}

std::vector<std::string> TokenPattern::expand() const {
  std::vector<std::string> out;
  for (const auto& suffix : suffixes) push_unique(out, stem + suffix);
  for (const auto& form : forms) push_unique(out, utf8::to_lower(form));
  return out;
}

Morphology Morphology::parse(std::string_view declension_tsv, std::string_view exceptions_tsv) {
  Morphology m;
  std::size_t line_no = 0;
  for (std::string_view line : lines_of(declension_tsv)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_fields(line, '\t');
    if (fields.size() < 3) {
      throw ConfigError("declension table line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    DeclensionRule rule;
    rule.language = fields[0];
    if (fields[1] == "@consonant") {
      rule.consonant_class = true;
    } else if (fields[1] == "@any") {
      rule.any_final = true;
    } else {
      rule.ending = utf8::to_lower(fields[1]);
    }
    if (fields[2] != "-") {
      std::istringstream suffixes(fields[2]);
      std::string s;
      while (suffixes >> s) push_unique(rule.suffixes, utf8::to_lower(s));
    }
    if (fields.size() > 3) rule.notes = fields[3];
    m.rules_[rule.language].push_back(std::move(rule));
  }

  line_no = 0;
  for (std::string_view line : lines_of(exceptions_tsv)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_fields(line, '\t');
    if (fields.size() != 3) {
      throw ConfigError("stem exception line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    push_unique(m.stem_forms_[fields[0]][utf8::to_lower(fields[1])], fields[2]);
  }
  return m;
}

Morphology Morphology::load(const std::filesystem::path& declension_file,
                            const std::filesystem::path& exceptions_file) {
  const std::string exceptions = exceptions_file.empty() ? std::string{} : read_file(exceptions_file);
  return parse(read_file(declension_file), exceptions);
}

bool Morphology::has_language(std::string_view language) const { return rules_.find(language) != rules_.end(); }

std::vector<std::string> Morphology::languages() const {
  std::vector<std::string> out;
  for (const auto& [lang, rules] : rules_) out.push_back(lang);
  return out;
}

TokenPattern Morphology::token_pattern(std::string_view token, std::string_view language) const {
  const auto table = rules_.find(language);
  if (table == rules_.end()) {
    throw ConfigError("no declension table for language '" + std::string(language) + "'");
  }
  const std::u32string lowered = utf8::decode(utf8::to_lower(token));

  TokenPattern pattern;
  pattern.stem = utf8::encode(lowered);
  pattern.suffixes = {""};

  const DeclensionRule* best = nullptr;
  std::size_t best_len = 0;
  const DeclensionRule* consonant = nullptr;
  const DeclensionRule* any = nullptr;
  for (const auto& rule : table->second) {
    if (rule.consonant_class) {
      consonant = &rule;
      continue;
    }
    if (rule.any_final) {
      any = &rule;
      continue;
    }
    const std::u32string ending = utf8::decode(rule.ending);
    if (ending.size() > best_len && ending.size() < lowered.size() &&
        lowered.compare(lowered.size() - ending.size(), ending.size(), ending) == 0) {
      best = &rule;
      best_len = ending.size();
    }
  }

  if (best != nullptr) {
    if (best->declined()) {
      pattern.stem = utf8::encode(lowered.substr(0, lowered.size() - best_len));
      pattern.suffixes = {best->ending};
      for (const auto& s : best->suffixes) push_unique(pattern.suffixes, s);
    }
  } else if (consonant != nullptr && !lowered.empty() && utf8::is_letter(lowered.back()) &&
             !is_vowel_or_soft(lowered.back())) {
    for (const auto& s : consonant->suffixes) push_unique(pattern.suffixes, s);
  } else if (any != nullptr) {
    for (const auto& s : any->suffixes) push_unique(pattern.suffixes, s);
  }

  if (const auto lang = stem_forms_.find(language); lang != stem_forms_.end()) {
    if (const auto forms = lang->second.find(utf8::encode(lowered)); forms != lang->second.end()) {
      pattern.forms = forms->second;
    }
  }
  return pattern;
}

std::vector<std::string> Morphology::declension_variants(std::string_view token, std::string_view language) const {
  const TokenPattern pattern = token_pattern(token, language);
  // Rebuild forms on the original-case stem so "Никита" yields "Никиты".
  const std::u32string original = utf8::decode(token);
  const std::size_t stem_len = utf8::decode(pattern.stem).size();
  const std::string stem = utf8::encode(std::u32string_view(original).substr(0, stem_len));

  std::vector<std::string> out{std::string(token)};
  for (const auto& suffix : pattern.suffixes) push_unique(out, stem + suffix);
  for (const auto& form : pattern.forms) push_unique(out, form);
  return out;
}

NamePattern Morphology::build_pattern(std::string_view full_name, std::string_view language) const {
  const auto tokens = split_name(full_name);
  if (tokens.size() < 2) {
    throw std::invalid_argument("name patterns need at least two name parts: '" + std::string(full_name) + "'");
  }
  NamePattern pattern;
  pattern.base = canonical_whitespace(full_name);
  pattern.language = std::string(language);
  for (const auto& token : tokens) pattern.tokens.push_back(token_pattern(token, language));
  return pattern;
}

std::optional<TokenSpan> match_inflected(const std::vector<std::string>& tokens, const NamePattern& pattern) {
  const std::size_t width = pattern.tokens.size();
  if (width == 0 || tokens.size() < width) return std::nullopt;
  std::vector<std::string> lowered;
  lowered.reserve(tokens.size());
  for (const auto& t : tokens) lowered.push_back(utf8::to_lower(t));

  for (std::size_t start = 0; start + width <= lowered.size(); ++start) {
    bool all = true;
    for (std::size_t k = 0; k < width && all; ++k) all = pattern.tokens[k].matches(lowered[start + k]);
    if (all) return TokenSpan{start, start + width};
  }
  return std::nullopt;
}

std::vector<std::string> split_name(std::string_view name) {
  std::vector<std::string> out;
  std::istringstream in{std::string(name)};
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

}  // namespace onomast
