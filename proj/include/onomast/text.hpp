#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace onomast {

/// Writing systems a name can be recorded in. `other` covers anything the
/// bundled rules cannot romanise (kana, han, hebrew, ...).
enum class Script { latin, greek, cyrillic, arabic, devanagari, other };

std::string_view to_string(Script script);
/// Throws std::invalid_argument for an unknown tag.
Script script_from_string(std::string_view tag);

namespace utf8 {

/// Decodes UTF-8; malformed bytes become U+FFFD.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

/// Simple one-to-one lowercase mapping for Latin, Greek and Cyrillic.
char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view text);

bool is_upper(char32_t cp);
bool is_letter(char32_t cp);
bool is_digit(char32_t cp);

/// Whether the script distinguishes letter case at all.
bool is_cased(Script script);

/// Script of a single code point, `other` for non-letters.
Script script_of(char32_t cp);

}  // namespace utf8

/// Majority script among the letters of `text`; latin when there are none.
Script detect_script(std::string_view text);

/// Collapses runs of whitespace to one space and trims both ends.
std::string canonical_whitespace(std::string_view text);

/// Diagnostic sink shared by loaders and transformations. Messages are kept
/// in emission order.
struct Diagnostics {
  std::vector<std::string> messages;

  void note(std::string message) { messages.push_back(std::move(message)); }
  bool empty() const { return messages.empty(); }
};

}  // namespace onomast
