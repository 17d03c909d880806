#include "onomast/text.hpp"

#include <array>
#include <stdexcept>

namespace onomast {

std::string_view to_string(Script script) {
  switch (script) {
    case Script::latin: return "latin";
    case Script::greek: return "greek";
    case Script::cyrillic: return "cyrillic";
    case Script::arabic: return "arabic";
    case Script::devanagari: return "devanagari";
    case Script::other: return "other";
  }
  return "other";
}

Script script_from_string(std::string_view tag) {
  if (tag == "latin") return Script::latin;
  if (tag == "greek") return Script::greek;
  if (tag == "cyrillic") return Script::cyrillic;
  if (tag == "arabic") return Script::arabic;
  if (tag == "devanagari") return Script::devanagari;
  if (tag == "other") return Script::other;
  throw std::invalid_argument("unknown script tag '" + std::string(tag) + "'");
}

namespace utf8 {

std::u32string decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    char32_t cp = 0;
    std::size_t extra = 0;
    if (lead < 0x80) {
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      cp = lead & 0x1F;
      extra = 1;
    } else if ((lead & 0xF0) == 0xE0) {
      cp = lead & 0x0F;
      extra = 2;
    } else if ((lead & 0xF8) == 0xF0) {
      cp = lead & 0x07;
      extra = 3;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t k = 1; k <= extra; ++k) {
      if (i + k >= text.size()) {
        ok = false;
        break;
      }
      const auto cont = static_cast<unsigned char>(text[i + k]);
      if ((cont & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cont & 0x3F);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append(out, cp);
  return out;
}

char32_t to_lower(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'A' && cp <= 'Z') ? cp + 0x20 : cp;
  }
  // Latin-1 supplement, minus the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  // Latin Extended-A: mostly even upper / odd lower pairs.
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp == 0x130) return 'i';
    if (cp == 0x178) return 0xFF;
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
      return (cp % 2 == 1) ? cp + 1 : cp;
    }
    if (cp == 0x138 || cp == 0x149 || cp == 0x17F) return cp;
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  // Latin Extended-B subset used in Romanian and Vietnamese-free names.
  if (cp >= 0x218 && cp <= 0x21B) return (cp % 2 == 0) ? cp + 1 : cp;
  // Greek.
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  switch (cp) {
    case 0x386: return 0x3AC;
    case 0x388: return 0x3AD;
    case 0x389: return 0x3AE;
    case 0x38A: return 0x3AF;
    case 0x38C: return 0x3CC;
    case 0x38E: return 0x3CD;
    case 0x38F: return 0x3CE;
    case 0x3AA: return 0x3CA;
    case 0x3AB: return 0x3CB;
    default: break;
  }
  // Cyrillic.
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x460 && cp <= 0x481) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x48A && cp <= 0x4BF) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x4D0 && cp <= 0x52F) return (cp % 2 == 0) ? cp + 1 : cp;
  return cp;
}

std::string to_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : decode(text)) append(out, to_lower(cp));
  return out;
}

bool is_upper(char32_t cp) { return to_lower(cp) != cp; }

bool is_digit(char32_t cp) {
  return (cp >= '0' && cp <= '9') || (cp >= 0x660 && cp <= 0x669) || (cp >= 0x6F0 && cp <= 0x6F9) ||
         (cp >= 0x966 && cp <= 0x96F);
}

bool is_letter(char32_t cp) {
  if (cp < 0x80) return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  if (cp < 0xC0) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x206F) return false;  // general punctuation
  if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
  if (cp == 0x30FB) return false;                  // katakana middle dot
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp == 0xFFFD) return false;
  switch (cp) {
    case 0x37E:  // greek question mark
    case 0x387:
    case 0x589:
    case 0x60C:  // arabic comma
    case 0x61B:
    case 0x61F:
    case 0x66A:
    case 0x66B:
    case 0x66C:
    case 0x66D:
    case 0x6D4:
    case 0x964:  // danda
    case 0x965:
      return false;
    default:
      break;
  }
  if (cp >= 0x64B && cp <= 0x652) return true;  // harakat travel with their letter
  return !is_digit(cp);
}

bool is_cased(Script script) {
  return script == Script::latin || script == Script::greek || script == Script::cyrillic;
}

Script script_of(char32_t cp) {
  if (!is_letter(cp)) return Script::other;
  if (cp < 0x250) return Script::latin;
  if (cp >= 0x1E00 && cp <= 0x1EFF) return Script::latin;
  if (cp >= 0x370 && cp <= 0x3FF) return Script::greek;
  if (cp >= 0x1F00 && cp <= 0x1FFF) return Script::greek;
  if (cp >= 0x400 && cp <= 0x52F) return Script::cyrillic;
  if ((cp >= 0x600 && cp <= 0x6FF) || (cp >= 0x750 && cp <= 0x77F) || (cp >= 0xFB50 && cp <= 0xFEFF)) {
    return Script::arabic;
  }
  if (cp >= 0x900 && cp <= 0x97F) return Script::devanagari;
  return Script::other;
}

}  // namespace utf8

Script detect_script(std::string_view text) {
  std::array<int, 6> counts{};
  for (char32_t cp : utf8::decode(text)) {
    if (!utf8::is_letter(cp)) continue;
    ++counts[static_cast<std::size_t>(utf8::script_of(cp))];
  }
  std::size_t best = 0;
  for (std::size_t s = 1; s < counts.size(); ++s) {
    if (counts[s] > counts[best]) best = s;
  }
  return counts[best] == 0 ? Script::latin : static_cast<Script>(best);
}

std::string canonical_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace onomast
