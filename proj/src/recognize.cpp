#include "onomast/recognize.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "onomast/transform.hpp"

namespace onomast {
namespace {

struct CodePoint {
  char32_t cp;
  std::size_t offset;
};

std::vector<CodePoint> decode_with_offsets(std::string_view text) {
  std::vector<CodePoint> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = 3;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    len = std::min(len, text.size() - i);
    const auto decoded = utf8::decode(text.substr(i, len));
    out.push_back({decoded.empty() ? char32_t{0xFFFD} : decoded.front(), i});
    i += len;
  }
  return out;
}

bool is_word_char(char32_t cp) { return utf8::is_letter(cp) || utf8::is_digit(cp); }
bool is_joiner(char32_t cp) { return cp == '-' || cp == '\'' || cp == 0x2019; }
bool is_terminal(char32_t cp) { return cp == '.' || cp == '!' || cp == '?' || cp == 0x2026 || cp == 0x61F; }
bool is_space(char32_t cp) { return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == 0xA0; }

bool all_lower_letters(std::u32string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char32_t c) { return utf8::is_letter(c) && !utf8::is_upper(c); });
}

void push_token(std::vector<Token>& out, std::string_view text, std::size_t begin, std::size_t end,
                bool sentence_start, bool break_before) {
  Token t;
  t.text = std::string(text.substr(begin, end - begin));
  t.lower = utf8::to_lower(t.text);
  t.begin = begin;
  t.end = end;
  const auto cps = utf8::decode(t.text);
  t.upper_initial = !cps.empty() && utf8::is_upper(cps.front());
  t.sentence_start = sentence_start;
  t.break_before = break_before || sentence_start;
  out.push_back(std::move(t));
}

std::vector<std::string> read_list(const std::filesystem::path& path) {
  std::vector<std::string> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    out.push_back(canonical_whitespace(line));
  }
  return out;
}

// Lowercase particles that may sit inside a multi-part name.
bool is_name_particle(std::string_view lower) {
  static const std::set<std::string, std::less<>> kParticles = {
      "al", "el", "bin", "ben", "ibn", "abu", "van", "von", "der", "den", "de",
      "da", "di", "du", "dos", "das", "del", "la", "le", "zu", "ter", "bint", "d'", "d\u2019"};
  return kParticles.count(lower) > 0;
}

// "al-Hariri" and "el-Baradei" count as capitalised name parts.
bool looks_like_name_part(const Token& token) {
  if (token.upper_initial) return true;
  const auto cps = utf8::decode(token.text);
  const auto dash = cps.rfind(U'-');
  if (dash == std::u32string::npos || dash == 0 || dash + 1 >= cps.size()) return false;
  return dash <= 3 && all_lower_letters(std::u32string_view(cps).substr(0, dash)) && utf8::is_upper(cps[dash + 1]);
}

struct TriggerHit {
  std::size_t begin;
  std::size_t end;
  const TriggerPattern* pattern;
};

std::vector<TriggerHit> find_triggers(const std::vector<Token>& tokens, const std::vector<TriggerPattern>& triggers) {
  std::vector<TriggerHit> hits;
  for (const auto& trig : triggers) {
    if (trig.regex) {
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string window;
        for (std::size_t w = 0; w < 4 && i + w < tokens.size(); ++w) {
          if (w > 0 && tokens[i + w].break_before) break;
          if (w > 0) window.push_back(' ');
          window += tokens[i + w].lower;
          if (std::regex_match(window, *trig.regex)) hits.push_back({i, i + w + 1, &trig});
        }
      }
      continue;
    }
    const std::size_t k = trig.tokens.size();
    if (k == 0) continue;
    for (std::size_t i = 0; i + k <= tokens.size(); ++i) {
      bool ok = true;
      for (std::size_t w = 0; w < k && ok; ++w) {
        ok = tokens[i + w].lower == trig.tokens[w] && (w == 0 || !tokens[i + w].break_before);
      }
      if (ok) hits.push_back({i, i + k, &trig});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const TriggerHit& a, const TriggerHit& b) {
    return std::tie(a.begin, a.end, a.pattern->surface) < std::tie(b.begin, b.end, b.pattern->surface);
  });
  // "Minister" inside "Prime Minister" is not a trigger of its own.
  std::vector<TriggerHit> maximal;
  for (const auto& h : hits) {
    const bool inside = std::any_of(hits.begin(), hits.end(), [&](const TriggerHit& o) {
      return o.begin <= h.begin && h.end <= o.end && (o.end - o.begin) > (h.end - h.begin);
    });
    if (!inside) maximal.push_back(h);
  }
  return maximal;
}

bool sentence_boundary_within(const std::vector<Token>& tokens, std::size_t first, std::size_t last) {
  for (std::size_t i = first; i <= last && i < tokens.size(); ++i) {
    if (tokens[i].sentence_start) return true;
  }
  return false;
}

std::string span_text(const Document& doc, const std::vector<Token>& tokens, std::size_t begin, std::size_t end) {
  return doc.body.substr(tokens[begin].begin, tokens[end - 1].end - tokens[begin].begin);
}

void add_unique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

NameCandidate make_candidate(const Document& doc, const std::vector<Token>& tokens, std::size_t begin,
                             std::size_t end, RecognitionMethod method) {
  NameCandidate c;
  c.matched_text = span_text(doc, tokens, begin, end);
  c.surface = c.matched_text;
  c.token_begin = begin;
  c.token_end = end;
  c.doc_id = doc.id;
  c.method = method;
  c.language = doc.language;
  c.script = detect_script(c.surface);
  return c;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  const auto cps = decode_with_offsets(text);
  std::vector<Token> tokens;
  bool pending_sentence = true;
  bool pending_break = false;
  int newlines = 0;

  std::size_t i = 0;
  while (i < cps.size()) {
    const char32_t cp = cps[i].cp;
    if (is_word_char(cp)) {
      std::size_t j = i + 1;
      while (j < cps.size()) {
        if (is_word_char(cps[j].cp)) {
          ++j;
        } else if (is_joiner(cps[j].cp) && j + 1 < cps.size() && is_word_char(cps[j + 1].cp)) {
          j += 2;
        } else {
          break;
        }
      }
      const std::size_t begin = cps[i].offset;
      const std::size_t end = j < cps.size() ? cps[j].offset : text.size();

      // French/Italian elision: "l'ex-dirigeant" is the article plus a word.
      std::size_t split = begin;
      for (std::size_t k = i + 1; k < j && k <= i + 3; ++k) {
        if (cps[k].cp == '\'' || cps[k].cp == 0x2019) {
          std::u32string prefix;
          for (std::size_t p = i; p < k; ++p) prefix.push_back(cps[p].cp);
          // A capitalised article ("L'attaquant") splits only before a lowercase word,
          // so "D'Alema" stays whole.
          const bool article = all_lower_letters(prefix) ||
                               (utf8::is_upper(prefix[0]) && (prefix.size() == 1 || all_lower_letters(prefix.substr(1))) && k + 1 < j &&
                                !utf8::is_upper(cps[k + 1].cp));
          if (article && k + 1 < j) split = cps[k + 1].offset;
          break;
        }
      }
      if (split != begin) {
        push_token(tokens, text, begin, split, pending_sentence, pending_break);
        push_token(tokens, text, split, end, false, false);
      } else {
        push_token(tokens, text, begin, end, pending_sentence, pending_break);
      }
      pending_sentence = false;
      pending_break = false;
      newlines = 0;

      // Periods after short capitalised tokens ("Dr.", "W.") are abbreviations.
      if (j < cps.size() && cps[j].cp == '.') {
        const Token& last = tokens.back();
        const auto len = utf8::decode(last.text).size();
        if (last.upper_initial && len <= 3) ++j;
      }
      i = j;
      continue;
    }

    if (is_terminal(cp)) {
      pending_sentence = true;
    } else if (cp == '\n') {
      if (++newlines >= 2) pending_sentence = true;
      pending_break = true;
    } else if (!is_space(cp)) {
      pending_break = true;
    }
    if (cp != '\n' && !is_space(cp)) newlines = 0;
    ++i;
  }
  return tokens;
}

std::vector<TriggerPattern> parse_triggers(std::string_view tsv) {
  std::vector<TriggerPattern> out;
  std::istringstream in{std::string(tsv)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    const auto fail = [&](const std::string& why) {
      throw ConfigError("trigger file line " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() < 4) fail("expected language, kind, side, surface[, max_gap]");

    TriggerPattern t;
    t.language = fields[0];
    if (fields[1] == "title") {
      t.kind = TriggerKind::title;
    } else if (fields[1] == "country_adjective") {
      t.kind = TriggerKind::country_adjective;
    } else if (fields[1] == "profession") {
      t.kind = TriggerKind::profession;
    } else if (fields[1] == "regex") {
      t.kind = TriggerKind::regex;
    } else {
      fail("unknown trigger kind '" + fields[1] + "'");
    }
    if (fields[2] == "left") {
      t.side = TriggerSide::left;
    } else if (fields[2] == "right") {
      t.side = TriggerSide::right;
    } else {
      fail("side must be left or right");
    }
    t.surface = canonical_whitespace(fields[3]);
    if (t.surface.empty()) fail("empty trigger surface");
    if (fields.size() > 4 && !fields[4].empty()) {
      try {
        t.max_gap_tokens = std::stoi(fields[4]);
      } catch (const std::exception&) {
        fail("max_gap is not an integer");
      }
      if (t.max_gap_tokens < 0) fail("max_gap must be non-negative");
    }
    if (t.kind == TriggerKind::regex) {
      try {
        t.regex = std::make_shared<const std::regex>(t.surface, std::regex::ECMAScript | std::regex::icase);
      } catch (const std::regex_error& e) {
        fail(std::string("regex does not compile: ") + e.what());
      }
    } else {
      for (const auto& tok : tokenize(t.surface)) t.tokens.push_back(tok.lower);
      if (t.tokens.empty()) fail("trigger surface has no words");
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TriggerPattern> load_triggers(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read trigger file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_triggers(buf.str());
}

std::string_view to_string(RecognitionMethod method) {
  switch (method) {
    case RecognitionMethod::lookup: return "lookup";
    case RecognitionMethod::component: return "component";
    case RecognitionMethod::trigger_guess: return "trigger_guess";
  }
  return "trigger_guess";
}

KnownNameMatcher::KnownNameMatcher() : nodes_(1) {}

void KnownNameMatcher::insert(const std::vector<std::vector<std::string>>& alternatives, std::size_t entry) {
  // Depth-first over the cartesian product of token alternatives.
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [node, depth] = stack.back();
    stack.pop_back();
    if (depth == alternatives.size()) {
      if (!nodes_[node].entry) nodes_[node].entry = entry;
      continue;
    }
    for (const auto& alt : alternatives[depth]) {
      auto it = nodes_[node].children.find(alt);
      std::size_t child;
      if (it == nodes_[node].children.end()) {
        child = nodes_.size();
        nodes_[node].children.emplace(alt, child);
        nodes_.emplace_back();
      } else {
        child = it->second;
      }
      stack.emplace_back(child, depth + 1);
    }
  }
}

std::optional<std::pair<std::size_t, std::size_t>> KnownNameMatcher::longest_at(const std::vector<Token>& tokens,
                                                                                std::size_t start) const {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  std::size_t node = 0;
  for (std::size_t j = start; j < tokens.size(); ++j) {
    if (j > start && tokens[j].break_before) break;
    const auto it = nodes_[node].children.find(tokens[j].lower);
    if (it == nodes_[node].children.end()) break;
    node = it->second;
    if (nodes_[node].entry) best = std::make_pair(*nodes_[node].entry, j + 1);
  }
  return best;
}

bool KnownNameMatcher::accepts(std::string_view name) const {
  const auto tokens = tokenize(name);
  const auto hit = longest_at(tokens, 0);
  return hit && hit->second == tokens.size();
}

KnownNameMatcher compile_known_names(const std::vector<KnownName>& names, std::string_view language,
                                     const Morphology* morphology) {
  std::vector<KnownName> eligible;
  std::copy_if(names.begin(), names.end(), std::back_inserter(eligible),
               [](const KnownName& n) { return n.person_count >= 2; });
  std::sort(eligible.begin(), eligible.end(), [](const KnownName& a, const KnownName& b) {
    return std::tie(a.person_id, a.surface) < std::tie(b.person_id, b.surface);
  });

  const bool inflecting = morphology != nullptr && morphology->has_language(language);
  KnownNameMatcher matcher;
  for (const auto& name : eligible) {
    const auto tokens = tokenize(name.surface);
    if (tokens.size() < 2) continue;

    std::vector<std::vector<std::string>> alternatives;
    if (inflecting) {
      std::string joined;
      for (const auto& t : tokens) {
        if (!joined.empty()) joined.push_back(' ');
        joined += t.text;
      }
      for (const auto& tp : morphology->build_pattern(joined, language).tokens) alternatives.push_back(tp.expand());
    } else {
      for (const auto& t : tokens) alternatives.push_back({t.lower});
    }
    matcher.entries_.push_back({name.person_id, name.surface});
    matcher.insert(alternatives, matcher.entries_.size() - 1);
  }
  return matcher;
}

std::vector<NameCandidate> scan_known(const Document& doc, const KnownNameMatcher& matcher) {
  std::vector<NameCandidate> out;
  if (matcher.empty()) return out;
  const auto tokens = tokenize(doc.body);
  std::set<PersonId> seen;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const auto hit = matcher.longest_at(tokens, i);
    if (!hit) {
      ++i;
      continue;
    }
    const auto& entry = matcher.entry(hit->first);
    if (seen.insert(entry.person_id).second) {
      NameCandidate c = make_candidate(doc, tokens, i, hit->second, RecognitionMethod::lookup);
      c.surface = entry.surface;
      c.script = detect_script(entry.surface);
      c.person_id = entry.person_id;
      out.push_back(std::move(c));
    }
    i = hit->second;
  }
  return out;
}

std::vector<NameCandidate> guess_new(const Document& doc, const LanguageResources& resources) {
  const auto tokens = tokenize(doc.body);
  const auto hits = find_triggers(tokens, resources.triggers);

  std::vector<bool> trigger_token(tokens.size(), false);
  for (const auto& h : hits) {
    for (std::size_t k = h.begin; k < h.end; ++k) trigger_token[k] = true;
  }
  const auto is_stop = [&](std::size_t k) { return resources.stopwords.count(tokens[k].lower) > 0; };

  std::vector<NameCandidate> out;
  const auto emit = [&](std::size_t begin, std::size_t end, RecognitionMethod method,
                        const std::vector<std::string>& triggers) {
    NameCandidate c = make_candidate(doc, tokens, begin, end, method);
    const auto same = std::find_if(out.begin(), out.end(), [&](const NameCandidate& o) { return o.surface == c.surface; });
    if (same != out.end()) {
      for (const auto& t : triggers) add_unique(same->triggers, t);
      if (method < same->method) same->method = method;
      return;
    }
    c.triggers = triggers;
    out.push_back(std::move(c));
  };

  const auto adjacent_triggers = [&](std::size_t begin, std::size_t end) {
    std::vector<std::string> found;
    for (const auto& h : hits) {
      const auto gap = static_cast<std::size_t>(h.pattern->max_gap_tokens);
      if (h.pattern->side == TriggerSide::left && h.end <= begin && begin - h.end <= gap &&
          !sentence_boundary_within(tokens, h.end, begin)) {
        add_unique(found, span_text(doc, tokens, h.begin, h.end));
      }
      if (h.pattern->side == TriggerSide::right && h.begin >= end && h.begin - end <= gap &&
          !sentence_boundary_within(tokens, end, h.begin)) {
        add_unique(found, span_text(doc, tokens, h.begin, h.end));
      }
    }
    return found;
  };

  const Script script = detect_script(doc.body);
  if (!utf8::is_cased(script)) {
    // Without letter case only the trigger context delimits a name: take
    // the two words right after a left trigger or right before a right one.
    constexpr std::size_t kNameWords = 2;
    const auto usable = [&](std::size_t k) { return !trigger_token[k] && !is_stop(k); };
    for (const auto& h : hits) {
      std::size_t begin = 0;
      if (h.pattern->side == TriggerSide::left) {
        begin = h.end;
        if (begin + kNameWords > tokens.size()) continue;
      } else {
        if (h.begin < kNameWords) continue;
        begin = h.begin - kNameWords;
      }
      const std::size_t end = begin + kNameWords;
      bool ok = true;
      for (std::size_t k = begin; k < end && ok; ++k) {
        ok = usable(k) && (k == begin || !tokens[k].break_before);
      }
      if (h.pattern->side == TriggerSide::left) ok = ok && !sentence_boundary_within(tokens, h.end, begin);
      if (h.pattern->side == TriggerSide::right) ok = ok && !sentence_boundary_within(tokens, end, h.begin);
      if (ok) emit(begin, end, RecognitionMethod::trigger_guess, {span_text(doc, tokens, h.begin, h.end)});
    }
    return out;
  }

  const auto single_token_trigger = [&](std::size_t k) {
    return std::any_of(hits.begin(), hits.end(), [&](const TriggerHit& h) { return h.begin == k && h.end == k + 1; });
  };
  const auto name_token = [&](std::size_t k) { return !trigger_token[k] && !is_stop(k) && looks_like_name_part(tokens[k]); };
  const auto particle = [&](std::size_t k) {
    return !trigger_token[k] && is_name_particle(tokens[k].lower);
  };

  std::size_t i = 0;
  while (i < tokens.size()) {
    if (!name_token(i)) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < tokens.size() && !tokens[end].break_before) {
      if (name_token(end)) {
        ++end;
      } else if (particle(end) && end + 1 < tokens.size() && !tokens[end + 1].break_before && name_token(end + 1)) {
        end += 2;
      } else if (trigger_token[end] && tokens[end].upper_initial && single_token_trigger(end) &&
                 (end + 1 == tokens.size() || tokens[end + 1].break_before || !name_token(end + 1))) {
        // "Mervyn King said": a capitalised title that ends a run is a surname.
        ++end;
      } else {
        break;
      }
    }
    std::size_t begin = i;
    i = end;
    if (end - begin < 2) continue;

    const auto is_component = [&](std::size_t k) { return resources.first_names.count(tokens[k].lower) > 0; };
    if (!is_component(begin)) {
      // Capitalised words before a known first name ("Intérieur Dominique de
      // Villepin", sentence openers) are not part of the name.
      for (std::size_t k = begin + 1; k + 1 < end; ++k) {
        if (is_component(k)) {
          begin = k;
          break;
        }
      }
    }

    const auto triggers = adjacent_triggers(begin, end);
    if (is_component(begin)) {
      emit(begin, end, RecognitionMethod::component, triggers);
    } else if (!triggers.empty()) {
      emit(begin, end, RecognitionMethod::trigger_guess, triggers);
    }
  }
  return out;
}

std::vector<NameCandidate> recognize_document(const Document& doc, const KnownNameMatcher& matcher,
                                              const LanguageResources& resources) {
  std::vector<NameCandidate> found = scan_known(doc, matcher);
  const std::size_t lookups = found.size();
  for (auto& guess : guess_new(doc, resources)) {
    bool merged = false;
    for (std::size_t k = 0; k < lookups; ++k) {
      auto& known = found[k];
      if (guess.token_begin < known.token_end && known.token_begin < guess.token_end) {
        for (const auto& t : guess.triggers) add_unique(known.triggers, t);
        merged = true;
      }
    }
    if (merged) continue;
    const auto same = std::find_if(found.begin(), found.end(),
                                   [&](const NameCandidate& c) { return c.surface == guess.surface; });
    if (same == found.end()) found.push_back(std::move(guess));
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const NameCandidate& a, const NameCandidate& b) { return a.token_begin < b.token_begin; });
  return found;
}

std::vector<ClusterName> aggregate_cluster_names(const std::vector<NameCandidate>& candidates,
                                                 std::string_view cluster_id) {
  std::map<std::string, ClusterName> by_surface;
  for (const auto& c : candidates) {
    if (c.cluster_id && *c.cluster_id != cluster_id) continue;
    auto [it, inserted] = by_surface.try_emplace(c.surface);
    ClusterName& n = it->second;
    if (inserted) {
      n.surface = c.surface;
      n.language = c.language;
      n.script = c.script;
      n.method = c.method;
    }
    if (c.method < n.method) n.method = c.method;
    if (c.person_id && !n.person_id) n.person_id = c.person_id;
    add_unique(n.doc_ids, c.doc_id);
    for (const auto& t : c.triggers) ++n.trigger_counts[utf8::to_lower(t)];
  }
  std::vector<ClusterName> out;
  out.reserve(by_surface.size());
  for (auto& [surface, n] : by_surface) {
    std::sort(n.doc_ids.begin(), n.doc_ids.end());
    out.push_back(std::move(n));
  }
  return out;
}

std::map<std::string, LanguageResources> load_language_resources(const std::filesystem::path& root,
                                                                 const std::vector<std::string>& languages) {
  const auto all_triggers = load_triggers(root / "triggers" / "triggers.tsv");
  std::map<std::string, LanguageResources> out;
  for (const auto& lang : languages) {
    LanguageResources r;
    r.language = lang;
    for (const auto& t : all_triggers) {
      if (t.language == lang) r.triggers.push_back(t);
    }
    for (const auto& w : read_list(root / "stopwords" / (lang + ".txt"))) r.stopwords.insert(utf8::to_lower(w));
    for (const auto& w : read_list(root / "lexicon" / lang / "first_names.txt")) r.first_names.insert(utf8::to_lower(w));
    out.emplace(lang, std::move(r));
  }
  return out;
}

}  // namespace onomast
