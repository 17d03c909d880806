#include <gtest/gtest.h>

#include <algorithm>

#include <json.hpp>

#include "onomast/recognize.hpp"
#include "support.hpp"

using namespace onomast;
using testing_support::kData;
using testing_support::morphology;

namespace {

const std::map<std::string, LanguageResources>& resources() {
  static const auto r = load_language_resources(kData, {"en", "fr", "de", "sl", "ru", "ar", "es", "nl", "et"});
  return r;
}

Document doc(std::string lang, std::string body, std::string id = "d1") {
  Document d;
  d.id = std::move(id);
  d.language = std::move(lang);
  d.body = std::move(body);
  return d;
}

std::vector<std::string> surfaces(const std::vector<NameCandidate>& cands) {
  std::vector<std::string> out;
  for (const auto& c : cands) out.push_back(c.surface);
  return out;
}

const NameCandidate* find(const std::vector<NameCandidate>& cands, const std::string& surface) {
  const auto it = std::find_if(cands.begin(), cands.end(), [&](const NameCandidate& c) { return c.surface == surface; });
  return it == cands.end() ? nullptr : &*it;
}

bool has_trigger(const NameCandidate& c, const std::string& t) {
  return std::find(c.triggers.begin(), c.triggers.end(), t) != c.triggers.end();
}

KnownNameMatcher matcher(const std::vector<KnownName>& names, const std::string& lang) {
  return compile_known_names(names, lang, &morphology());
}

}  // namespace

TEST(Tokenize, OffsetsAndFlags) {
  const std::string text = "Dr. Ahmed al-Hariri arrived. Then, l'ex-dirigeant spoke";
  const auto tokens = tokenize(text);
  std::vector<std::string> words;
  for (const auto& t : tokens) {
    words.push_back(t.text);
    EXPECT_EQ(text.substr(t.begin, t.end - t.begin), t.text);
  }
  EXPECT_EQ(words, (std::vector<std::string>{"Dr", "Ahmed", "al-Hariri", "arrived", "Then", "l'", "ex-dirigeant",
                                             "spoke"}));
  EXPECT_TRUE(tokens[0].sentence_start);
  EXPECT_FALSE(tokens[1].sentence_start);  // "Dr." is an abbreviation
  EXPECT_TRUE(tokens[4].sentence_start);
  EXPECT_TRUE(tokens[5].break_before);
  EXPECT_TRUE(tokens[1].upper_initial);
  EXPECT_FALSE(tokens[2].upper_initial);
}

TEST(Tokenize, CapitalisedElision) {
  const auto tokens = tokenize("L'attaquant D'Alema");
  ASSERT_EQ(tokens.size(), 3u);
  EXPECT_EQ(tokens[0].text, "L'");
  EXPECT_EQ(tokens[1].text, "attaquant");
  EXPECT_EQ(tokens[2].text, "D'Alema");
}

TEST(ParseTriggers, KindsAndErrors) {
  const auto t = parse_triggers("# comment\nen\ttitle\tleft\tPrime Minister\t\nen\tregex\tright\t[0-9]+-year-old\t1\n");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].tokens, (std::vector<std::string>{"prime", "minister"}));
  EXPECT_EQ(t[0].max_gap_tokens, 2);
  EXPECT_TRUE(t[1].regex);
  EXPECT_EQ(t[1].side, TriggerSide::right);
  EXPECT_EQ(t[1].max_gap_tokens, 1);
  EXPECT_THROW(parse_triggers("en\ttitle\tleft\n"), ConfigError);
  EXPECT_THROW(parse_triggers("en\tbogus\tleft\tx\t\n"), ConfigError);
  EXPECT_THROW(parse_triggers("en\tregex\tleft\t([\t\n"), ConfigError);
}

TEST(CompileKnownNames, FrequencyGate) {
  const auto m = matcher({{1, "Rafik Hariri", 5}, {2, "Xyz Qrs", 1}}, "en");
  EXPECT_TRUE(m.accepts("Rafik Hariri"));
  EXPECT_FALSE(m.accepts("Xyz Qrs"));
  EXPECT_TRUE(matcher({}, "en").empty());
}

TEST(CompileKnownNames, SloveneInflection) {
  const auto m = matcher({{7, "Tony Blair", 3}}, "sl");
  EXPECT_TRUE(m.accepts("Tonyju Blairju"));
  EXPECT_TRUE(m.accepts("Tony Blair"));
  EXPECT_FALSE(m.accepts("Tonyju Blairx"));
}

TEST(ScanKnown, EnglishLookup) {
  const auto m = matcher({{1, "Rafik Hariri", 5}}, "en");
  const auto found =
      scan_known(doc("en", "the death of former Prime Minister Rafik Hariri, blamed by many on Syria"), m);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].surface, "Rafik Hariri");
  EXPECT_EQ(found[0].method, RecognitionMethod::lookup);
  EXPECT_EQ(found[0].person_id, 1);
  EXPECT_TRUE(scan_known(doc("en", "Nothing to see here."), m).empty());
}

TEST(ScanKnown, SloveneInflectedLookupGivesBaseForm) {
  const auto m = matcher({{1, "Rafik Hariri", 5}}, "sl");
  const auto found = scan_known(doc("sl", "smrti nekdanjega libanonskega premiera Rafika Haririja."), m);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].surface, "Rafik Hariri");
  EXPECT_EQ(found[0].matched_text, "Rafika Haririja");
}

TEST(ScanKnown, RussianInflectedLookup) {
  const auto m = matcher({{4, "Рафик Харири", 2}}, "ru");
  const auto found = scan_known(doc("ru", "Убийство Рафика Харири потрясло Ливан."), m);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].person_id, 4);
}

TEST(GuessNew, ComponentWithTriggers) {
  const auto found = guess_new(doc("en", "He met the American doctor John Smith yesterday."), resources().at("en"));
  const auto* c = find(found, "John Smith");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->method, RecognitionMethod::component);
  EXPECT_TRUE(has_trigger(*c, "American"));
  EXPECT_TRUE(has_trigger(*c, "doctor"));
}

TEST(GuessNew, RightSideTrigger) {
  const auto found = guess_new(doc("en", "Phe is being helped by Wanthanee Rungruangspakul, a law lecturer at the university."),
                               resources().at("en"));
  const auto* c = find(found, "Wanthanee Rungruangspakul");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->method, RecognitionMethod::trigger_guess);
  EXPECT_TRUE(has_trigger(*c, "law lecturer"));
}

TEST(GuessNew, GermanFalsePositiveReproduces) {
  const auto found =
      guess_new(doc("de", "Die österreichische Eishockey Nationalmannschaft verlor gestern."), resources().at("de"));
  EXPECT_NE(find(found, "Eishockey Nationalmannschaft"), nullptr);
}

TEST(GuessNew, NoTriggerNoComponentNoCandidate) {
  const auto found = guess_new(doc("en", "Shares in Acme Widgets rose sharply."), resources().at("en"));
  EXPECT_TRUE(found.empty()) << ::testing::PrintToString(surfaces(found));
}

TEST(GuessNew, ParticlesAndElidedParticles) {
  const auto& fr = resources().at("fr");
  EXPECT_NE(find(guess_new(doc("fr", "Le ministre Dominique de Villepin a parlé."), fr), "Dominique de Villepin"),
            nullptr);
  EXPECT_NE(find(guess_new(doc("fr", "L'ancien président Valéry Giscard d'Estaing a défendu le traité."), fr),
                 "Valéry Giscard d'Estaing"),
            nullptr);
  EXPECT_NE(find(guess_new(doc("fr", "L'entraîneur lyonnais Paul Le Guen s'est félicité."), fr), "Paul Le Guen"),
            nullptr);
}

TEST(GuessNew, LeadingCapitalsTrimmedToFirstName) {
  const auto found = guess_new(doc("fr", "Le ministre de l'Intérieur Dominique de Villepin a salué les enquêteurs."),
                               resources().at("fr"));
  EXPECT_NE(find(found, "Dominique de Villepin"), nullptr) << ::testing::PrintToString(surfaces(found));
}

TEST(GuessNew, TitleWordAsSurname) {
  const auto found = guess_new(doc("en", "Governor Mervyn King said inflation was close to target."), resources().at("en"));
  EXPECT_NE(find(found, "Mervyn King"), nullptr) << ::testing::PrintToString(surfaces(found));
}

TEST(GuessNew, ArabicTwoWordsAfterTrigger) {
  const auto found =
      guess_new(doc("ar", "بعد شهر على اغتيال رئيس الوزراء السابق رفيق الحريري في بيروت"), resources().at("ar"));
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].surface, "رفيق الحريري");
  EXPECT_EQ(found[0].script, Script::arabic);
}

TEST(RecognizeDocument, LookupAbsorbsOverlappingGuess) {
  const auto m = matcher({{1, "Rafik Hariri", 5}}, "en");
  const auto found = recognize_document(doc("en", "the death of former Prime Minister Rafik Hariri, blamed"), m,
                                        resources().at("en"));
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].method, RecognitionMethod::lookup);
  EXPECT_TRUE(has_trigger(found[0], "Prime Minister"));
  EXPECT_TRUE(has_trigger(found[0], "former"));
}

TEST(RecognizeProperty, PathsAreIndependent) {
  const std::vector<std::string> bodies = {
      "the death of former Prime Minister Rafik Hariri, blamed", "Tony Blair met President Jacques Chirac in Paris.",
      "The American doctor John Smith said Rafik Hariri was a friend.", "No names here at all."};
  const auto m = matcher({{1, "Rafik Hariri", 5}, {2, "Tony Blair", 9}}, "en");
  LanguageResources bare;
  bare.language = "en";
  for (const auto& body : bodies) {
    const auto d = doc("en", body);
    // Lookups do not depend on triggers, guesses not on the matcher.
    EXPECT_EQ(surfaces(scan_known(d, m)), surfaces(scan_known(d, m)));
    EXPECT_EQ(surfaces(guess_new(d, resources().at("en"))), surfaces(guess_new(d, resources().at("en"))));
    const auto with = recognize_document(d, m, bare);
    EXPECT_EQ(surfaces(with), surfaces(scan_known(d, m))) << body;
    const auto without = recognize_document(d, matcher({}, "en"), resources().at("en"));
    EXPECT_EQ(surfaces(without), surfaces(guess_new(d, resources().at("en")))) << body;
  }
}

TEST(RecognizeProperty, GuessesHaveTwoTokensAndNoStopwordOnlyNames) {
  const auto docs = testing_support::slurp(testing_support::kFixtures / "ner" / "docs.jsonl");
  std::istringstream in(docs);
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const std::string lang = j["language"];
    const auto& res = resources().at(lang);
    for (const auto& c : guess_new(doc(lang, j["body"]), res)) {
      EXPECT_GE(c.token_end - c.token_begin, 2u) << c.surface;
      bool all_stop = true;
      for (const auto& t : tokenize(c.surface)) all_stop = all_stop && res.stopwords.count(t.lower) > 0;
      EXPECT_FALSE(all_stop) << c.surface;
    }
  }
}

TEST(AggregateClusterNames, OnePerSurface) {
  std::vector<NameCandidate> cands;
  const auto add = [&](std::string surface, std::string doc_id, std::vector<std::string> triggers) {
    NameCandidate c;
    c.surface = std::move(surface);
    c.doc_id = std::move(doc_id);
    c.cluster_id = "c1";
    c.triggers = std::move(triggers);
    c.language = "en";
    cands.push_back(c);
  };
  add("Rafik Hariri", "d2", {"former", "Prime Minister"});
  add("Rafiq Hariri", "d3", {"Prime Minister"});
  add("Rafik Hariri", "d3", {});
  const auto names = aggregate_cluster_names(cands, "c1");
  ASSERT_EQ(names.size(), 2u);
  EXPECT_EQ(names[0].surface, "Rafik Hariri");
  EXPECT_EQ(names[0].doc_ids, (std::vector<std::string>{"d2", "d3"}));
  EXPECT_EQ(names[0].trigger_counts.at("prime minister"), 1);
  EXPECT_EQ(names[1].surface, "Rafiq Hariri");
  EXPECT_TRUE(aggregate_cluster_names({}, "c1").empty());
  EXPECT_TRUE(aggregate_cluster_names(cands, "other").empty());
}

TEST(LoadLanguageResources, MissingTriggerFileIsConfigError) {
  EXPECT_THROW(load_language_resources("/nonexistent", {"en"}), ConfigError);
}
