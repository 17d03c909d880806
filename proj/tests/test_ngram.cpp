#include <gtest/gtest.h>

#include <random>

#include "onomast/ngram_match.hpp"
#include "support.hpp"

using namespace onomast;
namespace oracle = testing_support::oracle;

namespace {

IsrName latin(std::string s) { return {std::move(s), Script::latin, {}}; }

}  // namespace

TEST(NGramProfile, HandEnumeration) {
  const auto p = ngram_profile("kndlz rc", 2);
  const std::map<std::string, int> expected = {{"kn", 1}, {"nd", 1}, {"dl", 1}, {"lz", 1},
                                               {"z ", 1}, {" r", 1}, {"rc", 1}};
  EXPECT_EQ(p.counts, expected);
  EXPECT_EQ(p.total(), 7);
}

TEST(NGramProfile, ShortAndRepeated) {
  EXPECT_TRUE(ngram_profile("a", 2).empty());
  EXPECT_EQ(ngram_profile("aaa", 2).counts, (std::map<std::string, int>{{"aa", 2}}));
  EXPECT_EQ(ngram_profile("abcd", 3).total(), 2);
}

TEST(Cosine, Anchors) {
  EXPECT_DOUBLE_EQ(cosine(ngram_profile("kofi anan", 2), ngram_profile("kofi anan", 2)), 1.0);
  EXPECT_DOUBLE_EQ(cosine(ngram_profile("abcd", 2), ngram_profile("wxyz", 2)), 0.0);
  EXPECT_NEAR(cosine(ngram_profile("kndlz rc", 2), ngram_profile("kndlz rs", 2)), 6.0 / 7.0, 1e-15);
}

TEST(StripVowels, Examples) {
  EXPECT_EQ(strip_vowels("kondoleza rice"), "kndlz rc");
  EXPECT_EQ(strip_vowels("konduliza rais"), "kndlz rs");
  EXPECT_EQ(strip_vowels("bcd"), "bcd");
  EXPECT_EQ(strip_vowels("abu ali"), "b l");
}

TEST(NameSimilarity, ArabicModeUsesConsonantBigrams) {
  const auto ar = testing_support::transformer()->to_isr("كوندوليزا رايس", Script::arabic);
  const auto s = name_similarity(latin("kondoleza rice"), ar);
  EXPECT_EQ(s.mode, MatchMode::arabic);
  EXPECT_DOUBLE_EQ(s.combined, s.consonant_bigram);
  EXPECT_NEAR(s.combined, 6.0 / 7.0, 1e-12);
}

TEST(NameSimilarity, Identity) {
  const auto s = name_similarity(latin("vladimir ustinov"), latin("vladimir ustinov"));
  EXPECT_DOUBLE_EQ(s.combined, 1.0);
  EXPECT_EQ(s.mode, MatchMode::standard);
}

TEST(NameSimilarity, RafikRafiqFrozenOracle) {
  // Raw strings, before normalisation: values frozen from the brute-force oracle.
  const auto s = name_similarity(latin("rafik hariri"), latin("rafiq hariri"));
  EXPECT_NEAR(s.bigram, 0.8461538461538461, 1e-12);
  EXPECT_NEAR(s.trigram, 0.7, 1e-12);
  EXPECT_NEAR(s.consonant_bigram, 0.6666666666666666, 1e-12);
  EXPECT_NEAR(s.combined, 0.7376068376068375, 1e-12);
  // After normalisation the two spellings share one ISR.
  const auto& t = *testing_support::transformer();
  EXPECT_DOUBLE_EQ(name_similarity(t.to_isr("Rafik Hariri"), t.to_isr("Rafiq Hariri")).combined, 1.0);
}

TEST(NameSimilarity, SaidulaievFrozenOracle) {
  const auto s = name_similarity(latin("malik saidulaiev"), latin("malik saidulajev"));
  EXPECT_NEAR(s.combined, 0.8214040063235895, 1e-12);
}

namespace {

std::string random_isr(std::mt19937& rng) {
  // Small alphabet so that pairs actually share n-grams.
  static const std::string alphabet = "aeioubdklmnrsv ";
  std::string s;
  const int len = 1 + static_cast<int>(rng() % 16);
  for (int i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
  return canonical_whitespace(s);
}

}  // namespace

TEST(NameSimilarityProperty, MatchesBruteForceOracle) {
  std::mt19937 rng(20050530);
  for (int i = 0; i < 1000; ++i) {
    const std::string a = random_isr(rng);
    const std::string b = random_isr(rng);
    const bool arabic = i % 5 == 0;
    const IsrName ia{a, arabic ? Script::arabic : Script::latin, {}};
    const auto got = name_similarity(ia, latin(b));
    const auto want = oracle::similarity(a, b, arabic);
    ASSERT_NEAR(got.bigram, want.bigram, 1e-12) << a << " / " << b;
    ASSERT_NEAR(got.trigram, want.trigram, 1e-12) << a << " / " << b;
    ASSERT_NEAR(got.consonant_bigram, want.consonant_bigram, 1e-12) << a << " / " << b;
    ASSERT_NEAR(got.combined, want.combined, 1e-12) << a << " / " << b;
  }
}

TEST(NameSimilarityProperty, SymmetricReflexiveBounded) {
  std::mt19937 rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto a = latin(random_isr(rng));
    const auto b = latin(random_isr(rng));
    const double ab = name_similarity(a, b).combined;
    EXPECT_DOUBLE_EQ(ab, name_similarity(b, a).combined);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    if (a.text.size() >= 3 && strip_vowels(a.text).size() >= 2) {
      EXPECT_NEAR(name_similarity(a, a).combined, 1.0, 1e-12) << a.text;
    }
  }
}

TEST(NameSimilarityProperty, InvariantUnderConsistentRelabelling) {
  // Swapping two consonants in both names keeps every component score.
  std::mt19937 rng(3);
  const auto swap = [](std::string s) {
    for (char& c : s) c = c == 'k' ? 'm' : c == 'm' ? 'k' : c;
    return s;
  };
  for (int i = 0; i < 300; ++i) {
    const std::string a = random_isr(rng);
    const std::string b = random_isr(rng);
    const auto before = name_similarity(latin(a), latin(b));
    const auto after = name_similarity(latin(swap(a)), latin(swap(b)));
    EXPECT_DOUBLE_EQ(before.bigram, after.bigram);
    EXPECT_DOUBLE_EQ(before.trigram, after.trigram);
    EXPECT_DOUBLE_EQ(before.consonant_bigram, after.consonant_bigram);
  }
}

TEST(NameSimilarityProperty, SharedBigramGivesOpenInterval) {
  std::mt19937 rng(5);
  int checked = 0;
  for (int i = 0; i < 2000 && checked < 200; ++i) {
    const std::string a = random_isr(rng);
    const std::string b = random_isr(rng);
    if (a == b) continue;
    const auto s = name_similarity(latin(a), latin(b));
    if (s.bigram <= 0.0 || s.bigram >= 1.0) continue;
    ++checked;
    EXPECT_GT(s.combined, 0.0);
    EXPECT_LT(s.combined, 1.0);
  }
  EXPECT_EQ(checked, 200);
}
