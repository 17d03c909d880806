#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <thread>

#include "onomast/namestore.hpp"
#include "support.hpp"

using namespace onomast;
using testing_support::transformer;

namespace {

NameCandidate cand(std::string surface, std::optional<std::string> cluster = std::nullopt,
                   std::vector<std::string> triggers = {}, std::string lang = "en") {
  NameCandidate c;
  c.surface = std::move(surface);
  c.matched_text = c.surface;
  c.language = std::move(lang);
  c.cluster_id = std::move(cluster);
  c.triggers = std::move(triggers);
  c.doc_id = "doc";
  return c;
}

const IngestContext kDay{"2005-05-30", "title"};

SimilarityScore score(double combined) {
  SimilarityScore s;
  s.combined = combined;
  return s;
}

std::int64_t total_count(const StoreState& s) {
  std::int64_t n = 0;
  for (const auto& [id, p] : s.persons) n += p.total_count();
  return n;
}

void expect_unique_surfaces(const StoreState& s) {
  std::set<std::pair<std::string, Script>> seen;
  for (const auto& [id, p] : s.persons) {
    for (const auto& v : p.variants) EXPECT_TRUE(seen.insert({v.surface, v.script}).second) << v.surface;
  }
}

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("onomast-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::filesystem::path path_;
};

}  // namespace

// Independent statement of the disposition precedence.
Disposition reference_policy(double s, bool same_cluster) {
  if (same_cluster && s >= 0.70) return Disposition::auto_merged;
  if (s > 0.95) return Disposition::auto_merged;
  if (s >= 0.80 && s <= 0.95) return Disposition::queued;
  return Disposition::rejected_low;
}

TEST(MergePolicy, Examples) {
  EXPECT_EQ(merge_policy(score(0.72), true), Disposition::auto_merged);
  EXPECT_EQ(merge_policy(score(0.85), false), Disposition::queued);
  EXPECT_EQ(merge_policy(score(0.60), false), Disposition::rejected_low);
  EXPECT_EQ(merge_policy(score(0.95), false), Disposition::queued);
  EXPECT_EQ(merge_policy(score(0.9500001), false), Disposition::auto_merged);
  EXPECT_EQ(merge_policy(score(0.80), false), Disposition::queued);
  EXPECT_EQ(merge_policy(score(0.70), true), Disposition::auto_merged);
  EXPECT_EQ(merge_policy(score(0.6999), true), Disposition::rejected_low);
}

TEST(MergePolicy, GridAgainstReference) {
  int n = 0;
  for (int i = 0; i < 500; ++i) {
    const double s = i / 499.0;
    for (bool same : {false, true}) {
      EXPECT_EQ(merge_policy(score(s), same), reference_policy(s, same)) << s << " " << same;
      ++n;
    }
  }
  EXPECT_EQ(n, 1000);
}

TEST(MergePolicy, CrossScriptNeverAutoMergesInBand) {
  EXPECT_EQ(merge_policy(score(0.85), true, {}, true), Disposition::queued);
  EXPECT_EQ(merge_policy(score(0.72), true, {}, true), Disposition::queued);
  EXPECT_EQ(merge_policy(score(0.72), false, {}, true), Disposition::rejected_low);
  EXPECT_EQ(merge_policy(score(0.96), false, {}, true), Disposition::auto_merged);
}

TEST(MergePolicy, ThresholdMonotonicity) {
  std::mt19937 rng(9);
  std::vector<std::pair<double, bool>> points;
  for (int i = 0; i < 500; ++i) points.push_back({(rng() % 10001) / 10000.0, rng() % 2 == 0});
  const auto count = [&](const MergeThresholds& t, Disposition d) {
    int n = 0;
    for (const auto& [s, same] : points) n += merge_policy(score(s), same, t) == d;
    return n;
  };
  MergeThresholds base;
  MergeThresholds higher_auto = base;
  higher_auto.auto_merge = 0.98;
  MergeThresholds higher_low = base;
  higher_low.review_low = 0.88;
  EXPECT_LE(count(higher_auto, Disposition::auto_merged), count(base, Disposition::auto_merged));
  EXPECT_LE(count(higher_low, Disposition::queued), count(base, Disposition::queued));
}

TEST(IngestName, InClusterVariantAutoMerges) {
  NameStore store(transformer());
  const auto first = store.ingest_name(cand("Rafik Hariri", "c1"), kDay);
  const auto second = store.ingest_name(cand("Rafik al-Hariri", "c1"), kDay);
  EXPECT_EQ(second.outcome, IngestOutcome::auto_merged);
  EXPECT_EQ(second.person_id, first.person_id);
  EXPECT_GE(second.score->combined, 0.70);
  EXPECT_LT(second.score->combined, 0.80);
}

TEST(IngestName, SameIsrIsExact) {
  NameStore store(transformer());
  const auto a = store.ingest_name(cand("Rafik Hariri"), kDay);
  const auto b = store.ingest_name(cand("Rafiq Hariri"), kDay);
  EXPECT_EQ(b.outcome, IngestOutcome::exact);
  EXPECT_EQ(a.person_id, b.person_id);
  EXPECT_EQ(store.snapshot()->persons.at(*a.person_id).variants.size(), 2u);
}

TEST(IngestName, NearIdenticalAcrossClustersAutoMerges) {
  NameStore store(transformer());
  const auto a = store.ingest_name(cand("Nicolas Sarkozy", "c1"), kDay);
  const auto b = store.ingest_name(cand("Nikolas Sarkozy", "c2"), kDay);
  EXPECT_EQ(a.person_id, b.person_id);
  const auto c = store.ingest_name(cand("Abdullatif Sener", "c1"), kDay);
  const auto d = store.ingest_name(cand("Abdüllatif Sener", "c2"), kDay);
  EXPECT_EQ(c.person_id, d.person_id);
}

TEST(IngestName, ReviewBandQueues) {
  NameStore store(transformer());
  const auto a = store.ingest_name(cand("Pierre Gadonneix", "c1"), kDay);
  const auto b = store.ingest_name(cand("Pierre Gadonnaix", "c2", {"chief executive"}), kDay);
  EXPECT_EQ(b.outcome, IngestOutcome::queued);
  EXPECT_EQ(b.person_id, a.person_id);
  ASSERT_TRUE(b.candidate_id);
  const auto snap = store.snapshot();
  EXPECT_EQ(snap->persons.size(), 1u);
  const auto& mc = snap->candidates.at(*b.candidate_id);
  EXPECT_EQ(mc.disposition, Disposition::queued);
  EXPECT_FALSE(mc.same_cluster);
  EXPECT_GE(mc.score.combined, 0.80);
  EXPECT_LE(mc.score.combined, 0.95);

  // A second sighting while pending adds to the queued entry.
  const auto again = store.ingest_name(cand("Pierre Gadonnaix", "c3", {"chief executive"}), kDay);
  EXPECT_EQ(again.candidate_id, b.candidate_id);
  EXPECT_EQ(store.snapshot()->candidates.at(*b.candidate_id).occurrences, 2);
  EXPECT_EQ(store.snapshot()->candidates.at(*b.candidate_id).trigger_phrases.at("chief executive"), 2);
}

TEST(IngestName, SaadAlHarirScoresAboveAutoMergeThreshold) {
  NameStore store(transformer());
  const auto a = store.ingest_name(cand("Saad al-Hariri", "c1"), kDay);
  const auto b = store.ingest_name(cand("Saad al-Harir", "c2"), kDay);
  ASSERT_TRUE(b.score);
  EXPECT_GT(b.score->combined, 0.95);
  EXPECT_EQ(b.outcome, IngestOutcome::auto_merged);
  EXPECT_EQ(a.person_id, b.person_id);
}

TEST(IngestName, LowScoreCreatesPersonAndRecordsRejection) {
  NameStore store(transformer());
  store.ingest_name(cand("Tony Blair"), kDay);
  const auto b = store.ingest_name(cand("Angela Merkel"), kDay);
  EXPECT_EQ(b.outcome, IngestOutcome::new_person);
  ASSERT_TRUE(b.candidate_id);
  EXPECT_EQ(store.snapshot()->candidates.at(*b.candidate_id).disposition, Disposition::rejected_low);
  EXPECT_EQ(store.snapshot()->persons.size(), 2u);
}

TEST(IngestName, CrossScriptBandQueues) {
  NameStore store(transformer());
  store.ingest_name(cand("Rafik Hariri", "c1"), kDay);
  const auto r = store.ingest_name(cand("Рафик Харири", "c1", {}, "ru"), kDay);
  EXPECT_EQ(r.outcome, IngestOutcome::queued);
}

TEST(IngestName, TriggerPhrasesAccumulate) {
  NameStore store(transformer());
  const auto a = store.ingest_name(cand("Rafik Hariri", "c1", {"former", "Prime Minister"}), kDay);
  store.ingest_name(cand("Rafik Hariri", "c1", {"Prime Minister"}), kDay);
  const auto p = store.snapshot()->persons.at(*a.person_id);
  EXPECT_EQ(p.trigger_phrases().at("prime minister"), 2);
  EXPECT_EQ(p.total_count(), 2);
  const auto top = top_trigger_phrases(p, 1);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].first, "prime minister");
}

TEST(IngestName, TiedTargetsQueueInsteadOfAutoMerging) {
  NameStore store(transformer());
  store.ingest_name(cand("Rafik Hariri", "c1"), kDay);
  store.ingest_name(cand("Tony Blair", "c1"), kDay);
  // A second person now holds a variant with the same ISR.
  ASSERT_EQ(store.import_variants("Tony Blair\ten\tRafiq Hariri\n", "t").imported, 1u);
  const auto r = store.ingest_name(cand("Rafik al-Hariri", "c1"), kDay);
  EXPECT_EQ(r.outcome, IngestOutcome::queued);
}

TEST(ApplyReview, ConfirmMergesDenySplits) {
  NameStore store(transformer());
  const auto target = store.ingest_name(cand("Daniella Cicarelli", "c1"), kDay);
  const auto q = store.ingest_name(cand("Daniel Cicarelli", "c2"), kDay);
  ASSERT_EQ(q.outcome, IngestOutcome::queued);
  const auto ids = store.apply_review(*q.candidate_id, true, "ana", "2005-06-01T10:00:00Z");
  EXPECT_EQ(ids, std::vector<PersonId>{*target.person_id});
  const auto snap = store.snapshot();
  const auto& p = snap->persons.at(*target.person_id);
  EXPECT_NE(p.find_variant("Daniel Cicarelli", Script::latin), nullptr);
  EXPECT_NE(p.find_variant("Daniella Cicarelli", Script::latin), nullptr);
  const auto& mc = snap->candidates.at(*q.candidate_id);
  EXPECT_EQ(mc.disposition, Disposition::confirmed);
  EXPECT_EQ(mc.decided_by, DecidedBy::human);
  EXPECT_EQ(mc.reviewer, "ana");

  EXPECT_THROW(store.apply_review(*q.candidate_id, true, "ana", "t"), Conflict);
  EXPECT_THROW(store.apply_review(*q.candidate_id, false, "ana", "t"), Conflict);
  EXPECT_THROW(store.apply_review(9999, true, "ana", "t"), NotFound);
}

TEST(ApplyReview, DenyCreatesSecondPerson) {
  NameStore store(transformer());
  store.ingest_name(cand("Mariano Gonzalez", "c1"), kDay);
  const auto q = store.ingest_name(cand("Mariana Gonzalez", "c2"), kDay);
  ASSERT_EQ(q.outcome, IngestOutcome::queued);
  const auto ids = store.apply_review(*q.candidate_id, false, "ana", "t");
  EXPECT_EQ(ids.size(), 2u);
  EXPECT_EQ(store.snapshot()->persons.size(), 2u);
  EXPECT_EQ(store.snapshot()->candidates.at(*q.candidate_id).disposition, Disposition::denied);
  expect_unique_surfaces(*store.snapshot());
}

TEST(ApplyReview, ConfirmCarriesPendingOccurrences) {
  NameStore store(transformer());
  const auto t = store.ingest_name(cand("Pierre Gadonneix", "c1"), kDay);
  const auto q = store.ingest_name(cand("Pierre Gadonnaix", "c2"), kDay);
  store.ingest_name(cand("Pierre Gadonnaix", "c3"), kDay);
  store.apply_review(*q.candidate_id, true, "r", "t");
  const auto& p = store.snapshot()->persons.at(*t.person_id);
  EXPECT_EQ(p.find_variant("Pierre Gadonnaix", Script::latin)->count, 2);
  EXPECT_EQ(p.total_count(), 3);
}

TEST(SplitPerson, MovesSubsetAndConserves) {
  NameStore store(transformer());
  const auto a = store.ingest_name(cand("Mariano Gonzalez", "c1"), kDay);
  store.ingest_name(cand("Mariano Gonzalez", "c1"), kDay);
  const auto q = store.ingest_name(cand("Mariana Gonzalez", "c2"), kDay);
  store.apply_review(*q.candidate_id, true, "r", "t");
  const auto before = total_count(*store.snapshot());

  const PersonId fresh = store.split_person(*a.person_id, {"Mariana Gonzalez"}, "t");
  const auto snap = store.snapshot();
  EXPECT_NE(fresh, *a.person_id);
  EXPECT_EQ(snap->persons.at(fresh).variants.size(), 1u);
  EXPECT_EQ(snap->persons.at(fresh).canonical, "Mariana Gonzalez");
  EXPECT_EQ(snap->persons.at(*a.person_id).canonical, "Mariano Gonzalez");
  EXPECT_EQ(total_count(*snap), before);
  expect_unique_surfaces(*snap);
}

TEST(SplitPerson, InvalidSubsets) {
  NameStore store(transformer());
  const auto a = store.ingest_name(cand("Rafik Hariri"), kDay);
  store.ingest_name(cand("Rafiq Hariri"), kDay);
  EXPECT_THROW(store.split_person(*a.person_id, {}, "t"), std::invalid_argument);
  EXPECT_THROW(store.split_person(*a.person_id, {"Rafik Hariri", "Rafiq Hariri"}, "t"), std::invalid_argument);
  EXPECT_THROW(store.split_person(*a.person_id, {"Nobody"}, "t"), std::invalid_argument);
  EXPECT_THROW(store.split_person(777, {"Rafik Hariri"}, "t"), NotFound);
}

TEST(SplitPerson, RoundTripThroughReview) {
  NameStore store(transformer());
  const auto a = store.ingest_name(cand("Rafik Hariri", "c1"), kDay);
  store.ingest_name(cand("Rafiq Hariri", "c1"), kDay);
  store.ingest_name(cand("Rafik al-Hariri", "c1"), kDay);
  const auto variants = [](const PersonRecord& p) {
    std::set<std::string> out;
    for (const auto& v : p.variants) out.insert(v.surface);
    return out;
  };
  const auto original = variants(store.snapshot()->persons.at(*a.person_id));
  const auto before = total_count(*store.snapshot());

  const PersonId fresh = store.split_person(*a.person_id, {"Rafik al-Hariri"}, "t");
  const auto cid = store.write([&](StoreWriter& w) { return w.queue_person_merge(fresh, *a.person_id, "t"); });
  const auto ids = store.apply_review(cid, true, "r", "t");
  ASSERT_EQ(ids.size(), 1u);
  const auto snap = store.snapshot();
  EXPECT_EQ(snap->persons.size(), 1u);
  EXPECT_EQ(variants(snap->persons.at(ids[0])), original);
  EXPECT_EQ(total_count(*snap), before);
}

TEST(SplitPerson, CooccurrencesStaySymmetric) {
  NameStore store(transformer());
  const auto a = store.ingest_name(cand("Rafik Hariri"), kDay);
  store.ingest_name(cand("Rafiq Hariri"), kDay);
  const auto b = store.ingest_name(cand("Walid Jumblatt"), kDay);
  store.write([&](StoreWriter& w) {
    for (int i = 0; i < 4; ++i) w.record_cooccurrence({*a.person_id, *b.person_id});
  });
  const PersonId fresh = store.split_person(*a.person_id, {"Rafiq Hariri"}, "t");
  const auto snap = store.snapshot();
  for (const auto& [id, p] : snap->persons) {
    for (const auto& [other, n] : p.cooccurrences) EXPECT_EQ(snap->persons.at(other).cooccurrences.at(id), n);
  }
  const auto& jumblatt = snap->persons.at(*b.person_id).cooccurrences;
  EXPECT_EQ(jumblatt.at(*a.person_id) + jumblatt.at(fresh), 4);
}

TEST(ImportVariants, AddsByCanonical) {
  NameStore store(transformer());
  const auto a = store.ingest_name(cand("Rafik Hariri"), kDay);
  const auto rep = store.import_variants(
      "Rafik Hariri\tja\tラフィーク・ハリリー\nRafik Hariri\tar\tرفيق الحريري\nNobody Here\tfr\tPersonne\nbroken\n", "t");
  EXPECT_EQ(rep.imported, 2u);
  ASSERT_EQ(rep.unmatched.size(), 1u);
  EXPECT_NE(rep.unmatched[0].find("Nobody Here"), std::string::npos);
  EXPECT_EQ(rep.diagnostics.size(), 1u);
  const auto& p = store.snapshot()->persons.at(*a.person_id);
  ASSERT_NE(p.find_variant("ラフィーク・ハリリー", Script::other), nullptr);
  EXPECT_EQ(p.find_variant("رفيق الحريري", Script::arabic)->isr, "rfik al-hriri");
  EXPECT_EQ(p.total_count(), 1);

  const auto again = store.import_variants("Rafik Hariri\tja\tラフィーク・ハリリー\n", "t");
  EXPECT_EQ(again.imported, 0u);
  EXPECT_EQ(store.snapshot()->persons.at(*a.person_id).variants.size(), 3u);
}

TEST(KnownNames, CarryPersonTotals) {
  NameStore store(transformer());
  store.ingest_name(cand("Rafik Hariri"), kDay);
  store.ingest_name(cand("Rafiq Hariri"), kDay);
  store.ingest_name(cand("Xyz Qrs"), kDay);
  std::map<std::string, std::int64_t> got;
  for (const auto& k : store.known_names()) got[k.surface] = k.person_count;
  EXPECT_EQ(got.at("Rafik Hariri"), 2);
  EXPECT_EQ(got.at("Rafiq Hariri"), 2);
  EXPECT_EQ(got.at("Xyz Qrs"), 1);
}

TEST(Transactions, ExceptionRollsBack) {
  NameStore store(transformer());
  store.ingest_name(cand("Tony Blair"), kDay);
  const auto before = export_store(*store.snapshot());
  EXPECT_THROW(store.write([](StoreWriter& w) {
    w.ingest_name(cand("Jacques Chirac"), kDay);
    throw std::runtime_error("boom");
  }),
               std::runtime_error);
  EXPECT_EQ(export_store(*store.snapshot()), before);
}

TEST(Transactions, FailedCommitLeavesFilesAndSnapshot) {
  TempDir dir;
  const auto path = dir.path() / "store.json";
  {
    NameStore store(transformer(), path);
    store.ingest_name(cand("Tony Blair"), kDay);
    const auto file_before = testing_support::slurp(path);
    const auto audit_before = testing_support::slurp(store.audit_path());
    const auto snap_before = export_store(*store.snapshot());

    store.fail_next_commit();
    EXPECT_THROW(store.ingest_name(cand("Jacques Chirac"), kDay), StorageError);
    EXPECT_EQ(testing_support::slurp(path), file_before);
    EXPECT_EQ(testing_support::slurp(store.audit_path()), audit_before);
    EXPECT_EQ(export_store(*store.snapshot()), snap_before);

    // The candidate is retriable.
    EXPECT_EQ(store.ingest_name(cand("Jacques Chirac"), kDay).outcome, IngestOutcome::new_person);
  }
  NameStore reopened(transformer(), path);
  EXPECT_EQ(reopened.snapshot()->persons.size(), 2u);
}

TEST(Persistence, ReloadReproducesStateAndAudit) {
  TempDir dir;
  const auto path = dir.path() / "store.json";
  nlohmann::json saved;
  {
    NameStore store(transformer(), path);
    store.ingest_name(cand("Pierre Gadonneix", "c1", {"chief executive"}), kDay);
    const auto q = store.ingest_name(cand("Pierre Gadonnaix", "c2"), kDay);
    store.apply_review(*q.candidate_id, true, "ana", "2005-06-01T10:00:00Z");
    saved = state_json(*store.snapshot());
  }
  NameStore reopened(transformer(), path);
  EXPECT_EQ(state_json(*reopened.snapshot()), saved);
  EXPECT_EQ(state_from_json(saved).next_person_id, reopened.snapshot()->next_person_id);

  std::ifstream audit(reopened.audit_path());
  std::string line;
  std::vector<nlohmann::json> entries;
  while (std::getline(audit, line)) entries.push_back(nlohmann::json::parse(line));
  ASSERT_FALSE(entries.empty());
  EXPECT_EQ(entries.back()["op"], "review");
  EXPECT_EQ(entries.back()["reviewer"], "ana");
  EXPECT_EQ(entries.back()["confirm"], true);
}

TEST(Persistence, StoredIsrReproducible) {
  NameStore store(transformer());
  for (const char* s : {"Rafik Hariri", "Рафик Харири", "Κόφι Ανάν", "رفيق الحريري", "Malik Saïdoullaïev"}) {
    store.ingest_name(cand(s), kDay);
  }
  for (const auto& [id, p] : store.snapshot()->persons) {
    for (const auto& v : p.variants) EXPECT_EQ(transformer()->to_isr(v.surface, v.script).text, v.isr);
  }
}

TEST(Persistence, CorruptStateIsStorageError) {
  TempDir dir;
  const auto path = dir.path() / "store.json";
  std::ofstream(path) << "{not json";
  EXPECT_THROW(NameStore(transformer(), path), StorageError);
}

TEST(Determinism, ReplayIntoFreshStore) {
  const std::vector<NameCandidate> stream = {
      cand("Rafik Hariri", "c1"),     cand("Rafiq Hariri", "c1"),     cand("Rafik al-Hariri", "c1"),
      cand("Pierre Gadonneix", "c2"), cand("Pierre Gadonnaix", "c3"), cand("Рафик Харири", "c1", {}, "ru"),
      cand("Tony Blair", "c4"),       cand("Nikolas Sarkozy", "c5"),  cand("Nicolas Sarkozy", "c6")};
  const auto run = [&] {
    NameStore store(transformer());
    for (const auto& c : stream) store.ingest_name(c, kDay);
    return state_json(*store.snapshot());
  };
  EXPECT_EQ(run().dump(), run().dump());
}

TEST(Concurrency, ReadersSeeWholeTransactions) {
  NameStore store(transformer());
  std::atomic<bool> done{false};
  std::atomic<int> bad{0};
  std::vector<std::thread> readers;
  for (int r = 0; r < 4; ++r) {
    readers.emplace_back([&] {
      while (!done.load()) {
        const auto snap = store.snapshot();
        // Each transaction adds two occurrences at once.
        if (total_count(*snap) % 2 != 0) ++bad;
        std::this_thread::yield();
      }
    });
  }
  for (int i = 0; i < 40; ++i) {
    store.write([&](StoreWriter& w) {
      w.ingest_name(cand("Tony Blair"), kDay);
      w.ingest_name(cand(i % 2 ? "Tony Blair" : "Jacques Chirac"), kDay);
    });
  }
  done = true;
  for (auto& t : readers) t.join();
  EXPECT_EQ(bad.load(), 0);
}
