#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "onomast/ngram_match.hpp"
#include "onomast/recognize.hpp"
#include "onomast/transform.hpp"

namespace onomast {

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class Conflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Disposition { auto_merged, queued, rejected_low, confirmed, denied };
enum class DecidedBy { policy, human };
std::string_view to_string(Disposition d);
std::string_view to_string(DecidedBy d);
Disposition disposition_from_string(std::string_view s);

struct MergeThresholds {
  double in_cluster_merge = 0.70;
  double auto_merge = 0.95;
  double review_low = 0.80;
};

/// Same-script pairs: in-cluster >= in_cluster_merge, then > auto_merge,
/// then [review_low, auto_merge] queued, else rejected. Cross-script pairs
/// only auto-merge above auto_merge; the in-cluster rule queues them.
Disposition merge_policy(const SimilarityScore& score, bool same_cluster, const MergeThresholds& t = {},
                         bool cross_script = false);

struct Variant {
  std::string surface;
  std::string language;
  Script script = Script::latin;
  std::string isr;
  std::int64_t count = 0;
  std::string first_seen;
  std::string last_seen;
  std::map<std::string, std::int64_t> trigger_phrases;  // provenance for splits
};

struct PersonRecord {
  PersonId id = 0;
  std::string canonical;
  std::vector<Variant> variants;
  std::map<PersonId, std::int64_t> cooccurrences;
  std::set<std::string> clusters;  // cluster ids the person was recognised in

  std::int64_t total_count() const;
  std::map<std::string, std::int64_t> trigger_phrases() const;
  const Variant* find_variant(std::string_view surface, Script script) const;
};

struct MergeCandidate {
  std::int64_t id = 0;
  std::string new_surface;
  std::string new_isr;
  std::string language;
  Script script = Script::latin;
  PersonId target_person_id = 0;
  std::optional<PersonId> source_person_id;  // set for whole-person merge proposals
  SimilarityScore score;
  bool same_cluster = false;
  Disposition disposition = Disposition::queued;
  DecidedBy decided_by = DecidedBy::policy;
  std::string created_at;
  std::string decided_at;
  std::string reviewer;
  std::optional<PersonId> result_person_id;

  // Context shown to reviewers; pending occurrences of a queued surface.
  std::string doc_id;
  std::string doc_title;
  std::optional<std::string> cluster_id;
  std::map<std::string, std::int64_t> trigger_phrases;
  std::int64_t occurrences = 1;
};

struct StoreState {
  std::map<PersonId, PersonRecord> persons;
  std::map<std::int64_t, MergeCandidate> candidates;
  PersonId next_person_id = 1;
  std::int64_t next_candidate_id = 1;
};

enum class IngestOutcome { exact, auto_merged, queued, new_person, skipped };
std::string_view to_string(IngestOutcome o);

struct IngestResult {
  IngestOutcome outcome = IngestOutcome::skipped;
  std::optional<PersonId> person_id;
  std::optional<std::int64_t> candidate_id;
  std::optional<SimilarityScore> score;
};

struct IngestContext {
  std::string date;  // ISO date used for first/last seen and timestamps
  std::string doc_title;
};

struct ImportReport {
  std::size_t imported = 0;
  std::vector<std::string> unmatched;    // "line N: canonical"
  std::vector<std::string> diagnostics;  // malformed or conflicting lines
};

/// Mutations applied inside NameStore::write. Operates on a private draft
/// that becomes visible only when the whole transaction succeeds.
class StoreWriter {
 public:
  StoreWriter(StoreState& draft, const Transformer& transformer, const MergeThresholds& thresholds,
              std::vector<nlohmann::json>& audit)
      : s_(draft), transformer_(transformer), thresholds_(thresholds), audit_(audit) {}

  IngestResult ingest_name(const NameCandidate& cand, const IngestContext& ctx);
  /// Confirms or denies a queued candidate. Throws NotFound or Conflict.
  std::vector<PersonId> apply_review(std::int64_t candidate_id, bool confirm, const std::string& reviewer,
                                     const std::string& now);
  /// Moves the named variants to a fresh person. Throws NotFound, or
  /// std::invalid_argument when the subset is empty, unknown or complete.
  PersonId split_person(PersonId id, const std::vector<std::string>& surfaces, const std::string& now);
  /// Queues a whole-person merge for review; confirming keeps the lower id.
  std::int64_t queue_person_merge(PersonId source, PersonId target, const std::string& now);
  ImportReport import_variants(std::string_view tsv, const std::string& now);
  /// Counts one co-occurrence for every unordered pair of distinct persons.
  void record_cooccurrence(const std::vector<PersonId>& persons);

 private:
  PersonRecord& person(PersonId id);
  PersonId new_person(Variant v, const std::optional<std::string>& cluster_id);
  void add_occurrence(PersonRecord& p, const NameCandidate& cand, const std::string& isr, const IngestContext& ctx,
                      std::int64_t times);
  void merge_persons(PersonId keep, PersonId drop);
  void audit(nlohmann::json entry);

  StoreState& s_;
  const Transformer& transformer_;
  const MergeThresholds& thresholds_;
  std::vector<nlohmann::json>& audit_;
};

/// Single-writer, multi-reader person store. Readers take immutable
/// snapshots; writers run transactions against a copy that is persisted
/// (state file written atomically, then the audit log appended) before it
/// replaces the published snapshot. A failed transaction leaves both the
/// snapshot and the files untouched.
class NameStore {
 public:
  using Snapshot = std::shared_ptr<const StoreState>;

  /// In-memory store.
  NameStore(std::shared_ptr<const Transformer> transformer, MergeThresholds thresholds = {});
  /// File-backed store; loads `path` if it exists. The audit log lives next
  /// to it as `<path>.audit.jsonl`. Throws StorageError on unreadable state.
  NameStore(std::shared_ptr<const Transformer> transformer, std::filesystem::path path,
            MergeThresholds thresholds = {});

  Snapshot snapshot() const;

  /// Runs `fn` as one transaction. Exceptions from `fn` or from persisting
  /// roll the whole transaction back and propagate.
  template <typename Fn>
  auto write(Fn&& fn) {
    std::lock_guard<std::mutex> writer(write_mutex_);
    auto draft = std::make_shared<StoreState>(*snapshot());
    std::vector<nlohmann::json> audit;
    StoreWriter w(*draft, *transformer_, thresholds_, audit);
    if constexpr (std::is_void_v<decltype(fn(w))>) {
      fn(w);
      commit(std::move(draft), audit);
    } else {
      auto result = fn(w);
      commit(std::move(draft), audit);
      return result;
    }
  }

  IngestResult ingest_name(const NameCandidate& cand, const IngestContext& ctx);
  std::vector<PersonId> apply_review(std::int64_t candidate_id, bool confirm, const std::string& reviewer,
                                     const std::string& now);
  PersonId split_person(PersonId id, const std::vector<std::string>& surfaces, const std::string& now);
  ImportReport import_variants(std::string_view tsv, const std::string& now);

  /// Every variant of every person with the person's summed count.
  std::vector<KnownName> known_names() const;

  const Transformer& transformer() const { return *transformer_; }
  const MergeThresholds& thresholds() const { return thresholds_; }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path audit_path() const;

  /// Test hook: makes the next commit fail before anything is written.
  void fail_next_commit() { fail_next_commit_ = true; }

 private:
  void commit(std::shared_ptr<StoreState> draft, const std::vector<nlohmann::json>& audit);

  std::shared_ptr<const Transformer> transformer_;
  MergeThresholds thresholds_;
  std::filesystem::path path_;

  mutable std::mutex snapshot_mutex_;
  Snapshot current_;
  std::mutex write_mutex_;
  std::int64_t audit_seq_ = 0;
  bool fail_next_commit_ = false;
};

// Serialisation.
nlohmann::json to_json(const SimilarityScore& s);
nlohmann::json variant_json(const Variant& v);
/// Export form: {id, canonical, variants[], trigger_phrases{}, cooccurrences{}}.
nlohmann::json export_person(const PersonRecord& p);
/// All persons ordered by id.
nlohmann::json export_store(const StoreState& s);
nlohmann::json candidate_json(const MergeCandidate& c);
nlohmann::json state_json(const StoreState& s);
StoreState state_from_json(const nlohmann::json& j);

/// Top `k` trigger phrases by count, ties by phrase.
std::vector<std::pair<std::string, std::int64_t>> top_trigger_phrases(const PersonRecord& p, std::size_t k);

/// Queued candidates ordered by combined score descending, then id.
std::vector<const MergeCandidate*> queued_candidates(const StoreState& s);

}  // namespace onomast
