#pragma once

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "onomast/cluster.hpp"
#include "onomast/morpho.hpp"
#include "onomast/namestore.hpp"
#include "onomast/recognize.hpp"
#include "onomast/transform.hpp"

namespace onomast {

struct Thresholds {
  double topic_min_sim = 0.5;
  double in_cluster_merge = 0.70;
  double auto_merge = 0.95;
  double review_low = 0.80;
  double retrieval_min = 0.50;

  MergeThresholds merge() const { return {in_cluster_merge, auto_merge, review_low}; }
};

struct RunConfig {
  std::vector<std::string> languages;
  std::string date;

  std::filesystem::path rules_dir;      // *.rules, *.translit, *.exceptions
  std::filesystem::path morpho_dir;     // declension.tsv, stem_exceptions.tsv
  std::filesystem::path resources_dir;  // triggers/, stopwords/, lexicon/
  std::filesystem::path reffreq_dir;    // <language>.tsv, countries.tsv
  std::filesystem::path store_path;
  std::filesystem::path staging_path;   // documents accepted by `ingest`
  std::filesystem::path report_path;    // run-day report (JSON)
  std::filesystem::path cluster_report_path;  // topics (JSON lines)

  Thresholds thresholds;
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::filesystem::path ui_dir;  // optional static assets for `serve`

  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
};

/// `key = value` lines, `#` comments, optional `[section]` headers that
/// prefix keys (`[thresholds]` + `auto_merge` = `thresholds.auto_merge`).
/// Values may be quoted; lists are `["en", "fr"]` or comma separated.
/// Relative paths resolve against `base_dir`. Unknown keys and malformed
/// values throw std::invalid_argument.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
/// Throws ConfigError when the file cannot be read.
RunConfig load_config(const std::filesystem::path& path);

struct DocumentLoad {
  std::vector<Document> documents;
  std::vector<std::string> rejected;  // "line N: reason"
};

/// Document JSONL. Records need string `id`, `language` and `body`; `date`,
/// `title` and `source` are optional strings and `countries` a list of
/// [code, count] pairs. Duplicate ids are rejected.
DocumentLoad parse_documents(std::istream& in);
DocumentLoad load_documents(const std::filesystem::path& path);
nlohmann::json document_json(const Document& d);

/// Everything a run needs, loaded up front so a missing file fails the run
/// before any document is touched.
struct Resources {
  std::shared_ptr<const Transformer> transformer;
  Morphology morphology;
  std::map<std::string, LanguageResources> languages;
  std::map<std::string, FrequencyList> reference;  // per language
  FrequencyList countries;

  /// Throws ConfigError for any missing or malformed resource.
  static Resources load(const RunConfig& config);
};

struct IngestSummary {
  std::size_t staged = 0;
  std::size_t duplicates = 0;
  std::vector<std::string> rejected;
};

/// Validates `input` and appends the new documents to the staging file.
IngestSummary cmd_ingest(const std::filesystem::path& input, const RunConfig& config);

/// Clusters, recognises and stores the names of one day's staged
/// documents. Languages are processed in parallel; all store writes happen
/// afterwards in one transaction, in language order.
nlohmann::json run_day(const std::vector<Document>& documents, const RunConfig& config, const Resources& resources,
                       NameStore& store);
/// run_day over the staged documents of `config.date`, writing the reports.
nlohmann::json cmd_run_day(const RunConfig& config);

/// F = 2PR / (P + R); 0 when both are 0.
double f_measure(double precision, double recall);

struct NerScore {
  std::size_t documents = 0;
  std::size_t system = 0;
  std::size_t gold = 0;
  std::size_t correct = 0;
  std::size_t trigger_gold = 0;
  std::size_t trigger_correct = 0;

  double precision() const;
  double recall() const;
  double f() const { return f_measure(precision(), recall()); }
  double trigger_recall() const;
};

struct NerEvaluation {
  std::map<std::string, NerScore> by_language;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f = 0.0;
  std::vector<std::string> false_positives;  // "doc: surface"
  std::vector<std::string> misses;

  nlohmann::json to_json() const;
  std::string table() const;
};

/// Gold JSONL: {"id", "persons": [...], "trigger_adjacent": [...]}. The
/// optional `trigger_adjacent` list names the gold persons that stand next
/// to a bundled trigger. Matching is per document, by surface presence.
/// Throws std::invalid_argument for an empty gold set.
NerEvaluation evaluate_ner(const std::vector<Document>& documents, std::istream& gold, const Resources& resources,
                           const std::vector<KnownName>& known);
NerEvaluation cmd_eval_ner(const std::filesystem::path& documents, const std::filesystem::path& gold,
                           const RunConfig& config);

struct TranslitCase {
  std::string surface;
  std::string gold;  // canonical form of the expected person
};

struct TranslitResult {
  std::string surface;
  std::string isr;
  std::string gold;
  std::optional<PersonId> best_person;
  std::string best_canonical;
  double best_score = 0.0;
  bool correct = false;
  std::string failure;  // "no-candidate", "below-threshold", "wrong-person"
};

struct TranslitEvaluation {
  std::vector<TranslitResult> results;
  std::size_t correct() const;
  double accuracy() const;
  nlohmann::json to_json() const;
};

/// TSV `surface<TAB>gold canonical`.
std::vector<TranslitCase> parse_translit_cases(std::istream& in);
TranslitEvaluation evaluate_translit(const std::vector<TranslitCase>& cases, const StoreState& store,
                                     const Transformer& transformer, double min_score);
TranslitEvaluation cmd_eval_translit(const std::filesystem::path& cases, const RunConfig& config);

/// Serves the review API until `stop` becomes true. Returns false when the
/// address cannot be bound.
bool cmd_serve(const RunConfig& config, const std::atomic<bool>& stop);

/// Reference frequencies of the words in `documents` of one language.
FrequencyList build_reference(const std::vector<Document>& documents, const std::string& language,
                              const std::set<std::string, std::less<>>& stopwords);
/// Reference frequencies of the country tags in `documents`.
FrequencyList build_country_reference(const std::vector<Document>& documents);
void write_frequency_list(const FrequencyList& list, std::ostream& out);

}  // namespace onomast
