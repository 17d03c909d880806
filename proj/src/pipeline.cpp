#include "onomast/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <future>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "onomast/review_api.hpp"

namespace onomast {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

std::vector<std::string> parse_list(std::string v) {
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw std::invalid_argument("unterminated list '" + v + "'");
    v = v.substr(1, v.size() - 2);
  }
  std::vector<std::string> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = unquote(trim(item));
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(key + ": '" + v + "' is not a number");
}

fs::path resolve(const fs::path& base, const std::string& v) {
  const fs::path p(v);
  return p.is_relative() && !base.empty() ? base / p : p;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::set<std::string> string_set(const json& j, const char* key) {
  std::set<std::string> out;
  if (!j.contains(key)) return out;
  for (const auto& s : j.at(key)) out.insert(canonical_whitespace(s.get<std::string>()));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void RunConfig::validate() const {
  const auto& t = thresholds;
  if (languages.empty()) throw std::invalid_argument("languages: at least one language is required");
  if (!(t.review_low >= 0.0 && t.review_low <= t.auto_merge && t.auto_merge <= 1.0)) {
    throw std::invalid_argument("thresholds: need 0 <= review_low <= auto_merge <= 1");
  }
  if (!(t.topic_min_sim > 0.0 && t.topic_min_sim <= 1.0)) {
    throw std::invalid_argument("thresholds.topic_min_sim must lie in (0, 1]");
  }
  if (!(t.in_cluster_merge >= 0.0 && t.in_cluster_merge <= 1.0)) {
    throw std::invalid_argument("thresholds.in_cluster_merge must lie in [0, 1]");
  }
  if (!(t.retrieval_min >= 0.0 && t.retrieval_min <= 1.0)) {
    throw std::invalid_argument("thresholds.retrieval_min must lie in [0, 1]");
  }
  if (listen_port <= 0 || listen_port > 65535) throw std::invalid_argument("listen_port out of range");
}

RunConfig parse_config(std::string_view text, const fs::path& base_dir) {
  RunConfig c;
  std::optional<fs::path> data_dir;
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(where + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    const std::string raw = trim(line.substr(eq + 1));
    const std::string value = unquote(raw);

    if (key == "languages") {
      c.languages = parse_list(raw);
    } else if (key == "date") {
      c.date = value;
    } else if (key == "data_dir") {
      data_dir = resolve(base_dir, value);
    } else if (key == "rules_dir") {
      c.rules_dir = resolve(base_dir, value);
    } else if (key == "morpho_dir") {
      c.morpho_dir = resolve(base_dir, value);
    } else if (key == "resources_dir") {
      c.resources_dir = resolve(base_dir, value);
    } else if (key == "reffreq_dir") {
      c.reffreq_dir = resolve(base_dir, value);
    } else if (key == "store") {
      c.store_path = resolve(base_dir, value);
    } else if (key == "staging") {
      c.staging_path = resolve(base_dir, value);
    } else if (key == "report") {
      c.report_path = resolve(base_dir, value);
    } else if (key == "cluster_report") {
      c.cluster_report_path = resolve(base_dir, value);
    } else if (key == "ui_dir") {
      c.ui_dir = resolve(base_dir, value);
    } else if (key == "listen_host") {
      c.listen_host = value;
    } else if (key == "listen_port") {
      c.listen_port = static_cast<int>(parse_double(key, value));
    } else if (key == "thresholds.topic_min_sim") {
      c.thresholds.topic_min_sim = parse_double(key, value);
    } else if (key == "thresholds.in_cluster_merge") {
      c.thresholds.in_cluster_merge = parse_double(key, value);
    } else if (key == "thresholds.auto_merge") {
      c.thresholds.auto_merge = parse_double(key, value);
    } else if (key == "thresholds.review_low") {
      c.thresholds.review_low = parse_double(key, value);
    } else if (key == "thresholds.retrieval_min") {
      c.thresholds.retrieval_min = parse_double(key, value);
    } else {
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
  }
  if (data_dir) {
    if (c.rules_dir.empty()) c.rules_dir = *data_dir / "rules";
    if (c.morpho_dir.empty()) c.morpho_dir = *data_dir / "morpho";
    if (c.resources_dir.empty()) c.resources_dir = *data_dir;
    if (c.reffreq_dir.empty()) c.reffreq_dir = *data_dir / "reffreq";
  }
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  return parse_config(read_text(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Documents

DocumentLoad parse_documents(std::istream& in) {
  DocumentLoad out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      out.rejected.push_back(where + "not a JSON object");
      continue;
    }
    const auto text_field = [&](const char* key, bool required, std::string& dst) {
      if (!j.contains(key) || j[key].is_null()) {
        if (required) throw std::invalid_argument(std::string("missing ") + key);
        return;
      }
      if (!j[key].is_string()) throw std::invalid_argument(std::string(key) + " is not a string");
      dst = j[key].get<std::string>();
      if (required && trim(dst).empty()) throw std::invalid_argument(std::string("empty ") + key);
    };
    Document d;
    try {
      text_field("id", true, d.id);
      text_field("language", true, d.language);
      text_field("body", true, d.body);
      text_field("date", false, d.date);
      text_field("title", false, d.title);
      text_field("source", false, d.source);
      if (j.contains("countries") && !j["countries"].is_null()) {
        if (!j["countries"].is_array()) throw std::invalid_argument("countries is not a list");
        for (const auto& pair : j["countries"]) {
          if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_number_integer()) {
            throw std::invalid_argument("countries entries must be [code, count]");
          }
          d.country_tags.emplace_back(pair[0].get<std::string>(), pair[1].get<int>());
        }
      }
    } catch (const std::invalid_argument& e) {
      out.rejected.push_back(where + e.what());
      continue;
    }
    if (!ids.insert(d.id).second) {
      out.rejected.push_back(where + "duplicate id '" + d.id + "'");
      continue;
    }
    out.documents.push_back(std::move(d));
  }
  return out;
}

DocumentLoad load_documents(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read documents from " + path.string());
  return parse_documents(in);
}

json document_json(const Document& d) {
  json countries = json::array();
  for (const auto& [code, n] : d.country_tags) countries.push_back({code, n});
  return {{"id", d.id},       {"language", d.language}, {"date", d.date},          {"title", d.title},
          {"body", d.body},   {"source", d.source},     {"countries", countries}};
}

Resources Resources::load(const RunConfig& config) {
  Resources r;
  if (config.rules_dir.empty()) throw ConfigError("rules_dir is not configured");
  if (config.resources_dir.empty()) throw ConfigError("resources_dir is not configured");
  if (config.reffreq_dir.empty()) throw ConfigError("reffreq_dir is not configured");
  r.transformer = std::make_shared<const Transformer>(Transformer::load_directory(config.rules_dir));
  if (!config.morpho_dir.empty()) {
    const fs::path exceptions = config.morpho_dir / "stem_exceptions.tsv";
    r.morphology = Morphology::load(config.morpho_dir / "declension.tsv",
                                    fs::exists(exceptions) ? exceptions : fs::path{});
  }
  r.languages = load_language_resources(config.resources_dir, config.languages);
  for (const auto& lang : config.languages) {
    r.reference.emplace(lang, FrequencyList::load(config.reffreq_dir / (lang + ".tsv")));
  }
  r.countries = FrequencyList::load(config.reffreq_dir / "countries.tsv");
  return r;
}

IngestSummary cmd_ingest(const fs::path& input, const RunConfig& config) {
  if (config.staging_path.empty()) throw ConfigError("staging is not configured");
  const DocumentLoad load = load_documents(input);
  IngestSummary summary;
  summary.rejected = load.rejected;

  std::set<std::string> staged_ids;
  if (fs::exists(config.staging_path)) {
    for (const auto& d : load_documents(config.staging_path).documents) staged_ids.insert(d.id);
  }
  std::ofstream out(config.staging_path, std::ios::binary | std::ios::app);
  if (!out) throw ConfigError("cannot write " + config.staging_path.string());
  for (const auto& d : load.documents) {
    if (!staged_ids.insert(d.id).second) {
      ++summary.duplicates;
      continue;
    }
    out << document_json(d).dump() << '\n';
    ++summary.staged;
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Daily run

namespace {

struct LanguageRun {
  std::string language;
  std::vector<json> topics;
  std::vector<NameCandidate> candidates;  // in ingestion order
  std::map<std::string, std::string> doc_titles;
  json cluster_names = json::array();
  std::vector<std::string> diagnostics;
  std::size_t documents = 0;
};

LanguageRun process_language(const std::string& lang, std::vector<const Document*> docs, const RunConfig& config,
                             const Resources& res, const std::vector<KnownName>& known) {
  LanguageRun run;
  run.language = lang;
  run.documents = docs.size();
  std::sort(docs.begin(), docs.end(), [](const Document* a, const Document* b) { return a->id < b->id; });
  const LanguageResources& lr = res.languages.at(lang);
  Diagnostics diag;

  std::vector<DocumentVector> vectors;
  for (const Document* d : docs) {
    run.doc_titles[d->id] = d->title;
    DocumentVector v{d->id, keyness(count_terms(d->title + "\n" + d->body, lr.stopwords), res.reference.at(lang))};
    vectors.push_back(enrich_countries(std::move(v), d->country_tags, res.countries, &diag));
  }

  std::map<std::string, std::string> cluster_of;
  std::vector<std::string> cluster_order;
  const bool any_terms = std::any_of(vectors.begin(), vectors.end(), [](const auto& v) { return !v.weights.empty(); });
  if (any_terms) {
    const Dendrogram tree = build_dendrogram(vectors, &diag);
    const auto topics = detect_topics(tree, config.thresholds.topic_min_sim);
    for (std::size_t i = 0; i < topics.size(); ++i) {
      const auto& node = tree.nodes[topics[i].node];
      const std::string id = config.date + "/" + lang + "/" + std::to_string(i + 1);
      cluster_order.push_back(id);
      for (const auto& m : node.members) cluster_of[m] = id;
      run.topics.push_back({{"date", config.date},
                            {"language", lang},
                            {"topic_id", id},
                            {"title", run.doc_titles[topics[i].title_doc]},
                            {"title_doc", topics[i].title_doc},
                            {"keywords", topics[i].keywords},
                            {"member_doc_ids", node.members},
                            {"cohesiveness", node.cohesiveness}});
    }
  }

  const KnownNameMatcher matcher =
      compile_known_names(known, lang, res.morphology.has_language(lang) ? &res.morphology : nullptr);
  std::vector<NameCandidate> all;
  for (const Document* d : docs) {
    for (auto& c : recognize_document(*d, matcher, lr)) {
      if (const auto it = cluster_of.find(d->id); it != cluster_of.end()) c.cluster_id = it->second;
      all.push_back(std::move(c));
    }
  }

  // Clustered names first, topic by topic, then the unclustered documents.
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < cluster_order.size(); ++i) rank[cluster_order[i]] = i;
  std::stable_sort(all.begin(), all.end(), [&](const NameCandidate& a, const NameCandidate& b) {
    const std::size_t ra = a.cluster_id ? rank[*a.cluster_id] : cluster_order.size();
    const std::size_t rb = b.cluster_id ? rank[*b.cluster_id] : cluster_order.size();
    return ra < rb;
  });
  for (const auto& id : cluster_order) {
    json names = json::array();
    for (const auto& n : aggregate_cluster_names(all, id)) {
      if (std::none_of(n.doc_ids.begin(), n.doc_ids.end(), [&](const std::string& d) { return cluster_of[d] == id; })) {
        continue;
      }
      names.push_back({{"surface", n.surface},
                       {"method", std::string(to_string(n.method))},
                       {"doc_ids", n.doc_ids},
                       {"triggers", n.trigger_counts}});
    }
    run.cluster_names.push_back({{"topic_id", id}, {"names", names}});
  }
  run.candidates = std::move(all);
  run.diagnostics = diag.messages;
  return run;
}

}  // namespace

json run_day(const std::vector<Document>& documents, const RunConfig& config, const Resources& resources,
             NameStore& store) {
  std::map<std::string, std::vector<const Document*>> by_language;
  std::vector<std::string> diagnostics;
  for (const auto& d : documents) {
    if (resources.languages.count(d.language) == 0) {
      diagnostics.push_back(d.id + ": unsupported language '" + d.language + "', skipped");
      continue;
    }
    by_language[d.language].push_back(&d);
  }

  const std::vector<KnownName> known = store.known_names();
  std::vector<std::future<LanguageRun>> futures;
  for (const auto& [lang, docs] : by_language) {
    futures.push_back(std::async(std::launch::async, process_language, lang, docs, std::cref(config),
                                 std::cref(resources), std::cref(known)));
  }
  std::vector<LanguageRun> runs;
  for (auto& f : futures) runs.push_back(f.get());

  json new_persons = json::array();
  json auto_merges = json::array();
  json queued = json::array();
  std::size_t exact = 0;
  store.write([&](StoreWriter& w) {
    for (const auto& run : runs) {
      std::map<std::string, std::vector<PersonId>> groups;
      for (const auto& cand : run.candidates) {
        const IngestResult r = w.ingest_name(cand, {config.date, run.doc_titles.at(cand.doc_id)});
        switch (r.outcome) {
          case IngestOutcome::exact: ++exact; break;
          case IngestOutcome::new_person:
            new_persons.push_back({{"person_id", *r.person_id}, {"surface", cand.surface}, {"language", run.language}});
            break;
          case IngestOutcome::auto_merged:
            auto_merges.push_back({{"candidate_id", *r.candidate_id},
                                   {"surface", cand.surface},
                                   {"person_id", *r.person_id},
                                   {"combined", r.score->combined}});
            break;
          case IngestOutcome::queued:
            queued.push_back({{"candidate_id", *r.candidate_id},
                              {"surface", cand.surface},
                              {"target_person_id", *r.person_id},
                              {"combined", r.score->combined}});
            break;
          case IngestOutcome::skipped: break;
        }
        if (r.person_id && r.outcome != IngestOutcome::queued) {
          groups[cand.cluster_id ? *cand.cluster_id : "doc:" + cand.doc_id].push_back(*r.person_id);
        }
      }
      for (const auto& [group, persons] : groups) w.record_cooccurrence(persons);
    }
  });

  json languages = json::array();
  for (const auto& run : runs) {
    json cands = json::array();
    for (const auto& c : run.candidates) {
      cands.push_back({{"doc_id", c.doc_id},
                       {"surface", c.surface},
                       {"matched_text", c.matched_text},
                       {"method", std::string(to_string(c.method))},
                       {"cluster_id", c.cluster_id ? json(*c.cluster_id) : json(nullptr)},
                       {"triggers", c.triggers}});
    }
    languages.push_back({{"language", run.language},
                         {"documents", run.documents},
                         {"topics", run.topics},
                         {"cluster_names", run.cluster_names},
                         {"candidates", cands},
                         {"diagnostics", run.diagnostics}});
  }
  return {{"date", config.date},
          {"languages", languages},
          {"new_persons", new_persons},
          {"auto_merges", auto_merges},
          {"queued", queued},
          {"exact_matches", exact},
          {"diagnostics", diagnostics}};
}

json cmd_run_day(const RunConfig& config) {
  static const std::regex kDate(R"(^\d{4}-\d{2}-\d{2}$)");
  if (!std::regex_match(config.date, kDate)) throw std::invalid_argument("date must be YYYY-MM-DD");
  const Resources resources = Resources::load(config);
  if (config.staging_path.empty()) throw ConfigError("staging is not configured");
  const DocumentLoad staged = load_documents(config.staging_path);
  std::vector<Document> day;
  std::copy_if(staged.documents.begin(), staged.documents.end(), std::back_inserter(day),
               [&](const Document& d) { return d.date == config.date; });

  NameStore store = config.store_path.empty()
                        ? NameStore(resources.transformer, config.thresholds.merge())
                        : NameStore(resources.transformer, config.store_path, config.thresholds.merge());
  json report = run_day(day, config, resources, store);

  if (!config.report_path.empty()) {
    std::ofstream out(config.report_path, std::ios::binary | std::ios::trunc);
    out << report.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + config.report_path.string());
  }
  if (!config.cluster_report_path.empty()) {
    std::ofstream out(config.cluster_report_path, std::ios::binary | std::ios::trunc);
    for (const auto& lang : report["languages"]) {
      for (const auto& t : lang["topics"]) out << t.dump() << '\n';
    }
    if (!out) throw std::runtime_error("cannot write " + config.cluster_report_path.string());
  }
  return report;
}

// ---------------------------------------------------------------------------
// Evaluation

double f_measure(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

double NerScore::precision() const { return system == 0 ? 0.0 : static_cast<double>(correct) / system; }
double NerScore::recall() const { return gold == 0 ? 0.0 : static_cast<double>(correct) / gold; }
double NerScore::trigger_recall() const {
  return trigger_gold == 0 ? 1.0 : static_cast<double>(trigger_correct) / trigger_gold;
}

json NerEvaluation::to_json() const {
  json langs = json::object();
  for (const auto& [lang, s] : by_language) {
    langs[lang] = {{"documents", s.documents}, {"system", s.system},       {"gold", s.gold},
                   {"correct", s.correct},     {"precision", s.precision()}, {"recall", s.recall()},
                   {"f", s.f()},               {"trigger_recall", s.trigger_recall()}};
  }
  return {{"languages", langs},
          {"macro", {{"precision", macro_precision}, {"recall", macro_recall}, {"f", macro_f}}},
          {"false_positives", false_positives},
          {"misses", misses}};
}

std::string NerEvaluation::table() const {
  std::ostringstream out;
  const auto pct = [](double v) { return static_cast<int>(std::lround(v * 100.0)); };
  out << "language  docs  P    R    F    trigger-R\n";
  for (const auto& [lang, s] : by_language) {
    out << lang << std::string(lang.size() < 10 ? 10 - lang.size() : 1, ' ') << s.documents
        << std::string(6 - std::min<std::size_t>(5, std::to_string(s.documents).size()), ' ') << pct(s.precision())
        << "   " << pct(s.recall()) << "   " << pct(s.f()) << "   " << pct(s.trigger_recall()) << '\n';
  }
  out << "macro           " << pct(macro_precision) << "   " << pct(macro_recall) << "   " << pct(macro_f) << '\n';
  return out.str();
}

NerEvaluation evaluate_ner(const std::vector<Document>& documents, std::istream& gold, const Resources& resources,
                           const std::vector<KnownName>& known) {
  std::map<std::string, const Document*> by_id;
  for (const auto& d : documents) by_id[d.id] = &d;
  std::map<std::string, KnownNameMatcher> matchers;

  NerEvaluation eval;
  std::string line;
  std::size_t line_no = 0;
  std::size_t gold_docs = 0;
  while (std::getline(gold, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const json g = json::parse(line, nullptr, false);
    if (g.is_discarded() || !g.contains("id") || !g.contains("persons")) {
      throw std::invalid_argument("gold line " + std::to_string(line_no) + ": expected {\"id\", \"persons\"}");
    }
    const std::string id = g["id"].get<std::string>();
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw std::invalid_argument("gold line " + std::to_string(line_no) + ": unknown document " + id);
    const Document& doc = *it->second;
    const auto lang_res = resources.languages.find(doc.language);
    if (lang_res == resources.languages.end()) continue;
    ++gold_docs;

    auto m = matchers.find(doc.language);
    if (m == matchers.end()) {
      const Morphology* morph = resources.morphology.has_language(doc.language) ? &resources.morphology : nullptr;
      m = matchers.emplace(doc.language, compile_known_names(known, doc.language, morph)).first;
    }
    std::set<std::string> system;
    for (const auto& c : recognize_document(doc, m->second, lang_res->second)) system.insert(canonical_whitespace(c.surface));
    const std::set<std::string> persons = string_set(g, "persons");
    const std::set<std::string> adjacent = string_set(g, "trigger_adjacent");

    NerScore& s = eval.by_language[doc.language];
    ++s.documents;
    s.system += system.size();
    s.gold += persons.size();
    s.trigger_gold += adjacent.size();
    for (const auto& name : system) {
      if (persons.count(name) > 0) {
        ++s.correct;
      } else {
        eval.false_positives.push_back(id + ": " + name);
      }
    }
    for (const auto& name : persons) {
      if (system.count(name) == 0) eval.misses.push_back(id + ": " + name);
    }
    for (const auto& name : adjacent) {
      if (system.count(name) > 0) ++s.trigger_correct;
    }
  }
  if (gold_docs == 0) throw std::invalid_argument("gold corpus is empty");

  for (const auto& [lang, s] : eval.by_language) {
    eval.macro_precision += s.precision();
    eval.macro_recall += s.recall();
    eval.macro_f += s.f();
  }
  const double n = static_cast<double>(eval.by_language.size());
  eval.macro_precision /= n;
  eval.macro_recall /= n;
  eval.macro_f /= n;
  return eval;
}

NerEvaluation cmd_eval_ner(const fs::path& documents, const fs::path& gold, const RunConfig& config) {
  const Resources resources = Resources::load(config);
  const DocumentLoad docs = load_documents(documents);
  std::ifstream in(gold, std::ios::binary);
  if (!in) throw ConfigError("cannot read gold corpus " + gold.string());
  std::vector<KnownName> known;
  if (!config.store_path.empty() && fs::exists(config.store_path)) {
    known = NameStore(resources.transformer, config.store_path).known_names();
  }
  return evaluate_ner(docs.documents, in, resources, known);
}

std::size_t TranslitEvaluation::correct() const {
  return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](const auto& r) { return r.correct; }));
}

double TranslitEvaluation::accuracy() const {
  return results.empty() ? 0.0 : static_cast<double>(correct()) / results.size();
}

json TranslitEvaluation::to_json() const {
  json rows = json::array();
  for (const auto& r : results) {
    rows.push_back({{"surface", r.surface},
                    {"isr", r.isr},
                    {"gold", r.gold},
                    {"best_person", r.best_person ? json(*r.best_person) : json(nullptr)},
                    {"best_canonical", r.best_canonical},
                    {"best_score", r.best_score},
                    {"correct", r.correct},
                    {"failure", r.failure}});
  }
  return {{"cases", results.size()}, {"correct", correct()}, {"accuracy", accuracy()}, {"results", rows}};
}

std::vector<TranslitCase> parse_translit_cases(std::istream& in) {
  std::vector<TranslitCase> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::invalid_argument("case line " + std::to_string(line_no) + ": expected surface<TAB>gold");
    }
    out.push_back({canonical_whitespace(line.substr(0, tab)), canonical_whitespace(line.substr(tab + 1))});
  }
  return out;
}

TranslitEvaluation evaluate_translit(const std::vector<TranslitCase>& cases, const StoreState& store,
                                     const Transformer& transformer, double min_score) {
  TranslitEvaluation eval;
  for (const auto& tc : cases) {
    TranslitResult r;
    r.surface = tc.surface;
    r.gold = tc.gold;
    const Script script = detect_script(tc.surface);
    if (script == Script::latin || transformer.has_script(script)) r.isr = transformer.to_isr(tc.surface, script).text;
    const IsrName probe{r.isr, script, tc.surface};

    if (!r.isr.empty()) {
      for (const auto& [id, p] : store.persons) {
        for (const auto& v : p.variants) {
          if (v.isr.empty()) continue;
          const double s = name_similarity(probe, IsrName{v.isr, v.script, v.surface}).combined;
          if (!r.best_person || s > r.best_score) {
            r.best_person = id;
            r.best_canonical = p.canonical;
            r.best_score = s;
          }
        }
      }
    }
    if (!r.best_person) {
      r.failure = "no-candidate";
    } else if (r.best_score < min_score) {
      r.failure = "below-threshold";
    } else if (r.best_canonical != tc.gold) {
      r.failure = "wrong-person";
    } else {
      r.correct = true;
    }
    eval.results.push_back(std::move(r));
  }
  return eval;
}

TranslitEvaluation cmd_eval_translit(const fs::path& cases, const RunConfig& config) {
  if (config.rules_dir.empty()) throw ConfigError("rules_dir is not configured");
  const auto transformer = std::make_shared<const Transformer>(Transformer::load_directory(config.rules_dir));
  std::ifstream in(cases, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + cases.string());
  const auto parsed = parse_translit_cases(in);
  if (config.store_path.empty() || !fs::exists(config.store_path)) {
    return evaluate_translit(parsed, StoreState{}, *transformer, config.thresholds.retrieval_min);
  }
  const NameStore store(transformer, config.store_path);
  return evaluate_translit(parsed, *store.snapshot(), *transformer, config.thresholds.retrieval_min);
}

// ---------------------------------------------------------------------------
// Serving and reference lists

bool cmd_serve(const RunConfig& config, const std::atomic<bool>& stop) {
  if (config.rules_dir.empty()) throw ConfigError("rules_dir is not configured");
  const auto transformer = std::make_shared<const Transformer>(Transformer::load_directory(config.rules_dir));
  NameStore store = config.store_path.empty()
                        ? NameStore(transformer, config.thresholds.merge())
                        : NameStore(transformer, config.store_path, config.thresholds.merge());
  ReviewApi api(store);
  httplib::Server server;
  api.mount(server);
  if (!config.ui_dir.empty() && fs::is_directory(config.ui_dir)) server.set_mount_point("/", config.ui_dir.string());
  if (!server.bind_to_port(config.listen_host, config.listen_port)) return false;

  std::thread worker([&] { server.listen_after_bind(); });
  while (!stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  // stop() lets in-flight handlers finish; each write is already one
  // committed transaction, so nothing is left to flush.
  server.stop();
  worker.join();
  return true;
}

FrequencyList build_reference(const std::vector<Document>& documents, const std::string& language,
                              const std::set<std::string, std::less<>>& stopwords) {
  FrequencyList list;
  for (const auto& d : documents) {
    if (d.language != language) continue;
    for (const auto& [term, n] : count_terms(d.title + "\n" + d.body, stopwords)) {
      list.counts[term] += n;
      list.total += n;
    }
  }
  return list;
}

FrequencyList build_country_reference(const std::vector<Document>& documents) {
  FrequencyList list;
  for (const auto& d : documents) {
    for (const auto& [code, n] : d.country_tags) {
      if (n <= 0) continue;
      list.counts[utf8::to_lower(code)] += n;
      list.total += n;
    }
  }
  return list;
}

void write_frequency_list(const FrequencyList& list, std::ostream& out) {
  std::vector<std::pair<std::string, std::int64_t>> rows(list.counts.begin(), list.counts.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [term, n] : rows) out << term << '\t' << n << '\n';
}

}  // namespace onomast
