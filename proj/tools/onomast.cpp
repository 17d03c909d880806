// onomast: command-line driver for the name pipeline.
//
// Exit codes: 0 ok, 1 usage, 2 missing or malformed resource, 3 runtime failure.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "onomast/pipeline.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kResource = 2;
constexpr int kRuntime = 3;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const onomast::RuleParseError& e) {
    std::cerr << "onomast: " << e.what() << " (line " << e.line() << ")\n";
    return kResource;
  } catch (const onomast::ConfigError& e) {
    std::cerr << "onomast: " << e.what() << '\n';
    return kResource;
  } catch (const onomast::StorageError& e) {
    std::cerr << "onomast: " << e.what() << '\n';
    return kRuntime;
  } catch (const std::invalid_argument& e) {
    std::cerr << "onomast: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "onomast: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilingual person-name recognition, variant matching and review"};
  app.require_subcommand(1);

  std::string config_path;
  const auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value run configuration")->required()->check(CLI::ExistingFile);
  };

  auto* ingest = app.add_subcommand("ingest", "validate documents and stage them for a run");
  std::string ingest_file;
  add_config(ingest);
  ingest->add_option("documents", ingest_file, "document JSONL")->required();

  auto* run_day = app.add_subcommand("run-day", "cluster, recognise and store one day of staged documents");
  std::string date_override;
  add_config(run_day);
  run_day->add_option("--date", date_override, "overrides the configured date (YYYY-MM-DD)");

  auto* eval_ner = app.add_subcommand("eval-ner", "presence-based precision/recall against a gold corpus");
  std::string ner_docs;
  std::string ner_gold;
  bool ner_json = false;
  add_config(eval_ner);
  eval_ner->add_option("--documents", ner_docs, "document JSONL")->required();
  eval_ner->add_option("--gold", ner_gold, "gold JSONL")->required();
  eval_ner->add_flag("--json", ner_json, "print JSON instead of a table");

  auto* eval_translit = app.add_subcommand("eval-translit", "rank-1 retrieval of transliterated names");
  std::string translit_cases;
  std::string translit_store;
  add_config(eval_translit);
  eval_translit->add_option("cases", translit_cases, "TSV surface<TAB>gold canonical")->required();
  eval_translit->add_option("--store", translit_store, "overrides the configured store");

  auto* serve = app.add_subcommand("serve", "serve the review API");
  int port_override = 0;
  add_config(serve);
  serve->add_option("--port", port_override, "overrides listen_port")->check(CLI::Range(1, 65535));

  auto* reffreq = app.add_subcommand("reffreq", "build a reference frequency list from document JSONL");
  std::string ref_docs;
  std::string ref_language;
  std::string ref_stopwords;
  std::string ref_out;
  bool ref_countries = false;
  reffreq->add_option("documents", ref_docs, "document JSONL")->required()->check(CLI::ExistingFile);
  reffreq->add_option("--language", ref_language, "language of the word list");
  reffreq->add_option("--stopwords", ref_stopwords, "stopword list to leave out")->check(CLI::ExistingFile);
  reffreq->add_flag("--countries", ref_countries, "count country tags instead of words");
  reffreq->add_option("-o,--output", ref_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  const auto config = [&] { return onomast::load_config(config_path); };

  if (*ingest) {
    return guarded([&] {
      const auto summary = onomast::cmd_ingest(ingest_file, config());
      for (const auto& r : summary.rejected) std::cerr << "rejected " << r << '\n';
      std::cout << "staged " << summary.staged << ", duplicates " << summary.duplicates << ", rejected "
                << summary.rejected.size() << '\n';
      return kOk;
    });
  }

  if (*run_day) {
    return guarded([&] {
      auto cfg = config();
      if (!date_override.empty()) cfg.date = date_override;
      const auto report = onomast::cmd_run_day(cfg);
      std::size_t topics = 0;
      for (const auto& lang : report["languages"]) topics += lang["topics"].size();
      std::cout << report["date"].get<std::string>() << ": " << topics << " topics, "
                << report["new_persons"].size() << " new persons, " << report["auto_merges"].size()
                << " auto-merged, " << report["queued"].size() << " queued\n";
      return kOk;
    });
  }

  if (*eval_ner) {
    return guarded([&] {
      const auto eval = onomast::cmd_eval_ner(ner_docs, ner_gold, config());
      if (ner_json) {
        std::cout << eval.to_json().dump(2) << '\n';
      } else {
        std::cout << eval.table();
      }
      return kOk;
    });
  }

  if (*eval_translit) {
    return guarded([&] {
      auto cfg = config();
      if (!translit_store.empty()) cfg.store_path = translit_store;
      std::cout << onomast::cmd_eval_translit(translit_cases, cfg).to_json().dump(2) << '\n';
      return kOk;
    });
  }

  if (*serve) {
    return guarded([&] {
      auto cfg = config();
      if (port_override != 0) cfg.listen_port = port_override;
      std::signal(SIGTERM, on_signal);
      std::signal(SIGINT, on_signal);
      std::cerr << "serving on " << cfg.listen_host << ':' << cfg.listen_port << '\n';
      if (!onomast::cmd_serve(cfg, g_stop)) {
        std::cerr << "onomast: cannot listen on " << cfg.listen_host << ':' << cfg.listen_port << '\n';
        return kResource;
      }
      return kOk;
    });
  }

  if (*reffreq) {
    return guarded([&] {
      const auto docs = onomast::load_documents(ref_docs);
      onomast::FrequencyList list;
      if (ref_countries) {
        list = onomast::build_country_reference(docs.documents);
      } else {
        if (ref_language.empty()) throw std::invalid_argument("--language is required for word lists");
        std::set<std::string, std::less<>> stop;
        if (!ref_stopwords.empty()) {
          std::ifstream in(ref_stopwords);
          std::string w;
          while (std::getline(in, w)) {
            if (!w.empty() && w.front() != '#') stop.insert(onomast::utf8::to_lower(w));
          }
        }
        list = onomast::build_reference(docs.documents, ref_language, stop);
      }
      if (ref_out.empty()) {
        onomast::write_frequency_list(list, std::cout);
      } else {
        std::ofstream out(ref_out);
        onomast::write_frequency_list(list, out);
        if (!out) throw std::runtime_error("cannot write " + ref_out);
      }
      return kOk;
    });
  }
  return kUsage;
}
