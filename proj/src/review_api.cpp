#include "onomast/review_api.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <regex>

#include <httplib.h>

namespace onomast {

using nlohmann::json;

namespace {

ApiResponse error(int status, const std::string& message) { return {status, {{"error", message}}}; }

std::optional<std::int64_t> parse_id(const std::string& s) {
  if (s.empty() || s.size() > 18 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  return std::stoll(s);
}

std::optional<int> query_int(const ApiRequest& r, const std::string& key, int fallback) {
  const auto it = r.query.find(key);
  if (it == r.query.end()) return fallback;
  const auto v = parse_id(it->second);
  if (!v || *v > std::numeric_limits<int>::max()) return std::nullopt;
  return static_cast<int>(*v);
}

}  // namespace

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json queue_item_json(const MergeCandidate& c, const StoreState& state) {
  json target = {{"person_id", c.target_person_id}, {"canonical", nullptr}, {"top_variants", json::array()}};
  if (const auto it = state.persons.find(c.target_person_id); it != state.persons.end()) {
    const PersonRecord& p = it->second;
    target["canonical"] = p.canonical;
    std::vector<const Variant*> variants;
    for (const auto& v : p.variants) variants.push_back(&v);
    std::stable_sort(variants.begin(), variants.end(), [](const Variant* a, const Variant* b) { return a->count > b->count; });
    for (std::size_t i = 0; i < variants.size() && i < 5; ++i) target["top_variants"].push_back(variant_json(*variants[i]));
  }
  json triggers = json::array();
  for (const auto& [phrase, n] : c.trigger_phrases) triggers.push_back(phrase);
  return {{"candidate_id", c.id},
          {"new_surface", c.new_surface},
          {"new_isr", c.new_isr},
          {"language", c.language},
          {"script", std::string(to_string(c.script))},
          {"occurrences", c.occurrences},
          {"target", target},
          {"score", to_json(c.score)},
          {"same_cluster", c.same_cluster},
          {"context",
           {{"doc_id", c.doc_id},
            {"doc_title", c.doc_title},
            {"cluster_id", c.cluster_id ? json(*c.cluster_id) : json(nullptr)},
            {"trigger_phrases", triggers}}}};
}

ReviewApi::ReviewApi(NameStore& store, Clock clock) : store_(store), clock_(std::move(clock)) {
  if (!clock_) clock_ = utc_now;
}

ApiResponse ReviewApi::handle(const ApiRequest& request) {
  static const std::regex kDecision(R"(^/queue/([^/]+)/decision$)");
  static const std::regex kPerson(R"(^/person/([^/]+)$)");
  static const std::regex kSplit(R"(^/person/([^/]+)/split$)");

  std::smatch m;
  try {
    if (request.path == "/queue") {
      if (request.method != "GET") return error(405, "use GET");
      return get_queue(request);
    }
    if (std::regex_match(request.path, m, kDecision)) {
      if (request.method != "POST") return error(405, "use POST");
      const auto id = parse_id(m[1]);
      if (!id) return error(404, "no merge candidate '" + m[1].str() + "'");
      return post_decision(*id, request);
    }
    if (std::regex_match(request.path, m, kSplit)) {
      if (request.method != "POST") return error(405, "use POST");
      const auto id = parse_id(m[1]);
      if (!id) return error(404, "no person '" + m[1].str() + "'");
      return post_split(*id, request);
    }
    if (std::regex_match(request.path, m, kPerson)) {
      if (request.method != "GET") return error(405, "use GET");
      const auto id = parse_id(m[1]);
      if (!id) return error(404, "no person '" + m[1].str() + "'");
      return get_person(*id);
    }
  } catch (const NotFound& e) {
    return error(404, e.what());
  } catch (const Conflict& e) {
    return error(409, e.what());
  } catch (const std::invalid_argument& e) {
    return error(422, e.what());
  } catch (const StorageError& e) {
    return error(503, e.what());
  }
  return error(404, "no such endpoint");
}

ApiResponse ReviewApi::get_queue(const ApiRequest& request) {
  const auto limit = query_int(request, "limit", kDefaultLimit);
  const auto offset = query_int(request, "offset", 0);
  if (!limit || !offset) return error(400, "limit and offset must be non-negative integers");
  const int page = std::min(*limit, kMaxLimit);

  const auto snap = store_.snapshot();
  const auto queued = queued_candidates(*snap);
  json items = json::array();
  for (std::size_t i = static_cast<std::size_t>(*offset); i < queued.size() && items.size() < static_cast<std::size_t>(page); ++i) {
    items.push_back(queue_item_json(*queued[i], *snap));
  }
  return {200, {{"items", items}, {"total", queued.size()}, {"offset", *offset}, {"limit", page}}};
}

ApiResponse ReviewApi::post_decision(std::int64_t candidate_id, const ApiRequest& request) {
  const json body = json::parse(request.body, nullptr, false);
  if (body.is_discarded() || !body.is_object() || !body.contains("confirm") || !body["confirm"].is_boolean()) {
    return error(422, "body must be {\"confirm\": true|false}");
  }
  const bool confirm = body["confirm"].get<bool>();
  const std::string reviewer = request.reviewer.empty() ? "anonymous" : request.reviewer;
  const auto ids = store_.apply_review(candidate_id, confirm, reviewer, clock_());
  return {200,
          {{"candidate_id", candidate_id},
           {"disposition", confirm ? "confirmed" : "denied"},
           {"person_ids", ids},
           {"reviewer", reviewer}}};
}

ApiResponse ReviewApi::get_person(PersonId id) {
  const auto snap = store_.snapshot();
  const auto it = snap->persons.find(id);
  if (it == snap->persons.end()) return error(404, "no person with id " + std::to_string(id));
  const PersonRecord& p = it->second;

  std::vector<std::pair<PersonId, std::int64_t>> related(p.cooccurrences.begin(), p.cooccurrences.end());
  std::stable_sort(related.begin(), related.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  json rel = json::array();
  for (const auto& [other, n] : related) {
    const auto o = snap->persons.find(other);
    rel.push_back({{"person_id", other}, {"canonical", o == snap->persons.end() ? "" : o->second.canonical}, {"count", n}});
  }
  json top = json::array();
  for (const auto& [phrase, n] : top_trigger_phrases(p, 10)) top.push_back({{"phrase", phrase}, {"count", n}});

  json out = export_person(p);
  out["related"] = rel;
  out["top_trigger_phrases"] = top;
  return {200, out};
}

ApiResponse ReviewApi::post_split(PersonId id, const ApiRequest& request) {
  const json body = json::parse(request.body, nullptr, false);
  if (body.is_discarded() || !body.is_object() || !body.contains("variant_subset") ||
      !body["variant_subset"].is_array()) {
    return error(422, "body must be {\"variant_subset\": [surface, ...]}");
  }
  std::vector<std::string> subset;
  for (const auto& s : body["variant_subset"]) {
    if (!s.is_string()) return error(422, "variant_subset entries must be strings");
    subset.push_back(s.get<std::string>());
  }
  const PersonId fresh = store_.split_person(id, subset, clock_());
  return {200, {{"person_id", id}, {"new_person_id", fresh}, {"person_ids", {id, fresh}}}};
}

void ReviewApi::mount(httplib::Server& server) {
  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query[k] = v;
    r.body = req.body;
    r.reviewer = req.get_header_value("X-Reviewer");
    const ApiResponse out = handle(r);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server.Get("/queue", forward);
  server.Post(R"(/queue/[^/]+/decision)", forward);
  server.Get(R"(/person/[^/]+)", forward);
  server.Post(R"(/person/[^/]+/split)", forward);
}

}  // namespace onomast
