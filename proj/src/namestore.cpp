#include "onomast/namestore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace onomast {

using nlohmann::json;

namespace {

std::string isr_of(const Transformer& t, std::string_view surface, Script script) {
  if (script != Script::latin && !t.has_script(script)) return {};
  return t.to_isr(surface, script).text;
}

void refresh_canonical(PersonRecord& p) {
  const Variant* best = nullptr;
  for (const auto& v : p.variants) {
    if (best == nullptr || v.count > best->count ||
        (v.count == best->count && (v.first_seen < best->first_seen ||
                                    (v.first_seen == best->first_seen && v.surface < best->surface)))) {
      best = &v;
    }
  }
  p.canonical = best == nullptr ? std::string{} : best->surface;
}

void merge_counts(std::map<std::string, std::int64_t>& into, const std::map<std::string, std::int64_t>& from) {
  for (const auto& [k, n] : from) into[k] += n;
}

std::map<std::string, std::int64_t> trigger_map(const std::vector<std::string>& triggers) {
  std::map<std::string, std::int64_t> out;
  for (const auto& t : triggers) ++out[utf8::to_lower(canonical_whitespace(t))];
  return out;
}

void touch_dates(Variant& v, const std::string& date) {
  if (date.empty()) return;
  if (v.first_seen.empty() || date < v.first_seen) v.first_seen = date;
  if (v.last_seen.empty() || date > v.last_seen) v.last_seen = date;
}

SimilarityScore score_from_json(const json& j) {
  SimilarityScore s;
  s.bigram = j.at("bigram").get<double>();
  s.trigram = j.at("trigram").get<double>();
  s.consonant_bigram = j.at("consonant_bigram").get<double>();
  s.combined = j.at("combined").get<double>();
  s.mode = j.at("mode").get<std::string>() == "arabic" ? MatchMode::arabic : MatchMode::standard;
  return s;
}

json counts_json(const std::map<std::string, std::int64_t>& m) {
  json out = json::object();
  for (const auto& [k, n] : m) out[k] = n;
  return out;
}

json cooccurrence_json(const std::map<PersonId, std::int64_t>& m) {
  json out = json::object();
  for (const auto& [id, n] : m) out[std::to_string(id)] = n;
  return out;
}

}  // namespace

std::string_view to_string(Disposition d) {
  switch (d) {
    case Disposition::auto_merged: return "auto_merged";
    case Disposition::queued: return "queued";
    case Disposition::rejected_low: return "rejected_low";
    case Disposition::confirmed: return "confirmed";
    case Disposition::denied: return "denied";
  }
  return "queued";
}

std::string_view to_string(DecidedBy d) { return d == DecidedBy::human ? "human" : "policy"; }

Disposition disposition_from_string(std::string_view s) {
  for (auto d : {Disposition::auto_merged, Disposition::queued, Disposition::rejected_low, Disposition::confirmed,
                 Disposition::denied}) {
    if (to_string(d) == s) return d;
  }
  throw std::invalid_argument("unknown disposition '" + std::string(s) + "'");
}

std::string_view to_string(IngestOutcome o) {
  switch (o) {
    case IngestOutcome::exact: return "exact";
    case IngestOutcome::auto_merged: return "auto_merged";
    case IngestOutcome::queued: return "queued";
    case IngestOutcome::new_person: return "new_person";
    case IngestOutcome::skipped: return "skipped";
  }
  return "skipped";
}

Disposition merge_policy(const SimilarityScore& score, bool same_cluster, const MergeThresholds& t,
                         bool cross_script) {
  const double c = score.combined;
  if (cross_script) {
    if (c > t.auto_merge) return Disposition::auto_merged;
    if ((same_cluster && c >= t.in_cluster_merge) || c >= t.review_low) return Disposition::queued;
    return Disposition::rejected_low;
  }
  if (same_cluster && c >= t.in_cluster_merge) return Disposition::auto_merged;
  if (c > t.auto_merge) return Disposition::auto_merged;
  if (c >= t.review_low) return Disposition::queued;
  return Disposition::rejected_low;
}

std::int64_t PersonRecord::total_count() const {
  std::int64_t n = 0;
  for (const auto& v : variants) n += v.count;
  return n;
}

std::map<std::string, std::int64_t> PersonRecord::trigger_phrases() const {
  std::map<std::string, std::int64_t> out;
  for (const auto& v : variants) merge_counts(out, v.trigger_phrases);
  return out;
}

const Variant* PersonRecord::find_variant(std::string_view surface, Script script) const {
  for (const auto& v : variants) {
    if (v.surface == surface && v.script == script) return &v;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// StoreWriter

PersonRecord& StoreWriter::person(PersonId id) {
  const auto it = s_.persons.find(id);
  if (it == s_.persons.end()) throw NotFound("no person with id " + std::to_string(id));
  return it->second;
}

void StoreWriter::audit(json entry) { audit_.push_back(std::move(entry)); }

PersonId StoreWriter::new_person(Variant v, const std::optional<std::string>& cluster_id) {
  PersonRecord p;
  p.id = s_.next_person_id++;
  p.variants.push_back(std::move(v));
  if (cluster_id) p.clusters.insert(*cluster_id);
  refresh_canonical(p);
  const PersonId id = p.id;
  s_.persons.emplace(id, std::move(p));
  return id;
}

void StoreWriter::add_occurrence(PersonRecord& p, const NameCandidate& cand, const std::string& isr,
                                 const IngestContext& ctx, std::int64_t times) {
  const std::string surface = canonical_whitespace(cand.surface);
  auto it = std::find_if(p.variants.begin(), p.variants.end(),
                         [&](const Variant& v) { return v.surface == surface && v.script == cand.script; });
  if (it == p.variants.end()) {
    Variant v;
    v.surface = surface;
    v.language = cand.language;
    v.script = cand.script;
    v.isr = isr;
    p.variants.push_back(std::move(v));
    it = std::prev(p.variants.end());
  }
  it->count += times;
  touch_dates(*it, ctx.date);
  merge_counts(it->trigger_phrases, trigger_map(cand.triggers));
  if (cand.cluster_id) p.clusters.insert(*cand.cluster_id);
  refresh_canonical(p);
}

IngestResult StoreWriter::ingest_name(const NameCandidate& input, const IngestContext& ctx) {
  NameCandidate cand = input;
  cand.surface = canonical_whitespace(cand.surface);
  IngestResult result;
  if (cand.surface.empty()) return result;
  cand.script = detect_script(cand.surface);
  const std::string isr = isr_of(transformer_, cand.surface, cand.script);

  // Known surface, then known ISR.
  for (auto& [id, p] : s_.persons) {
    if (p.find_variant(cand.surface, cand.script) != nullptr) {
      add_occurrence(p, cand, isr, ctx, 1);
      return {IngestOutcome::exact, id, std::nullopt, std::nullopt};
    }
  }
  if (!isr.empty()) {
    for (auto& [id, p] : s_.persons) {
      const bool hit = std::any_of(p.variants.begin(), p.variants.end(), [&](const Variant& v) { return v.isr == isr; });
      if (hit) {
        add_occurrence(p, cand, isr, ctx, 1);
        return {IngestOutcome::exact, id, std::nullopt, std::nullopt};
      }
    }
  }

  // A surface already waiting for review only adds to the pending entry.
  for (auto& [cid, c] : s_.candidates) {
    if (c.disposition == Disposition::queued && !c.source_person_id && c.new_surface == cand.surface &&
        c.script == cand.script) {
      ++c.occurrences;
      merge_counts(c.trigger_phrases, trigger_map(cand.triggers));
      return {IngestOutcome::queued, c.target_person_id, cid, c.score};
    }
  }

  const auto fresh_variant = [&] {
    Variant v;
    v.surface = cand.surface;
    v.language = cand.language;
    v.script = cand.script;
    v.isr = isr;
    v.count = 1;
    touch_dates(v, ctx.date);
    v.trigger_phrases = trigger_map(cand.triggers);
    return v;
  };

  std::optional<SimilarityScore> best;
  PersonId best_person = 0;
  Script best_script = Script::latin;
  bool tie = false;
  if (!isr.empty()) {
    const IsrName a{isr, cand.script, cand.surface};
    for (const auto& [id, p] : s_.persons) {
      for (const auto& v : p.variants) {
        if (v.isr.empty()) continue;
        const SimilarityScore sc = name_similarity(a, IsrName{v.isr, v.script, v.surface});
        if (!best || sc.combined > best->combined) {
          best = sc;
          best_person = id;
          best_script = v.script;
          tie = false;
        } else if (sc.combined == best->combined && id != best_person) {
          tie = true;
        }
      }
    }
  }

  if (!best) {
    const PersonId id = new_person(fresh_variant(), cand.cluster_id);
    return {IngestOutcome::new_person, id, std::nullopt, std::nullopt};
  }

  const PersonRecord& target = s_.persons.at(best_person);
  const bool same_cluster = cand.cluster_id && target.clusters.count(*cand.cluster_id) > 0;
  Disposition d = merge_policy(*best, same_cluster, thresholds_, cand.script != best_script);
  // Equally good targets are left to a reviewer.
  if (tie && d == Disposition::auto_merged) d = Disposition::queued;

  MergeCandidate mc;
  mc.id = s_.next_candidate_id++;
  mc.new_surface = cand.surface;
  mc.new_isr = isr;
  mc.language = cand.language;
  mc.script = cand.script;
  mc.target_person_id = best_person;
  mc.score = *best;
  mc.same_cluster = same_cluster;
  mc.disposition = d;
  mc.decided_by = DecidedBy::policy;
  mc.created_at = ctx.date;
  mc.doc_id = cand.doc_id;
  mc.doc_title = ctx.doc_title;
  mc.cluster_id = cand.cluster_id;
  mc.trigger_phrases = trigger_map(cand.triggers);

  result.candidate_id = mc.id;
  result.score = *best;
  switch (d) {
    case Disposition::auto_merged:
      add_occurrence(s_.persons.at(best_person), cand, isr, ctx, 1);
      mc.decided_at = ctx.date;
      mc.result_person_id = best_person;
      result.outcome = IngestOutcome::auto_merged;
      result.person_id = best_person;
      break;
    case Disposition::queued:
      result.outcome = IngestOutcome::queued;
      result.person_id = best_person;
      break;
    default: {
      const PersonId id = new_person(fresh_variant(), cand.cluster_id);
      mc.decided_at = ctx.date;
      mc.result_person_id = id;
      result.outcome = IngestOutcome::new_person;
      result.person_id = id;
      break;
    }
  }
  s_.candidates.emplace(mc.id, std::move(mc));
  return result;
}

void StoreWriter::merge_persons(PersonId keep, PersonId drop) {
  PersonRecord& k = person(keep);
  PersonRecord d = person(drop);
  for (auto& v : d.variants) {
    auto it = std::find_if(k.variants.begin(), k.variants.end(),
                           [&](const Variant& x) { return x.surface == v.surface && x.script == v.script; });
    if (it == k.variants.end()) {
      k.variants.push_back(std::move(v));
      continue;
    }
    it->count += v.count;
    touch_dates(*it, v.first_seen);
    touch_dates(*it, v.last_seen);
    merge_counts(it->trigger_phrases, v.trigger_phrases);
  }
  for (const auto& [other, n] : d.cooccurrences) {
    if (other == keep) continue;
    k.cooccurrences[other] += n;
  }
  k.cooccurrences.erase(drop);
  k.clusters.insert(d.clusters.begin(), d.clusters.end());
  s_.persons.erase(drop);
  for (auto& [id, p] : s_.persons) {
    if (id == keep) continue;
    const auto it = p.cooccurrences.find(drop);
    if (it == p.cooccurrences.end()) continue;
    p.cooccurrences[keep] += it->second;
    p.cooccurrences.erase(drop);
  }
  for (auto& [cid, c] : s_.candidates) {
    if (c.disposition != Disposition::queued) continue;
    if (c.target_person_id == drop) c.target_person_id = keep;
    if (c.source_person_id == drop) c.source_person_id = keep;
  }
  refresh_canonical(person(keep));
}

std::vector<PersonId> StoreWriter::apply_review(std::int64_t candidate_id, bool confirm, const std::string& reviewer,
                                                const std::string& now) {
  const auto it = s_.candidates.find(candidate_id);
  if (it == s_.candidates.end()) throw NotFound("no merge candidate with id " + std::to_string(candidate_id));
  MergeCandidate& c = it->second;
  if (c.disposition != Disposition::queued) {
    throw Conflict("candidate " + std::to_string(candidate_id) + " is already " + std::string(to_string(c.disposition)));
  }

  std::vector<PersonId> result;
  if (c.source_person_id) {
    const PersonId src = *c.source_person_id;
    const PersonId dst = c.target_person_id;
    person(src);
    person(dst);
    if (confirm && src != dst) {
      const PersonId keep = std::min(src, dst);
      merge_persons(keep, std::max(src, dst));
      result = {keep};
    } else {
      result = {src, dst};
    }
  } else {
    NameCandidate occurrence;
    occurrence.surface = c.new_surface;
    occurrence.language = c.language;
    occurrence.script = c.script;
    occurrence.cluster_id = c.cluster_id;
    Variant v;
    v.surface = c.new_surface;
    v.language = c.language;
    v.script = c.script;
    v.isr = c.new_isr;
    v.count = c.occurrences;
    touch_dates(v, c.created_at);
    v.trigger_phrases = c.trigger_phrases;

    for (const auto& [id, p] : s_.persons) {
      if (p.find_variant(c.new_surface, c.script) != nullptr && !(confirm && id == c.target_person_id)) {
        throw Conflict("surface '" + c.new_surface + "' already belongs to person " + std::to_string(id));
      }
    }
    if (confirm) {
      PersonRecord& target = person(c.target_person_id);
      auto vit = std::find_if(target.variants.begin(), target.variants.end(),
                              [&](const Variant& x) { return x.surface == v.surface && x.script == v.script; });
      if (vit == target.variants.end()) {
        target.variants.push_back(std::move(v));
      } else {
        vit->count += v.count;
        merge_counts(vit->trigger_phrases, v.trigger_phrases);
        touch_dates(*vit, v.first_seen);
      }
      if (c.cluster_id) target.clusters.insert(*c.cluster_id);
      refresh_canonical(target);
      result = {target.id};
    } else {
      result = {new_person(std::move(v), c.cluster_id), c.target_person_id};
    }
  }

  c.disposition = confirm ? Disposition::confirmed : Disposition::denied;
  c.decided_by = DecidedBy::human;
  c.decided_at = now;
  c.reviewer = reviewer;
  c.result_person_id = result.front();
  audit({{"op", "review"},
         {"candidate_id", candidate_id},
         {"confirm", confirm},
         {"reviewer", reviewer},
         {"at", now},
         {"result", result}});
  return result;
}

PersonId StoreWriter::split_person(PersonId id, const std::vector<std::string>& surfaces, const std::string& now) {
  PersonRecord& p = person(id);
  std::set<std::string> subset;
  for (const auto& s : surfaces) subset.insert(canonical_whitespace(s));
  if (subset.empty()) throw std::invalid_argument("split needs at least one variant");
  for (const auto& s : subset) {
    const bool known = std::any_of(p.variants.begin(), p.variants.end(), [&](const Variant& v) { return v.surface == s; });
    if (!known) throw std::invalid_argument("person " + std::to_string(id) + " has no variant '" + s + "'");
  }

  std::vector<Variant> keep;
  std::vector<Variant> moved;
  for (auto& v : p.variants) (subset.count(v.surface) > 0 ? moved : keep).push_back(std::move(v));
  if (keep.empty()) {
    p.variants = std::move(moved);
    throw std::invalid_argument("split must leave at least one variant behind");
  }
  std::int64_t total = 0;
  std::int64_t moved_count = 0;
  for (const auto& v : keep) total += v.count;
  for (const auto& v : moved) moved_count += v.count;
  total += moved_count;
  p.variants = std::move(keep);

  PersonRecord fresh;
  fresh.id = s_.next_person_id++;
  fresh.variants = std::move(moved);
  fresh.clusters = p.clusters;

  // Co-occurrences carry no variant provenance, so they split by count share.
  const PersonId fresh_id = fresh.id;
  for (auto it = p.cooccurrences.begin(); it != p.cooccurrences.end();) {
    const std::int64_t share =
        total > 0 ? std::llround(static_cast<double>(it->second) * static_cast<double>(moved_count) / total) : 0;
    if (share > 0) {
      fresh.cooccurrences[it->first] = share;
      auto& other = s_.persons.at(it->first).cooccurrences;
      other[id] -= share;
      if (other[id] == 0) other.erase(id);
      other[fresh_id] += share;
    }
    it->second -= share;
    it = it->second == 0 ? p.cooccurrences.erase(it) : std::next(it);
  }
  refresh_canonical(p);
  refresh_canonical(fresh);
  s_.persons.emplace(fresh_id, std::move(fresh));
  audit({{"op", "split"},
         {"person_id", id},
         {"surfaces", std::vector<std::string>(subset.begin(), subset.end())},
         {"new_person_id", fresh_id},
         {"at", now}});
  return fresh_id;
}

std::int64_t StoreWriter::queue_person_merge(PersonId source, PersonId target, const std::string& now) {
  if (source == target) throw std::invalid_argument("cannot merge a person with itself");
  const PersonRecord& src = person(source);
  const PersonRecord& dst = person(target);
  const Variant* sv = src.find_variant(src.canonical, detect_script(src.canonical));
  const Variant* tv = dst.find_variant(dst.canonical, detect_script(dst.canonical));

  MergeCandidate mc;
  mc.id = s_.next_candidate_id++;
  mc.new_surface = src.canonical;
  mc.new_isr = sv != nullptr ? sv->isr : std::string{};
  mc.language = sv != nullptr ? sv->language : std::string{};
  mc.script = sv != nullptr ? sv->script : Script::latin;
  mc.target_person_id = target;
  mc.source_person_id = source;
  if (sv != nullptr && tv != nullptr) {
    mc.score = name_similarity(IsrName{sv->isr, sv->script, sv->surface}, IsrName{tv->isr, tv->script, tv->surface});
  }
  mc.same_cluster = std::any_of(src.clusters.begin(), src.clusters.end(),
                                [&](const std::string& c) { return dst.clusters.count(c) > 0; });
  mc.disposition = Disposition::queued;
  mc.created_at = now;
  mc.occurrences = src.total_count();
  const std::int64_t id = mc.id;
  s_.candidates.emplace(id, std::move(mc));
  audit({{"op", "queue_merge"}, {"candidate_id", id}, {"source", source}, {"target", target}, {"at", now}});
  return id;
}

ImportReport StoreWriter::import_variants(std::string_view tsv, const std::string& now) {
  ImportReport report;
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
      fields.push_back(canonical_whitespace(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start)));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      report.diagnostics.push_back(where + ": expected canonical<TAB>language<TAB>surface");
      continue;
    }
    PersonRecord* owner = nullptr;
    for (auto& [id, p] : s_.persons) {
      if (p.canonical == fields[0]) {
        owner = &p;
        break;
      }
    }
    if (owner == nullptr) {
      report.unmatched.push_back(where + ": " + fields[0]);
      continue;
    }
    const Script script = detect_script(fields[2]);
    PersonRecord* holder = nullptr;
    for (auto& [id, p] : s_.persons) {
      if (p.find_variant(fields[2], script) != nullptr) holder = &p;
    }
    if (holder == owner) continue;
    if (holder != nullptr) {
      report.diagnostics.push_back(where + ": '" + fields[2] + "' already belongs to person " +
                                   std::to_string(holder->id));
      continue;
    }
    Variant v;
    v.surface = fields[2];
    v.language = fields[1];
    v.script = script;
    v.isr = isr_of(transformer_, v.surface, script);
    touch_dates(v, now);
    owner->variants.push_back(std::move(v));
    refresh_canonical(*owner);
    ++report.imported;
  }
  audit({{"op", "import"}, {"imported", report.imported}, {"at", now}});
  return report;
}

void StoreWriter::record_cooccurrence(const std::vector<PersonId>& persons) {
  std::vector<PersonId> ids;
  for (PersonId id : persons) {
    if (s_.persons.count(id) > 0) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      ++s_.persons.at(ids[i]).cooccurrences[ids[j]];
      ++s_.persons.at(ids[j]).cooccurrences[ids[i]];
    }
  }
}

// ---------------------------------------------------------------------------
// NameStore

NameStore::NameStore(std::shared_ptr<const Transformer> transformer, MergeThresholds thresholds)
    : transformer_(std::move(transformer)), thresholds_(thresholds), current_(std::make_shared<StoreState>()) {}

NameStore::NameStore(std::shared_ptr<const Transformer> transformer, std::filesystem::path path,
                     MergeThresholds thresholds)
    : NameStore(std::move(transformer), thresholds) {
  path_ = std::move(path);
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw StorageError("cannot read store " + path_.string());
    try {
      current_ = std::make_shared<StoreState>(state_from_json(json::parse(in)));
    } catch (const json::exception& e) {
      throw StorageError("corrupt store " + path_.string() + ": " + e.what());
    }
  }
  if (std::ifstream log(audit_path()); log) {
    std::string line;
    while (std::getline(log, line)) {
      if (!line.empty()) ++audit_seq_;
    }
  }
}

std::filesystem::path NameStore::audit_path() const {
  return path_.empty() ? path_ : std::filesystem::path(path_.string() + ".audit.jsonl");
}

NameStore::Snapshot NameStore::snapshot() const {
  std::lock_guard<std::mutex> lock(snapshot_mutex_);
  return current_;
}

void NameStore::commit(std::shared_ptr<StoreState> draft, const std::vector<json>& audit) {
  if (fail_next_commit_) {
    fail_next_commit_ = false;
    throw StorageError("simulated storage failure");
  }
  if (!path_.empty()) {
    const std::filesystem::path tmp = path_.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << state_json(*draft).dump() << '\n';
      out.flush();
      if (!out) throw StorageError("cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path_, ec);
    if (ec) throw StorageError("cannot replace " + path_.string() + ": " + ec.message());
    if (!audit.empty()) {
      std::ofstream log(audit_path(), std::ios::binary | std::ios::app);
      for (const auto& entry : audit) {
        json line = entry;
        line["seq"] = ++audit_seq_;
        log << line.dump() << '\n';
      }
      if (!log) throw StorageError("cannot append to " + audit_path().string());
    }
  }
  std::lock_guard<std::mutex> lock(snapshot_mutex_);
  current_ = std::move(draft);
}

IngestResult NameStore::ingest_name(const NameCandidate& cand, const IngestContext& ctx) {
  return write([&](StoreWriter& w) { return w.ingest_name(cand, ctx); });
}

std::vector<PersonId> NameStore::apply_review(std::int64_t candidate_id, bool confirm, const std::string& reviewer,
                                              const std::string& now) {
  return write([&](StoreWriter& w) { return w.apply_review(candidate_id, confirm, reviewer, now); });
}

PersonId NameStore::split_person(PersonId id, const std::vector<std::string>& surfaces, const std::string& now) {
  return write([&](StoreWriter& w) { return w.split_person(id, surfaces, now); });
}

ImportReport NameStore::import_variants(std::string_view tsv, const std::string& now) {
  return write([&](StoreWriter& w) { return w.import_variants(tsv, now); });
}

std::vector<KnownName> NameStore::known_names() const {
  const auto s = snapshot();
  std::vector<KnownName> out;
  for (const auto& [id, p] : s->persons) {
    const std::int64_t total = p.total_count();
    for (const auto& v : p.variants) out.push_back({id, v.surface, total});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialisation

json to_json(const SimilarityScore& s) {
  return {{"bigram", s.bigram},
          {"trigram", s.trigram},
          {"consonant_bigram", s.consonant_bigram},
          {"combined", s.combined},
          {"mode", std::string(to_string(s.mode))}};
}

json variant_json(const Variant& v) {
  return {{"surface", v.surface},     {"language", v.language},     {"script", std::string(to_string(v.script))},
          {"isr", v.isr},             {"count", v.count},           {"first_seen", v.first_seen},
          {"last_seen", v.last_seen}};
}

json export_person(const PersonRecord& p) {
  json variants = json::array();
  for (const auto& v : p.variants) variants.push_back(variant_json(v));
  return {{"id", p.id},
          {"canonical", p.canonical},
          {"variants", variants},
          {"trigger_phrases", counts_json(p.trigger_phrases())},
          {"cooccurrences", cooccurrence_json(p.cooccurrences)}};
}

json export_store(const StoreState& s) {
  json out = json::array();
  for (const auto& [id, p] : s.persons) out.push_back(export_person(p));
  return out;
}

json candidate_json(const MergeCandidate& c) {
  json j = {{"id", c.id},
            {"new_surface", c.new_surface},
            {"new_isr", c.new_isr},
            {"language", c.language},
            {"script", std::string(to_string(c.script))},
            {"target_person_id", c.target_person_id},
            {"score", to_json(c.score)},
            {"same_cluster", c.same_cluster},
            {"disposition", std::string(to_string(c.disposition))},
            {"decided_by", std::string(to_string(c.decided_by))},
            {"created_at", c.created_at},
            {"decided_at", c.decided_at},
            {"reviewer", c.reviewer},
            {"doc_id", c.doc_id},
            {"doc_title", c.doc_title},
            {"trigger_phrases", counts_json(c.trigger_phrases)},
            {"occurrences", c.occurrences}};
  j["source_person_id"] = c.source_person_id ? json(*c.source_person_id) : json(nullptr);
  j["result_person_id"] = c.result_person_id ? json(*c.result_person_id) : json(nullptr);
  j["cluster_id"] = c.cluster_id ? json(*c.cluster_id) : json(nullptr);
  return j;
}

json state_json(const StoreState& s) {
  json persons = json::array();
  for (const auto& [id, p] : s.persons) {
    json variants = json::array();
    for (const auto& v : p.variants) {
      json jv = variant_json(v);
      jv["trigger_phrases"] = counts_json(v.trigger_phrases);
      variants.push_back(jv);
    }
    persons.push_back({{"id", p.id},
                       {"canonical", p.canonical},
                       {"variants", variants},
                       {"cooccurrences", cooccurrence_json(p.cooccurrences)},
                       {"clusters", p.clusters}});
  }
  json candidates = json::array();
  for (const auto& [id, c] : s.candidates) candidates.push_back(candidate_json(c));
  return {{"format", 1},
          {"next_person_id", s.next_person_id},
          {"next_candidate_id", s.next_candidate_id},
          {"persons", persons},
          {"candidates", candidates}};
}

StoreState state_from_json(const json& j) {
  StoreState s;
  s.next_person_id = j.at("next_person_id").get<PersonId>();
  s.next_candidate_id = j.at("next_candidate_id").get<std::int64_t>();
  for (const auto& jp : j.at("persons")) {
    PersonRecord p;
    p.id = jp.at("id").get<PersonId>();
    p.canonical = jp.at("canonical").get<std::string>();
    for (const auto& jv : jp.at("variants")) {
      Variant v;
      v.surface = jv.at("surface").get<std::string>();
      v.language = jv.at("language").get<std::string>();
      v.script = script_from_string(jv.at("script").get<std::string>());
      v.isr = jv.at("isr").get<std::string>();
      v.count = jv.at("count").get<std::int64_t>();
      v.first_seen = jv.at("first_seen").get<std::string>();
      v.last_seen = jv.at("last_seen").get<std::string>();
      for (const auto& [k, n] : jv.at("trigger_phrases").items()) v.trigger_phrases[k] = n.get<std::int64_t>();
      p.variants.push_back(std::move(v));
    }
    for (const auto& [k, n] : jp.at("cooccurrences").items()) p.cooccurrences[std::stoll(k)] = n.get<std::int64_t>();
    for (const auto& c : jp.at("clusters")) p.clusters.insert(c.get<std::string>());
    s.persons.emplace(p.id, std::move(p));
  }
  for (const auto& jc : j.at("candidates")) {
    MergeCandidate c;
    c.id = jc.at("id").get<std::int64_t>();
    c.new_surface = jc.at("new_surface").get<std::string>();
    c.new_isr = jc.at("new_isr").get<std::string>();
    c.language = jc.at("language").get<std::string>();
    c.script = script_from_string(jc.at("script").get<std::string>());
    c.target_person_id = jc.at("target_person_id").get<PersonId>();
    if (!jc.at("source_person_id").is_null()) c.source_person_id = jc.at("source_person_id").get<PersonId>();
    c.score = score_from_json(jc.at("score"));
    c.same_cluster = jc.at("same_cluster").get<bool>();
    c.disposition = disposition_from_string(jc.at("disposition").get<std::string>());
    c.decided_by = jc.at("decided_by").get<std::string>() == "human" ? DecidedBy::human : DecidedBy::policy;
    c.created_at = jc.at("created_at").get<std::string>();
    c.decided_at = jc.at("decided_at").get<std::string>();
    c.reviewer = jc.at("reviewer").get<std::string>();
    if (!jc.at("result_person_id").is_null()) c.result_person_id = jc.at("result_person_id").get<PersonId>();
    c.doc_id = jc.at("doc_id").get<std::string>();
    c.doc_title = jc.at("doc_title").get<std::string>();
    if (!jc.at("cluster_id").is_null()) c.cluster_id = jc.at("cluster_id").get<std::string>();
    for (const auto& [k, n] : jc.at("trigger_phrases").items()) c.trigger_phrases[k] = n.get<std::int64_t>();
    c.occurrences = jc.at("occurrences").get<std::int64_t>();
    s.candidates.emplace(c.id, std::move(c));
  }
  return s;
}

std::vector<std::pair<std::string, std::int64_t>> top_trigger_phrases(const PersonRecord& p, std::size_t k) {
  const auto all = p.trigger_phrases();
  std::vector<std::pair<std::string, std::int64_t>> out(all.begin(), all.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<const MergeCandidate*> queued_candidates(const StoreState& s) {
  std::vector<const MergeCandidate*> out;
  for (const auto& [id, c] : s.candidates) {
    if (c.disposition == Disposition::queued) out.push_back(&c);
  }
  std::stable_sort(out.begin(), out.end(), [](const MergeCandidate* a, const MergeCandidate* b) {
    return a->score.combined > b->score.combined;
  });
  return out;
}

}  // namespace onomast
