#include "onomast/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "onomast/transform.hpp"

namespace onomast {
namespace {

double x_log_ratio(double observed, double expected) {
  return observed > 0.0 ? observed * std::log(observed / expected) : 0.0;
}

}  // namespace

std::int64_t FrequencyList::count(std::string_view term) const {
  const auto it = counts.find(term);
  return it == counts.end() ? 0 : it->second;
}

FrequencyList FrequencyList::parse(std::string_view tsv) {
  FrequencyList list;
  std::istringstream in{std::string(tsv)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ConfigError("frequency list line " + std::to_string(line_no) + ": expected term<TAB>count");
    }
    std::int64_t n = 0;
    try {
      std::size_t used = 0;
      n = std::stoll(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw ConfigError("frequency list line " + std::to_string(line_no) + ": count is not an integer");
    }
    if (n < 0) throw ConfigError("frequency list line " + std::to_string(line_no) + ": negative count");
    list.counts[utf8::to_lower(line.substr(0, tab))] += n;
    list.total += n;
  }
  return list;
}

FrequencyList FrequencyList::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read reference frequency file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

double log_likelihood(std::int64_t doc_count, std::int64_t doc_total, std::int64_t ref_count, std::int64_t ref_total) {
  if (doc_count < 0 || ref_count < 0 || doc_count > doc_total || ref_count > ref_total) {
    throw std::invalid_argument("log_likelihood: counts must lie within their totals");
  }
  const double a = static_cast<double>(doc_count);
  const double b = static_cast<double>(ref_count);
  const double c = static_cast<double>(doc_total - doc_count);
  const double d = static_cast<double>(ref_total - ref_count);
  const double n = a + b + c + d;
  if (n == 0.0) return 0.0;
  const double term = a + b;
  const double other = c + d;
  const double doc = a + c;
  const double ref = b + d;
  const double g2 = 2.0 * (x_log_ratio(a, doc * term / n) + x_log_ratio(b, ref * term / n) +
                           x_log_ratio(c, doc * other / n) + x_log_ratio(d, ref * other / n));
  return std::max(g2, 0.0);
}

TermCounts count_terms(std::string_view text, const std::set<std::string, std::less<>>& stopwords) {
  TermCounts counts;
  std::u32string word;
  const auto flush = [&] {
    if (word.size() >= 2) {
      std::string w = utf8::encode(word);
      if (stopwords.find(w) == stopwords.end()) ++counts[w];
    }
    word.clear();
  };
  for (char32_t cp : utf8::decode(text)) {
    if (utf8::is_letter(cp)) {
      word.push_back(utf8::to_lower(cp));
    } else {
      flush();
    }
  }
  flush();
  return counts;
}

TermVector keyness(const TermCounts& doc_counts, const FrequencyList& reference) {
  std::int64_t doc_total = 0;
  for (const auto& [term, n] : doc_counts) doc_total += n;
  TermVector out;
  for (const auto& [term, n] : doc_counts) {
    if (n <= 0) continue;
    const std::int64_t ref_n = reference.count(term);
    // n/doc_total <= ref_n/ref_total, compared exactly.
    if (static_cast<__int128>(n) * reference.total <= static_cast<__int128>(ref_n) * doc_total) continue;
    const double g2 = log_likelihood(n, doc_total, ref_n, reference.total);
    if (g2 > 0.0) out[term] = g2;
  }
  return out;
}

std::vector<std::pair<std::string, double>> ranked_terms(const TermVector& weights) {
  std::vector<std::pair<std::string, double>> out(weights.begin(), weights.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

DocumentVector enrich_countries(DocumentVector vec, const std::vector<std::pair<std::string, int>>& country_tags,
                                const FrequencyList& country_reference, Diagnostics* diagnostics) {
  TermCounts counts;
  for (const auto& [code, n] : country_tags) {
    const std::string iso = utf8::to_lower(code);
    if (!country_reference.contains(iso)) {
      if (diagnostics != nullptr) diagnostics->note(vec.doc_id + ": unknown country code '" + code + "' skipped");
      continue;
    }
    if (n > 0) counts[iso] += n;
  }
  for (const auto& [iso, weight] : keyness(counts, country_reference)) {
    vec.weights[std::string(kCountryPrefix) + iso] = weight;
  }
  return vec;
}

double cosine(const TermVector& a, const TermVector& b) {
  double dot = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (const auto& [t, w] : a) aa += w * w;
  for (const auto& [t, w] : b) bb += w * w;
  if (aa == 0.0 || bb == 0.0) return 0.0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      dot += i->second * j->second;
      ++i;
      ++j;
    }
  }
  return std::min(1.0, dot / std::sqrt(aa * bb));
}

Dendrogram build_dendrogram(const std::vector<DocumentVector>& vectors, Diagnostics* diagnostics) {
  Dendrogram tree;
  for (const auto& v : vectors) {
    const bool nonzero = std::any_of(v.weights.begin(), v.weights.end(), [](const auto& kv) { return kv.second != 0.0; });
    if (!nonzero) {
      if (diagnostics != nullptr) diagnostics->note(v.doc_id + ": no keyword with positive keyness, not clustered");
      continue;
    }
    ClusterNode leaf;
    leaf.id = tree.nodes.size();
    leaf.vector = v.weights;
    leaf.members = {v.doc_id};
    tree.nodes.push_back(std::move(leaf));
  }
  if (tree.nodes.empty()) throw std::invalid_argument("build_dendrogram: no document to cluster");

  // sims[k][j] for j < k, filled as nodes are created.
  std::vector<std::vector<double>> sims(tree.nodes.size());
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    sims[k].resize(k);
    for (std::size_t j = 0; j < k; ++j) sims[k][j] = cosine(tree.nodes[k].vector, tree.nodes[j].vector);
  }
  const auto sim = [&](std::size_t x, std::size_t y) { return x > y ? sims[x][y] : sims[y][x]; };

  std::vector<std::size_t> active(tree.nodes.size());
  for (std::size_t k = 0; k < active.size(); ++k) active[k] = k;

  while (active.size() > 1) {
    std::size_t best_i = 0;
    std::size_t best_j = 1;
    double best = -1.0;
    std::pair<std::string_view, std::string_view> best_key;
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const double s = sim(active[i], active[j]);
        std::string_view ki = tree.nodes[active[i]].members.front();
        std::string_view kj = tree.nodes[active[j]].members.front();
        if (kj < ki) std::swap(ki, kj);
        if (s > best || (s == best && std::make_pair(ki, kj) < best_key)) {
          best = s;
          best_i = i;
          best_j = j;
          best_key = {ki, kj};
        }
      }
    }

    const std::size_t left = active[best_i];
    const std::size_t right = active[best_j];
    ClusterNode merged;
    merged.id = tree.nodes.size();
    merged.children = std::make_pair(left, right);
    merged.weight = tree.nodes[left].weight + tree.nodes[right].weight;
    merged.cohesiveness = best;
    const double wl = tree.nodes[left].weight;
    const double wr = tree.nodes[right].weight;
    for (const auto& [t, w] : tree.nodes[left].vector) merged.vector[t] += w * wl;
    for (const auto& [t, w] : tree.nodes[right].vector) merged.vector[t] += w * wr;
    for (auto& [t, w] : merged.vector) w /= (wl + wr);
    merged.members = tree.nodes[left].members;
    merged.members.insert(merged.members.end(), tree.nodes[right].members.begin(), tree.nodes[right].members.end());
    std::sort(merged.members.begin(), merged.members.end());
    tree.nodes[left].parent = merged.id;
    tree.nodes[right].parent = merged.id;
    tree.nodes.push_back(std::move(merged));

    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_j));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_i));
    const std::size_t k = tree.nodes.size() - 1;
    sims.emplace_back(k, 0.0);
    for (std::size_t other : active) sims[k][other] = cosine(tree.nodes[k].vector, tree.nodes[other].vector);
    active.push_back(k);
  }
  tree.root = active.front();
  return tree;
}

std::vector<Topic> detect_topics(const Dendrogram& dendrogram, double min_sim, std::size_t keyword_count) {
  std::map<std::string_view, const ClusterNode*> leaves;
  for (const auto& n : dendrogram.nodes) {
    if (n.leaf()) leaves.emplace(n.members.front(), &n);
  }

  std::vector<Topic> topics;
  std::vector<std::size_t> stack{dendrogram.root};
  while (!stack.empty()) {
    const ClusterNode& node = dendrogram.nodes[stack.back()];
    stack.pop_back();
    if (node.leaf()) continue;
    if (node.cohesiveness < min_sim) {
      stack.push_back(node.children->first);
      stack.push_back(node.children->second);
      continue;
    }
    Topic topic;
    topic.node = node.id;
    double best = -1.0;
    for (const auto& doc : node.members) {
      const double s = cosine(leaves.at(doc)->vector, node.vector);
      if (s > best) {
        best = s;
        topic.title_doc = doc;
      }
    }
    for (const auto& [term, w] : ranked_terms(node.vector)) {
      if (topic.keywords.size() >= keyword_count) break;
      topic.keywords.push_back(term);
    }
    topics.push_back(std::move(topic));
  }
  std::sort(topics.begin(), topics.end(), [&](const Topic& a, const Topic& b) {
    const auto& na = dendrogram.nodes[a.node];
    const auto& nb = dendrogram.nodes[b.node];
    if (na.weight != nb.weight) return na.weight > nb.weight;
    return na.members.front() < nb.members.front();
  });
  return topics;
}

}  // namespace onomast
