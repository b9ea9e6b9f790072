// Independent reference implementations used to cross-check the library.
// Everything here is deliberately written from scratch (own cosine, own
// sorting) so a bug in the library cannot hide in a shared helper.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace oracle {

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  double s = dot / (std::sqrt(na) * std::sqrt(nb));
  if (s > 1.0) s = 1.0;
  if (s < -1.0) s = -1.0;
  return s;
}

// Exhaustive entanglement index: enumerate every unordered pair, keep the
// cross-topic ones, count those with similarity strictly above alpha.
struct EiResult {
  std::size_t cross = 0;
  std::size_t entangled = 0;
  double ei = 0.0;
};

inline EiResult entanglement(const std::vector<std::string>& topics,
                             const std::vector<std::vector<double>>& vecs,
                             double alpha) {
  EiResult r;
  for (std::size_t i = 0; i < topics.size(); ++i) {
    for (std::size_t j = i + 1; j < topics.size(); ++j) {
      if (topics[i] == topics[j]) continue;
      ++r.cross;
      if (cosine(vecs[i], vecs[j]) > alpha) ++r.entangled;
    }
  }
  r.ei = r.cross == 0 ? 0.0 : double(r.entangled) / double(r.cross);
  return r;
}

// Brute-force top-k retrieval precision: score every item, stable-sort by
// (similarity desc, index asc), count label matches among the first k and
// divide by k regardless of corpus size.
inline double topk_precision(const std::vector<double>& query,
                             const std::vector<std::vector<double>>& vecs,
                             const std::vector<std::string>& labels,
                             const std::string& want,
                             std::size_t k) {
  std::vector<std::size_t> order(vecs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> sims(vecs.size());
  for (std::size_t i = 0; i < vecs.size(); ++i) sims[i] = cosine(query, vecs[i]);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return a < b;
  });
  std::size_t hits = 0;
  std::size_t take = std::min(k, order.size());
  for (std::size_t i = 0; i < take; ++i)
    if (labels[order[i]] == want) ++hits;
  return double(hits) / double(k);
}

// Filter-then-rank store scan against plain maps, used to shadow the real
// store's query path.
struct StoredItem {
  std::string id;
  std::map<std::string, std::string> metadata;
  std::vector<double> vector;
};

inline std::vector<std::pair<std::string, double>> store_query(
    const std::vector<StoredItem>& items,
    const std::vector<double>& query,
    const std::map<std::string, std::string>& filter,
    std::size_t k) {
  std::vector<std::pair<std::string, double>> scored;
  for (const auto& it : items) {
    bool ok = true;
    for (const auto& [key, val] : filter) {
      auto found = it.metadata.find(key);
      if (found == it.metadata.end() || found->second != val) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    scored.emplace_back(it.id, cosine(query, it.vector));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

// Random instance helpers. std::mt19937 is fine here: tests pin their own
// seeds and never feed these generators into the library's seeded paths.
inline std::vector<double> random_unit_vector(std::mt19937& rng, std::size_t dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  while (norm == 0.0) {
    for (auto& x : v) x = gauss(rng);
    norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
  }
  for (auto& x : v) x /= norm;
  return v;
}

}  // namespace oracle
