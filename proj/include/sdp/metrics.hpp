#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sdp/embed.hpp"
#include "sdp/error.hpp"
#include "sdp/util.hpp"

namespace sdp {

// ---------------------------------------------------------------------------
// Entanglement
//
// For labeled items with embeddings, the entangled pair set holds every
// cross-topic pair whose cosine similarity is strictly above alpha. The
// entanglement index is that count over the number of cross-topic pairs;
// items of a single topic (no cross pairs) score 0 by convention.
// ---------------------------------------------------------------------------

struct EntangledPair {
    int i = 0;
    int j = 0;  // i < j
    double similarity = 0.0;
};

struct EntanglementReport {
    double alpha = 0.0;
    long long cross_topic_pair_count = 0;
    long long entangled_pair_count = 0;
    double ei = 0.0;
    bool pure = false;  // no cross-topic pairs at all
    std::vector<EntangledPair> entangled_pairs;
};

inline void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        fail(errc::alpha_out_of_range, "alpha must lie strictly inside (0,1), got " + std::to_string(alpha));
}

inline std::vector<EntangledPair> entangled_pairs(const std::vector<TopicLabel>& topics,
                                                  const std::vector<EmbeddingVector>& vectors,
                                                  double alpha) {
    check_alpha(alpha);
    if (topics.size() != vectors.size())
        fail(errc::length_mismatch, std::to_string(topics.size()) + " labels vs " +
                                        std::to_string(vectors.size()) + " vectors");
    std::vector<EntangledPair> out;
    for (std::size_t i = 0; i < topics.size(); ++i)
        for (std::size_t j = i + 1; j < topics.size(); ++j) {
            if (topics[i] == topics[j]) continue;
            double s = cosine_sim(vectors[i], vectors[j]);
            if (s > alpha) out.push_back({static_cast<int>(i), static_cast<int>(j), s});
        }
    return out;
}

inline EntanglementReport entanglement_index(const std::vector<TopicLabel>& topics,
                                             const std::vector<EmbeddingVector>& vectors,
                                             double alpha) {
    check_alpha(alpha);
    if (topics.size() != vectors.size())
        fail(errc::length_mismatch, std::to_string(topics.size()) + " labels vs " +
                                        std::to_string(vectors.size()) + " vectors");
    EntanglementReport rep;
    rep.alpha = alpha;
    for (std::size_t i = 0; i < topics.size(); ++i)
        for (std::size_t j = i + 1; j < topics.size(); ++j) {
            if (topics[i] == topics[j]) continue;
            ++rep.cross_topic_pair_count;
            double s = cosine_sim(vectors[i], vectors[j]);
            if (s > alpha) rep.entangled_pairs.push_back({static_cast<int>(i), static_cast<int>(j), s});
        }
    rep.entangled_pair_count = static_cast<long long>(rep.entangled_pairs.size());
    rep.pure = rep.cross_topic_pair_count == 0;
    rep.ei = rep.pure ? 0.0
                      : static_cast<double>(rep.entangled_pair_count) /
                            static_cast<double>(rep.cross_topic_pair_count);
    return rep;
}

// ---------------------------------------------------------------------------
// Retrieval precision
// ---------------------------------------------------------------------------

// Fraction of the top k (by cosine, ties broken by ascending index) whose
// label matches the relevant topic. Denominator is k even when fewer items
// exist.
inline double topk_precision(const EmbeddingVector& query, const TopicLabel& relevant_topic,
                             const std::vector<TopicLabel>& topics,
                             const std::vector<EmbeddingVector>& vectors, int k) {
    if (k <= 0) fail(errc::invalid_spec, "k must be positive");
    if (topics.size() != vectors.size())
        fail(errc::length_mismatch, std::to_string(topics.size()) + " labels vs " +
                                        std::to_string(vectors.size()) + " vectors");
    if (vectors.empty()) fail(errc::empty_corpus, "top-k precision over an empty collection");
    std::vector<std::pair<double, int>> ranked;
    ranked.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i)
        ranked.emplace_back(cosine_sim(query, vectors[i]), static_cast<int>(i));
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    int hits = 0;
    int take = std::min<int>(k, static_cast<int>(ranked.size()));
    for (int r = 0; r < take; ++r)
        if (topics[static_cast<std::size_t>(ranked[r].second)] == relevant_topic) ++hits;
    return static_cast<double>(hits) / static_cast<double>(k);
}

// ---------------------------------------------------------------------------
// Boundary agreement
// ---------------------------------------------------------------------------

struct SegmentationScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long long matched = 0;
    long long detected_count = 0;
    long long true_count = 0;
};

// Exact-gap matching between detected and reference boundary sets. Gap
// positions are 1..n-1 when n_segments > 0 is given (out-of-range entries are
// an error); 0 skips the range check. Empty-vs-empty is perfect agreement.
inline SegmentationScore boundary_f1(std::vector<int> detected, std::vector<int> truth,
                                     int n_segments = 0) {
    auto canon = [&](std::vector<int>& v, const char* which) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        if (n_segments > 0)
            for (int g : v)
                if (g < 1 || g >= n_segments)
                    fail(errc::gap_out_of_range, std::string(which) + " gap " + std::to_string(g) +
                                                     " outside 1.." + std::to_string(n_segments - 1));
    };
    canon(detected, "detected");
    canon(truth, "reference");
    SegmentationScore s;
    s.detected_count = static_cast<long long>(detected.size());
    s.true_count = static_cast<long long>(truth.size());
    std::vector<int> both;
    std::set_intersection(detected.begin(), detected.end(), truth.begin(), truth.end(),
                          std::back_inserter(both));
    s.matched = static_cast<long long>(both.size());
    if (s.detected_count == 0 && s.true_count == 0) {
        s.precision = s.recall = s.f1 = 1.0;
        return s;
    }
    s.precision = s.detected_count == 0 ? 0.0
                                        : static_cast<double>(s.matched) / static_cast<double>(s.detected_count);
    s.recall = s.true_count == 0 ? 0.0
                                 : static_cast<double>(s.matched) / static_cast<double>(s.true_count);
    s.f1 = (s.precision + s.recall) == 0.0 ? 0.0
                                           : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

// ---------------------------------------------------------------------------
// Agreement and rank statistics
// ---------------------------------------------------------------------------

// Cohen's kappa for two binary raters over the same items.
inline double cohen_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
    if (a.size() != b.size())
        fail(errc::length_mismatch, "rater vectors of lengths " + std::to_string(a.size()) + " and " +
                                        std::to_string(b.size()));
    if (a.empty()) fail(errc::empty_input, "kappa over zero items");
    double n = static_cast<double>(a.size());
    double n11 = 0, n00 = 0, a1 = 0, b1 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && b[i]) ++n11;
        if (!a[i] && !b[i]) ++n00;
        if (a[i]) ++a1;
        if (b[i]) ++b1;
    }
    double po = (n11 + n00) / n;
    double pe = (a1 / n) * (b1 / n) + ((n - a1) / n) * ((n - b1) / n);
    if (pe == 1.0) return po == 1.0 ? 1.0 : 0.0;  // degenerate marginals: no chance correction possible
    return (po - pe) / (1.0 - pe);
}

// Nearest-rank percentile: the smallest element whose rank m satisfies
// m*100 >= p*N. Both sides of the comparison are integer-valued doubles, so
// the test is exact (a floating ceil of p/100*N is not: 0.9*10 rounds up).
inline double nearest_rank_percentile(std::vector<double> values, double p) {
    if (values.empty()) fail(errc::empty_input, "percentile of an empty sample");
    if (!(p > 0.0 && p <= 100.0))
        fail(errc::percent_out_of_range, "percent must lie in (0,100], got " + std::to_string(p));
    std::sort(values.begin(), values.end());
    double target = p * static_cast<double>(values.size());
    for (std::size_t m = 1; m <= values.size(); ++m)
        if (static_cast<double>(m) * 100.0 >= target) return values[m - 1];
    return values.back();
}

// Percentile-bootstrap confidence interval for the mean. Resampling indexes
// come from SplitMix64 multiply-shift reduction, so intervals reproduce
// bit-for-bit for a fixed seed on every platform.
inline std::pair<double, double> bootstrap_ci(const std::vector<double>& values, double level,
                                              int resamples, std::uint64_t seed) {
    if (values.empty()) fail(errc::empty_input, "bootstrap over an empty sample");
    if (!(level > 0.0 && level < 1.0))
        fail(errc::invalid_spec, "confidence level must lie in (0,1), got " + std::to_string(level));
    if (resamples < 1) fail(errc::invalid_spec, "resample count must be at least 1");
    SplitMix64 rng(seed);
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(resamples));
    auto n = values.size();
    for (int r = 0; r < resamples; ++r) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += values[rng.next_below(n)];
        means.push_back(sum / static_cast<double>(n));
    }
    double tail = (1.0 - level) / 2.0 * 100.0;
    double lo = nearest_rank_percentile(means, tail);
    double hi = nearest_rank_percentile(means, 100.0 - tail);
    return {lo, hi};
}

// Spearman rank correlation with average ranks for ties.
inline double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size())
        fail(errc::length_mismatch, "series of lengths " + std::to_string(xs.size()) + " and " +
                                        std::to_string(ys.size()));
    if (xs.size() < 2) fail(errc::empty_input, "rank correlation needs at least two points");
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
            double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    auto rx = ranks(xs), ry = ranks(ys);
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
    double cov = 0, vx = 0, vy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx) * (rx[i] - mx);
        vy += (ry[i] - my) * (ry[i] - my);
    }
    if (vx == 0.0 || vy == 0.0)
        fail(errc::degenerate, "rank correlation undefined when a series is constant");
    return cov / std::sqrt(vx * vy);
}

}  // namespace sdp
