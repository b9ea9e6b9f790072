#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sdp/core.hpp"
#include "sdp/error.hpp"
#include "sdp/metrics.hpp"
#include "sdp/segment.hpp"

namespace sdp {

// Per-document boundary annotations: each annotator contributes one boundary
// set (1-based gap positions) per document.
struct AnnotationSet {
    std::map<std::string, std::vector<BoundarySet>> by_doc;
};

struct GateResult {
    double kappa = 0.0;
    bool kappa_pass = false;
    std::map<std::string, BoundarySet> consensus;
    int annotators = 0;
};

inline constexpr double kKappaGate = 0.80;

namespace detail {

inline const Document& doc_by_id(const std::vector<Document>& docs, const std::string& id) {
    for (const auto& d : docs)
        if (d.id == id) return d;
    fail(errc::unknown_document, "annotations reference unknown document '" + id + "'");
}

inline BoundarySet canonical_gaps(BoundarySet gaps, int n_segments, const std::string& doc_id) {
    std::sort(gaps.begin(), gaps.end());
    gaps.erase(std::unique(gaps.begin(), gaps.end()), gaps.end());
    for (int g : gaps)
        if (g < 1 || g >= n_segments)
            fail(errc::gap_out_of_range, "doc '" + doc_id + "' gap " + std::to_string(g) +
                                             " outside 1.." + std::to_string(n_segments - 1));
    return gaps;
}

}  // namespace detail

// Strict-majority consensus boundaries per document (with two annotators both
// must agree). Validates gap ranges against each document's segment count.
inline std::map<std::string, BoundarySet> consensus_boundaries(const AnnotationSet& annotations,
                                                               const std::vector<Document>& docs) {
    std::map<std::string, BoundarySet> consensus;
    for (const auto& [doc_id, annotators] : annotations.by_doc) {
        const Document& doc = detail::doc_by_id(docs, doc_id);
        int n = static_cast<int>(doc.segments.size());
        if (annotators.size() < 2)
            fail(errc::too_few_annotators, "doc '" + doc_id + "' has " +
                                               std::to_string(annotators.size()) +
                                               " annotators, need at least 2");
        std::map<int, int> votes;
        for (const auto& raw : annotators)
            for (int g : detail::canonical_gaps(raw, n, doc_id)) ++votes[g];
        BoundarySet agreed;
        for (const auto& [gap, count] : votes)
            if (2 * count > static_cast<int>(annotators.size())) agreed.push_back(gap);
        consensus[doc_id] = agreed;
    }
    return consensus;
}

// Agreement gate: Cohen's kappa over per-gap yes/no marks pooled across all
// annotated documents. With two annotators that is the pair itself; with more,
// the mean over all annotator pairs. Annotator counts must match across
// documents so rater columns line up.
inline GateResult gate_annotations(const AnnotationSet& annotations, const std::vector<Document>& docs) {
    if (annotations.by_doc.empty())
        fail(errc::empty_calibration_set, "no annotated documents to gate");
    int annotators = -1;
    for (const auto& [doc_id, lists] : annotations.by_doc) {
        if (lists.size() < 2)
            fail(errc::too_few_annotators, "doc '" + doc_id + "' has " + std::to_string(lists.size()) +
                                               " annotators, need at least 2");
        if (annotators == -1) annotators = static_cast<int>(lists.size());
        if (annotators != static_cast<int>(lists.size()))
            fail(errc::too_few_annotators,
                 "annotator count differs across documents (doc '" + doc_id + "')");
    }

    // One boolean per (document, gap) per annotator, pooled corpus-wide.
    std::vector<std::vector<bool>> marks(static_cast<std::size_t>(annotators));
    for (const auto& [doc_id, lists] : annotations.by_doc) {
        const Document& doc = detail::doc_by_id(docs, doc_id);
        int n = static_cast<int>(doc.segments.size());
        std::vector<std::set<int>> sets;
        for (const auto& raw : lists) {
            auto canon = detail::canonical_gaps(raw, n, doc_id);
            sets.emplace_back(canon.begin(), canon.end());
        }
        for (int g = 1; g <= n - 1; ++g)
            for (int a = 0; a < annotators; ++a)
                marks[static_cast<std::size_t>(a)].push_back(
                    sets[static_cast<std::size_t>(a)].count(g) > 0);
    }
    if (marks[0].empty())
        fail(errc::empty_calibration_set, "annotated documents expose no gaps (all single-segment)");

    GateResult result;
    result.annotators = annotators;
    if (annotators == 2) {
        result.kappa = cohen_kappa(marks[0], marks[1]);
    } else {
        double sum = 0.0;
        int pairs = 0;
        for (int a = 0; a < annotators; ++a)
            for (int b = a + 1; b < annotators; ++b) {
                sum += cohen_kappa(marks[static_cast<std::size_t>(a)], marks[static_cast<std::size_t>(b)]);
                ++pairs;
            }
        result.kappa = sum / pairs;
    }
    result.kappa_pass = result.kappa > kKappaGate;
    result.consensus = consensus_boundaries(annotations, docs);
    return result;
}

// ---------------------------------------------------------------------------
// Threshold sweep
// ---------------------------------------------------------------------------

struct SweepRow {
    double theta = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct CalibrationResult {
    double theta_star = 0.0;
    double f1_at_theta_star = 0.0;
    double kappa = 0.0;
    bool kappa_pass = false;
    std::vector<SweepRow> sweep;
    std::optional<double> alpha;
    std::optional<double> holdout_f1;
};

struct ThetaGrid {
    double lo = 0.50;
    double hi = 0.90;
    double step = 0.02;

    std::vector<double> points() const {
        if (!(step > 0.0) || hi < lo) fail(errc::invalid_spec, "malformed theta grid");
        int count = static_cast<int>(std::llround((hi - lo) / step)) + 1;
        std::vector<double> pts;
        pts.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) pts.push_back(lo + step * i);
        if (!pts.empty() && pts.back() > hi + 1e-9) pts.pop_back();
        return pts;
    }
};

// Sweeps theta over the grid, scoring micro-averaged boundary F1 against the
// consensus (boundary counts pooled over documents, then one P/R/F1). theta*
// is the center of the longest contiguous run of grid points achieving the
// maximum F1; ties between runs and even-length centers both resolve toward
// the lower theta. Refuses to run when the agreement gate failed unless
// force is set.
inline CalibrationResult sweep_theta(const std::vector<Document>& docs,
                                     const std::vector<std::vector<EmbeddingVector>>& vectors_per_doc,
                                     const GateResult& gate, const ThetaGrid& grid = {},
                                     bool force = false) {
    if (!gate.kappa_pass && !force)
        fail(errc::calibration_gate_failed,
             "annotator agreement kappa " + std::to_string(gate.kappa) + " is not above " +
                 std::to_string(kKappaGate) + "; re-annotate or pass force");
    if (docs.empty()) fail(errc::empty_calibration_set, "no documents to sweep");
    if (docs.size() != vectors_per_doc.size())
        fail(errc::length_mismatch, std::to_string(docs.size()) + " docs vs " +
                                        std::to_string(vectors_per_doc.size()) + " embedding lists");

    std::vector<SimilarityProfile> profiles;
    profiles.reserve(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        if (vectors_per_doc[d].size() != docs[d].segments.size())
            fail(errc::length_mismatch, "doc '" + docs[d].id + "' segment/vector count mismatch");
        profiles.push_back(similarity_profile(vectors_per_doc[d]));
    }

    CalibrationResult result;
    result.kappa = gate.kappa;
    result.kappa_pass = gate.kappa_pass;

    for (double theta : grid.points()) {
        long long matched = 0, detected = 0, truth = 0;
        for (std::size_t d = 0; d < docs.size(); ++d) {
            BoundarySet det = detect_boundaries(profiles[d], theta);
            BoundarySet ref;
            if (auto it = gate.consensus.find(docs[d].id); it != gate.consensus.end()) ref = it->second;
            SegmentationScore s = boundary_f1(det, ref, static_cast<int>(docs[d].segments.size()));
            matched += s.matched;
            detected += s.detected_count;
            truth += s.true_count;
        }
        SweepRow row;
        row.theta = theta;
        row.precision = detected == 0 ? (truth == 0 ? 1.0 : 0.0)
                                      : static_cast<double>(matched) / static_cast<double>(detected);
        row.recall = truth == 0 ? (detected == 0 ? 1.0 : 0.0)
                                : static_cast<double>(matched) / static_cast<double>(truth);
        row.f1 = (row.precision + row.recall) == 0.0
                     ? 0.0
                     : 2.0 * row.precision * row.recall / (row.precision + row.recall);
        result.sweep.push_back(row);
    }

    // Longest contiguous run of argmax-F1 points; the micro counts are
    // integers so equal scores compare exactly.
    double best_f1 = 0.0;
    for (const auto& row : result.sweep) best_f1 = std::max(best_f1, row.f1);
    std::size_t run_start = 0, run_len = 0, best_start = 0, best_len = 0;
    for (std::size_t i = 0; i <= result.sweep.size(); ++i) {
        if (i < result.sweep.size() && result.sweep[i].f1 == best_f1) {
            if (run_len == 0) run_start = i;
            ++run_len;
        } else {
            if (run_len > best_len) {
                best_len = run_len;
                best_start = run_start;
            }
            run_len = 0;
        }
    }
    std::size_t center = best_start + (best_len - 1) / 2;  // even runs round down
    result.theta_star = result.sweep[center].theta;
    result.f1_at_theta_star = result.sweep[center].f1;
    return result;
}

// Scores theta* on held-out documents against their own consensus. The two
// document sets must not overlap.
inline double validate_holdout(double theta_star, const std::vector<Document>& calibration_docs,
                               const std::vector<Document>& holdout_docs,
                               const std::vector<std::vector<EmbeddingVector>>& holdout_vectors,
                               const AnnotationSet& holdout_annotations) {
    check_theta(theta_star);
    if (holdout_docs.empty()) fail(errc::empty_calibration_set, "empty holdout set");
    if (holdout_docs.size() != holdout_vectors.size())
        fail(errc::length_mismatch, "holdout docs vs embedding lists");
    std::set<std::string> calib_ids;
    for (const auto& d : calibration_docs) calib_ids.insert(d.id);
    for (const auto& d : holdout_docs)
        if (calib_ids.count(d.id))
            fail(errc::overlapping_sets, "doc '" + d.id + "' appears in both calibration and holdout");

    auto consensus = consensus_boundaries(holdout_annotations, holdout_docs);
    long long matched = 0, detected = 0, truth = 0;
    for (std::size_t d = 0; d < holdout_docs.size(); ++d) {
        BoundarySet det = detect_boundaries(similarity_profile(holdout_vectors[d]), theta_star);
        BoundarySet ref;
        if (auto it = consensus.find(holdout_docs[d].id); it != consensus.end()) ref = it->second;
        SegmentationScore s = boundary_f1(det, ref, static_cast<int>(holdout_docs[d].segments.size()));
        matched += s.matched;
        detected += s.detected_count;
        truth += s.true_count;
    }
    double precision = detected == 0 ? (truth == 0 ? 1.0 : 0.0)
                                     : static_cast<double>(matched) / static_cast<double>(detected);
    double recall = truth == 0 ? (detected == 0 ? 1.0 : 0.0)
                               : static_cast<double>(matched) / static_cast<double>(truth);
    return (precision + recall) == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

// alpha = nearest-rank 90th percentile of the similarities of all cross-topic
// segment pairs in the corpus (pairs pooled across documents, inter-document
// pairs included). Unlabeled segments don't participate.
inline double calibrate_alpha(const std::vector<Document>& docs,
                              const std::vector<std::vector<EmbeddingVector>>& vectors_per_doc) {
    if (docs.size() != vectors_per_doc.size())
        fail(errc::length_mismatch, "docs vs embedding lists");
    std::vector<TopicLabel> labels;
    std::vector<const EmbeddingVector*> vecs;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        if (vectors_per_doc[d].size() != docs[d].segments.size())
            fail(errc::length_mismatch, "doc '" + docs[d].id + "' segment/vector count mismatch");
        for (std::size_t s = 0; s < docs[d].segments.size(); ++s) {
            const auto& topic = docs[d].segments[s].topic;
            if (!topic || topic->empty()) continue;
            labels.push_back(*topic);
            vecs.push_back(&vectors_per_doc[d][s]);
        }
    }
    std::vector<double> sims;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j)
            if (labels[i] != labels[j]) sims.push_back(cosine_sim(*vecs[i], *vecs[j]));
    if (sims.empty())
        fail(errc::no_cross_topic_pairs, "corpus holds no labeled cross-topic segment pairs");
    double alpha = nearest_rank_percentile(sims, 90.0);
    if (!(alpha > 0.0 && alpha < 1.0))
        fail(errc::alpha_degenerate, "90th percentile similarity " + std::to_string(alpha) +
                                         " leaves no usable alpha in (0,1)");
    return alpha;
}

}  // namespace sdp
