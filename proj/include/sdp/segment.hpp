#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "sdp/core.hpp"
#include "sdp/embed.hpp"
#include "sdp/error.hpp"

namespace sdp {

// Similarity profile: cosine between consecutive segment embeddings. Entry
// g-1 covers the gap between segments g and g+1 (gaps are 1-based, 1..n-1).
using SimilarityProfile = std::vector<double>;

// Sorted unique 1-based gap positions.
using BoundarySet = std::vector<int>;

inline SimilarityProfile similarity_profile(const std::vector<EmbeddingVector>& vectors) {
    SimilarityProfile profile;
    if (vectors.size() < 2) return profile;
    profile.reserve(vectors.size() - 1);
    for (std::size_t i = 0; i + 1 < vectors.size(); ++i) {
        try {
            profile.push_back(cosine_sim(vectors[i], vectors[i + 1]));
        } catch (const error& e) {
            fail(e.code(), std::string(e.what()) + " (gap " + std::to_string(i + 1) + ")");
        }
    }
    return profile;
}

inline void check_theta(double theta) {
    if (!(theta > 0.0 && theta < 1.0))
        fail(errc::theta_out_of_range, "theta must lie strictly inside (0,1), got " + std::to_string(theta));
}

// A gap is a boundary exactly when its similarity falls strictly below theta.
inline BoundarySet detect_boundaries(const SimilarityProfile& profile, double theta) {
    check_theta(theta);
    BoundarySet gaps;
    for (std::size_t i = 0; i < profile.size(); ++i)
        if (profile[i] < theta) gaps.push_back(static_cast<int>(i) + 1);
    return gaps;
}

// A contiguous run of segments produced by boundary detection. Spans are
// 1-based inclusive segment positions; text is the member texts joined by
// newlines. boundary_confidence scores the gap that opened the fragment
// (clamped theta - sim), 1.0 at the start of the document.
struct Fragment {
    std::string doc_id;
    int span_start = 0;
    int span_end = 0;
    std::string text;
    int token_count = 0;
    int depth = 0;
    double boundary_confidence = 1.0;
    std::vector<int> member_indexes;  // segment index fields, in order
    std::optional<TopicLabel> majority_topic;
};

namespace detail {

inline Fragment make_fragment(const Document& doc, int start, int end, int depth, double confidence) {
    Fragment f;
    f.doc_id = doc.id;
    f.span_start = start;
    f.span_end = end;
    f.depth = depth;
    f.boundary_confidence = confidence;
    std::map<TopicLabel, int> votes;
    std::vector<TopicLabel> order;
    for (int pos = start; pos <= end; ++pos) {
        const Segment& seg = doc.segments[static_cast<std::size_t>(pos - 1)];
        if (!f.text.empty()) f.text.push_back('\n');
        f.text += seg.text;
        f.token_count += seg.token_count;
        f.member_indexes.push_back(seg.index);
        if (seg.topic && !seg.topic->empty()) {
            if (votes[*seg.topic]++ == 0) order.push_back(*seg.topic);
        }
    }
    // Majority label of the members; ties go to the label seen first.
    int best = 0;
    for (const auto& label : order)
        if (votes[label] > best) {
            best = votes[label];
            f.majority_topic = label;
        }
    return f;
}

// Splits [start,end] at every detected boundary; pieces take `piece_depth`.
// Returns false when no boundary exists in the range.
inline bool split_once(const Document& doc, const std::vector<EmbeddingVector>& vectors, int start,
                       int end, int piece_depth, double opening_confidence, double theta,
                       std::vector<Fragment>& pieces) {
    std::vector<EmbeddingVector> window(vectors.begin() + (start - 1), vectors.begin() + end);
    BoundarySet local = detect_boundaries(similarity_profile(window), theta);
    if (local.empty()) return false;

    int piece_start = start;
    double piece_conf = opening_confidence;
    for (int gap : local) {
        int absolute = start - 1 + gap;  // local gap g splits after segment (start-1+g)
        pieces.push_back(make_fragment(doc, piece_start, absolute, piece_depth, piece_conf));
        double sim = cosine_sim(vectors[static_cast<std::size_t>(absolute - 1)],
                                vectors[static_cast<std::size_t>(absolute)]);
        piece_start = absolute + 1;
        piece_conf = std::clamp(theta - sim, 0.0, 1.0);
    }
    pieces.push_back(make_fragment(doc, piece_start, end, piece_depth, piece_conf));
    return true;
}

// A fragment keeps the depth at which its extent was fixed: re-examination
// that finds nothing does not deepen it. Floors gate refinement only; a
// fragment is re-split while it exceeds the token floor and holds at least
// three segments.
inline void refine(const Document& doc, const std::vector<EmbeddingVector>& vectors,
                   Fragment fragment, double theta, int l_min, std::vector<Fragment>& out) {
    int segs = fragment.span_end - fragment.span_start + 1;
    if (fragment.token_count > l_min && segs >= 3) {
        std::vector<Fragment> pieces;
        if (split_once(doc, vectors, fragment.span_start, fragment.span_end, fragment.depth + 1,
                       fragment.boundary_confidence, theta, pieces)) {
            for (auto& piece : pieces) refine(doc, vectors, std::move(piece), theta, l_min, out);
            return;
        }
    }
    out.push_back(std::move(fragment));
}

}  // namespace detail

// Recursive boundary refinement over per-segment embeddings. The top level
// always splits at every detected boundary; resulting pieces are re-examined
// (same theta, same vectors) while they stay above the token floor and hold
// at least three segments. Depth counts how many refinement levels produced
// a fragment.
inline std::vector<Fragment> recursive_segment(const Document& doc,
                                               const std::vector<EmbeddingVector>& vectors,
                                               double theta, int l_min) {
    check_theta(theta);
    if (l_min < 1) fail(errc::invalid_spec, "token floor must be at least 1");
    if (vectors.size() != doc.segments.size())
        fail(errc::length_mismatch, "doc '" + doc.id + "' has " + std::to_string(doc.segments.size()) +
                                        " segments but " + std::to_string(vectors.size()) + " vectors");
    std::vector<Fragment> out;
    int n = static_cast<int>(doc.segments.size());
    if (n == 0) return out;
    // Top-level pass is unconditional (no floors) and yields depth-0 pieces.
    std::vector<Fragment> pieces;
    if (!detail::split_once(doc, vectors, 1, n, 0, 1.0, theta, pieces))
        pieces.push_back(detail::make_fragment(doc, 1, n, 0, 1.0));
    for (auto& piece : pieces) detail::refine(doc, vectors, std::move(piece), theta, l_min, out);
    return out;
}

// Fixed-size chunking baseline: consecutive windows of `window` segments,
// last chunk possibly short. Depth 0, confidence 1 throughout.
inline std::vector<Fragment> fixed_window_fragments(const Document& doc, int window) {
    if (window < 1) fail(errc::invalid_spec, "window must be at least 1");
    std::vector<Fragment> out;
    int n = static_cast<int>(doc.segments.size());
    for (int start = 1; start <= n; start += window)
        out.push_back(detail::make_fragment(doc, start, std::min(n, start + window - 1), 0, 1.0));
    return out;
}

}  // namespace sdp
