#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sdp/core.hpp"
#include "sdp/error.hpp"
#include "sdp/util.hpp"

namespace sdp {

using EmbeddingVector = std::vector<double>;

inline double vector_norm(const EmbeddingVector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline EmbeddingVector normalize(EmbeddingVector v) {
    double n = vector_norm(v);
    if (n == 0.0) fail(errc::zero_vector, "cannot normalize the zero vector");
    for (double& x : v) x /= n;
    return v;
}

// Cosine similarity, clamped into [-1, 1] to absorb rounding.
inline double cosine_sim(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size())
        fail(errc::dim_mismatch, "cosine of " + std::to_string(a.size()) + "-dim and " +
                                     std::to_string(b.size()) + "-dim vectors");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) fail(errc::zero_vector, "cosine of a zero vector is undefined");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Embedder interface
// ---------------------------------------------------------------------------

class Embedder {
  public:
    virtual ~Embedder() = default;
    virtual int dim() const = 0;
    virtual EmbeddingVector embed(const std::string& text) const = 0;
    // Segment-aware hook; the default just embeds the text.
    virtual EmbeddingVector embed_segment(const Segment& segment) const { return embed(segment.text); }
};

inline std::vector<EmbeddingVector> embed_segments(const Document& doc, const Embedder& embedder) {
    std::vector<EmbeddingVector> out;
    out.reserve(doc.segments.size());
    for (const Segment& seg : doc.segments) {
        try {
            out.push_back(embedder.embed_segment(seg));
        } catch (const error& e) {
            fail(e.code(), std::string(e.what()) + " (doc '" + doc.id + "' segment index " +
                               std::to_string(seg.index) + ")");
        }
        if (static_cast<int>(out.back().size()) != embedder.dim())
            fail(errc::dim_mismatch, "embedder returned " + std::to_string(out.back().size()) +
                                         " dims, declared " + std::to_string(embedder.dim()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Table embedder: exact text -> vector lookup, for fixtures and replay.
// ---------------------------------------------------------------------------

enum class TableFallback { error_out, zero_vector };

class TableEmbedder : public Embedder {
  public:
    TableEmbedder(int dim, std::map<std::string, EmbeddingVector> entries,
                  TableFallback fallback = TableFallback::error_out)
        : dim_(dim), entries_(std::move(entries)), fallback_(fallback) {
        if (dim_ <= 0) fail(errc::invalid_spec, "table embedder dimension must be positive");
        for (const auto& [text, vec] : entries_)
            if (static_cast<int>(vec.size()) != dim_)
                fail(errc::dim_mismatch, "table entry for '" + text + "' has " +
                                             std::to_string(vec.size()) + " dims, expected " +
                                             std::to_string(dim_));
    }

    int dim() const override { return dim_; }

    EmbeddingVector embed(const std::string& text) const override {
        auto it = entries_.find(text);
        if (it != entries_.end()) return it->second;
        if (fallback_ == TableFallback::zero_vector)
            return EmbeddingVector(static_cast<std::size_t>(dim_), 0.0);
        fail(errc::unknown_text, "no embedding table entry for text '" + text + "'");
    }

  private:
    int dim_;
    std::map<std::string, EmbeddingVector> entries_;
    TableFallback fallback_;
};

// ---------------------------------------------------------------------------
// Precomputed per-segment vectors keyed "doc_id#index" (external model runs).
// ---------------------------------------------------------------------------

class PrecomputedEmbedder : public Embedder {
  public:
    PrecomputedEmbedder(int dim, std::map<std::string, EmbeddingVector> by_segment)
        : dim_(dim), by_segment_(std::move(by_segment)) {
        if (dim_ <= 0) fail(errc::invalid_spec, "precomputed embedder dimension must be positive");
    }

    static std::string key(const std::string& doc_id, int index) {
        return doc_id + "#" + std::to_string(index);
    }

    int dim() const override { return dim_; }

    EmbeddingVector embed(const std::string&) const override {
        fail(errc::unknown_text, "precomputed vectors are keyed by segment, not by free text");
    }

    EmbeddingVector embed_segment(const Segment& segment) const override {
        auto it = by_segment_.find(key(segment.doc_id, segment.index));
        if (it == by_segment_.end())
            fail(errc::unknown_segment, "no precomputed vector for " + key(segment.doc_id, segment.index));
        return it->second;
    }

  private:
    int dim_;
    std::map<std::string, EmbeddingVector> by_segment_;
};

// ---------------------------------------------------------------------------
// Anchor embedder
//
// Synthetic geometry with controllable cross-topic similarity. Topic i gets
// the unit anchor a_i = sqrt(1-mu)*e_i + sqrt(mu)*g, where g is a reserved
// extra axis shared by all topics, so cos(a_i, a_j) = mu exactly for i != j.
// Free text embeds by counting topic-label tokens: with c_t occurrences of
// label t and C their total,
//
//   v = sqrt(1-mu) * sum_t c_t e_t  +  sqrt(mu) * sqrt(C) * g  +  sigma * u(text)
//
// normalized. The shared axis grows like sqrt(C) while topic axes grow like
// c_t, so stacking one topic's label k times drives the cross-topic cosine of
// pure texts down to mu / ((1-mu)k + mu); that is the lever header synthesis
// relies on. Text with no label tokens embeds as pure seeded noise.
// ---------------------------------------------------------------------------

struct AnchorEmbedderConfig {
    int dim = 8;
    std::vector<TopicLabel> topics;
    double cross_topic_sim = 0.2;  // mu, pairwise anchor cosine
    double noise_scale = 0.0;      // sigma
    std::uint64_t seed = 1;

    void validate() const {
        if (topics.empty()) fail(errc::invalid_spec, "anchor embedder needs at least one topic");
        if (dim < static_cast<int>(topics.size()) + 1)
            fail(errc::invalid_spec, "anchor embedder dim must be at least topics+1 (" +
                                         std::to_string(topics.size() + 1) + "), got " +
                                         std::to_string(dim));
        if (!(cross_topic_sim >= 0.0 && cross_topic_sim < 1.0))
            fail(errc::invalid_spec, "cross-topic similarity must lie in [0,1)");
        if (noise_scale < 0.0) fail(errc::invalid_spec, "noise scale must be non-negative");
        std::set<std::string> unique(topics.begin(), topics.end());
        if (unique.size() != topics.size()) fail(errc::invalid_spec, "topic labels must be unique");
        for (const auto& t : topics)
            if (t.empty()) fail(errc::invalid_spec, "topic labels must be non-empty");
    }
};

class AnchorTextEmbedder : public Embedder {
  public:
    explicit AnchorTextEmbedder(AnchorEmbedderConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        for (std::size_t i = 0; i < cfg_.topics.size(); ++i) {
            std::string lowered;
            for (char ch : cfg_.topics[i])
                lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
            topic_index_[lowered] = i;
        }
    }

    const AnchorEmbedderConfig& config() const { return cfg_; }

    int dim() const override { return cfg_.dim; }

    // Exact unit anchor for a topic label.
    EmbeddingVector anchor(const TopicLabel& topic) const {
        auto it = index_of(topic);
        if (!it) fail(errc::unknown_topic, "no anchor for topic '" + topic + "'");
        EmbeddingVector v(static_cast<std::size_t>(cfg_.dim), 0.0);
        v[*it] = std::sqrt(1.0 - cfg_.cross_topic_sim);
        v[shared_axis()] = std::sqrt(cfg_.cross_topic_sim);
        return v;
    }

    EmbeddingVector embed(const std::string& text) const override {
        EmbeddingVector v(static_cast<std::size_t>(cfg_.dim), 0.0);
        double total = 0.0;
        for (const auto& token : tokenize(text)) {
            auto it = topic_index_.find(token);
            if (it == topic_index_.end()) continue;
            v[it->second] += std::sqrt(1.0 - cfg_.cross_topic_sim);
            total += 1.0;
        }
        if (total > 0.0) v[shared_axis()] = std::sqrt(cfg_.cross_topic_sim) * std::sqrt(total);
        return finish(std::move(v), text, total > 0.0);
    }

    // Segments carrying a ground-truth topic use that topic's anchor exactly,
    // so corpus geometry matches the configured similarities; untagged
    // segments fall back to the text path.
    EmbeddingVector embed_segment(const Segment& segment) const override {
        if (segment.topic && index_of(*segment.topic)) {
            EmbeddingVector v = anchor(*segment.topic);
            return finish(std::move(v), segment.text, true);
        }
        return embed(segment.text);
    }

  private:
    std::optional<std::size_t> index_of(const TopicLabel& topic) const {
        std::string lowered;
        for (char ch : topic)
            lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        auto it = topic_index_.find(lowered);
        if (it == topic_index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t shared_axis() const { return cfg_.topics.size(); }

    EmbeddingVector finish(EmbeddingVector v, const std::string& text, bool has_signal) const {
        if (cfg_.noise_scale > 0.0) {
            auto noise = unit_noise_vector(text, cfg_.seed, cfg_.dim);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] += cfg_.noise_scale * noise[i];
        } else if (!has_signal) {
            // No label tokens and no noise channel: fall back to pure seeded
            // noise rather than returning an unusable zero vector.
            return unit_noise_vector(text, cfg_.seed, cfg_.dim);
        }
        return normalize(std::move(v));
    }

    AnchorEmbedderConfig cfg_;
    std::map<std::string, std::size_t> topic_index_;
};

// Embed a text as a known topic: anchor plus scaled per-text noise, normalized.
inline EmbeddingVector anchor_embed(const TopicLabel& topic, const std::string& text,
                                    const AnchorEmbedderConfig& cfg) {
    AnchorTextEmbedder e(cfg);
    EmbeddingVector v = e.anchor(topic);
    if (cfg.noise_scale > 0.0) {
        auto noise = unit_noise_vector(text, cfg.seed, cfg.dim);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += cfg.noise_scale * noise[i];
    }
    return normalize(std::move(v));
}

}  // namespace sdp
