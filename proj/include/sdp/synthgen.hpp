#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "sdp/calibrate.hpp"
#include "sdp/core.hpp"
#include "sdp/embed.hpp"
#include "sdp/error.hpp"
#include "sdp/pipeline.hpp"
#include "sdp/util.hpp"

namespace sdp {

// ---------------------------------------------------------------------------
// Corpus specification
// ---------------------------------------------------------------------------

struct CorpusSpec {
    int num_docs = 10;
    int topics = 3;           // k
    int segments_per_doc = 12;
    int run_length = 3;       // consecutive segments per topic before switching
    double mu = 0.2;          // planted cross-topic anchor cosine
    double sigma = 0.0;       // per-text noise scale
    int dim = 8;
    std::uint64_t seed = 1;
    int tokens_per_segment = 6;
    int vocab_per_topic = 12;
    double vocab_overlap = 0.0;  // fraction of shared tokens added to every pool

    void validate() const {
        if (num_docs < 1) fail(errc::invalid_spec, "corpus needs at least one document");
        if (topics < 1) fail(errc::invalid_spec, "corpus needs at least one topic");
        if (segments_per_doc < 1) fail(errc::invalid_spec, "documents need at least one segment");
        if (run_length < 1) fail(errc::invalid_spec, "run length must be at least 1");
        if (!(mu >= 0.0 && mu < 1.0)) fail(errc::invalid_spec, "mu must lie in [0,1)");
        if (sigma < 0.0) fail(errc::invalid_spec, "sigma must be non-negative");
        if (dim < topics + 1)
            fail(errc::invalid_spec, "dim must be at least topics+1 for the anchor construction");
        if (tokens_per_segment < 1) fail(errc::invalid_spec, "segments need at least one token");
        if (vocab_per_topic < 1) fail(errc::invalid_spec, "vocab pools need at least one token");
        if (!(vocab_overlap >= 0.0 && vocab_overlap <= 1.0))
            fail(errc::invalid_spec, "vocab overlap must lie in [0,1]");
    }
};

struct SyntheticCorpus {
    std::vector<Document> documents;
    AnnotationSet annotations;  // planted boundaries, two identical annotators
    AnchorEmbedderConfig embedder;
    std::vector<TopicLabel> topic_labels;
};

namespace detail {

inline std::string topic_label(int t) {
    std::string label = "topic_";
    // a..z, then aa, ab, ... for larger k
    int x = t;
    std::string suffix;
    do {
        suffix.insert(suffix.begin(), static_cast<char>('a' + x % 26));
        x = x / 26 - 1;
    } while (x >= 0);
    return label + suffix;
}

inline std::string vocab_token(int topic, int j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "term_%s_%02d", topic_label(topic).c_str() + 6, j);
    return buf;
}

inline std::string shared_token(int j) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "shared_%02d", j);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Generator
//
// Every document cycles through the k topics in runs of run_length segments,
// starting at (doc_index mod k) so the corpus is topic-balanced. A segment's
// text is its topic label followed by tokens_per_segment-1 draws from the
// topic's vocabulary pool, sampled by a SplitMix64 stream seeded from
// (spec.seed, doc index), so generation is order-independent across documents
// and reproducible everywhere. Planted boundaries are exactly the topic-change
// gaps; the annotation set carries them twice (two perfectly agreeing
// annotators), which makes the agreement gate pass by construction.
// ---------------------------------------------------------------------------

inline SyntheticCorpus generate_corpus(const CorpusSpec& spec) {
    spec.validate();
    SyntheticCorpus corpus;
    for (int t = 0; t < spec.topics; ++t) corpus.topic_labels.push_back(detail::topic_label(t));

    std::vector<std::vector<std::string>> pools(static_cast<std::size_t>(spec.topics));
    int shared = static_cast<int>(std::llround(spec.vocab_overlap * spec.vocab_per_topic));
    for (int t = 0; t < spec.topics; ++t) {
        for (int j = 0; j < spec.vocab_per_topic; ++j)
            pools[static_cast<std::size_t>(t)].push_back(detail::vocab_token(t, j));
        for (int j = 0; j < shared; ++j)
            pools[static_cast<std::size_t>(t)].push_back(detail::shared_token(j));
    }

    const char* doc_types[] = {"normative", "procedural", "reference", "computational"};
    for (int d = 0; d < spec.num_docs; ++d) {
        SplitMix64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(d)));
        Document doc;
        char idbuf[16];
        std::snprintf(idbuf, sizeof idbuf, "doc_%04d", d + 1);
        doc.id = idbuf;
        doc.title = "Synthetic Document " + std::to_string(d + 1);
        doc.doc_type = parse_doc_type(doc_types[d % 4]);
        doc.metadata["geographic"] = "region_" + std::to_string(d % 3);
        doc.metadata["temporal"] = "2025";
        doc.metadata["persona"] = "agent";

        BoundarySet planted;
        int start_topic = d % spec.topics;
        for (int s = 0; s < spec.segments_per_doc; ++s) {
            int run = s / spec.run_length;
            int topic = (start_topic + run) % spec.topics;
            if (s > 0 && topic != (start_topic + (s - 1) / spec.run_length) % spec.topics)
                planted.push_back(s);  // 1-based gap before segment position s+1

            const auto& pool = pools[static_cast<std::size_t>(topic)];
            std::string text = corpus.topic_labels[static_cast<std::size_t>(topic)];
            for (int w = 1; w < spec.tokens_per_segment; ++w) {
                text.push_back(' ');
                text += pool[rng.next_below(pool.size())];
            }

            Segment seg;
            seg.doc_id = doc.id;
            seg.index = s;
            seg.text = text;
            seg.token_count = spec.tokens_per_segment;
            seg.topic = corpus.topic_labels[static_cast<std::size_t>(topic)];
            doc.segments.push_back(std::move(seg));
        }
        corpus.annotations.by_doc[doc.id] = {planted, planted};
        corpus.documents.push_back(std::move(doc));
    }

    corpus.embedder.dim = spec.dim;
    corpus.embedder.topics = corpus.topic_labels;
    corpus.embedder.cross_topic_sim = spec.mu;
    corpus.embedder.noise_scale = spec.sigma;
    corpus.embedder.seed = spec.seed;
    corpus.embedder.validate();
    return corpus;
}

// Topic-flavored queries: label plus two vocabulary draws of the same topic,
// round-robin over topics. Tag carries the expected topic.
inline std::vector<ExampleQuery> generate_queries(const CorpusSpec& spec, int count,
                                                  std::uint64_t seed) {
    spec.validate();
    if (count < 0) fail(errc::invalid_spec, "query count must be non-negative");
    SplitMix64 rng(mix_seed(seed, 0x71c4));
    std::vector<ExampleQuery> queries;
    for (int q = 0; q < count; ++q) {
        int topic = q % spec.topics;
        std::string text = detail::topic_label(topic);
        for (int w = 0; w < 2; ++w) {
            text.push_back(' ');
            text += detail::vocab_token(topic,
                                        static_cast<int>(rng.next_below(
                                            static_cast<std::uint64_t>(spec.vocab_per_topic))));
        }
        queries.push_back({text, detail::topic_label(topic)});
    }
    return queries;
}

// Template header plus the fragment's dominant topic label as a trailing
// field. On anchor-embedder fixtures that trailing token is what pulls a
// knowledge object toward its topic anchor, so header-driven geometry shifts
// are observable. Falls back to the plain template when no label occurs.
class TopicTagHeaderGenerator : public HeaderGenerator {
  public:
    explicit TopicTagHeaderGenerator(std::vector<TopicLabel> labels) : labels_(std::move(labels)) {}

    std::string generate(const std::string& fragment_text, const Document& parent,
                         const std::vector<ExampleQuery>& queries) const override {
        std::string base = template_gen_.generate(fragment_text, parent, queries);
        std::map<std::string, int> counts;
        for (const auto& tok : tokenize(fragment_text)) ++counts[tok];
        const std::string* dominant = nullptr;
        int best = 0;
        for (const auto& label : labels_) {
            auto it = counts.find(label);
            if (it != counts.end() && it->second > best) {
                best = it->second;
                dominant = &label;
            }
        }
        return dominant ? base + " — " + *dominant : base;
    }

  private:
    TemplateHeaderGenerator template_gen_;
    std::vector<TopicLabel> labels_;
};

}  // namespace sdp
