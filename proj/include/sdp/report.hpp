#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdp/calibrate.hpp"
#include "sdp/core.hpp"
#include "sdp/embed.hpp"
#include "sdp/knowledge_object.hpp"
#include "sdp/metrics.hpp"
#include "sdp/pipeline.hpp"
#include "sdp/segment.hpp"
#include "sdp/store.hpp"

// End-to-end evaluation: run the pipeline over a corpus, build pre- and
// post-pipeline stores, and compare entanglement and retrieval precision with
// bootstrap confidence intervals. Used by the `report` subcommand and the
// corpus-scale verification suite.

namespace sdp {

struct ReportOptions {
    double theta = 0.72;
    double alpha = 0.0;
    int l_min = 100;
    double beta = 0.20;
    int k = 5;
    int baseline_window = 6;  // fixed-size chunking baseline
    int bootstrap_resamples = 1000;
    double ci_level = 0.95;
    std::uint64_t bootstrap_seed = 42;
    std::vector<double> candidate_thetas;  // empty: pipeline default around theta
    DomainTaxonomy taxonomy;
};

struct MetricSummary {
    double mean = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    long long n = 0;
};

struct EvaluationReport {
    MetricSummary ei_before;
    MetricSummary ei_after;
    MetricSummary precision_before;
    MetricSummary precision_after;
    double theta = 0.0;
    double alpha = 0.0;
    int documents = 0;
    long long knowledge_objects = 0;
    int complete_documents = 0;  // ei_after <= beta
    bool all_faithful = true;
};

// Majority ground-truth topic over a 1-based inclusive span; empty when no
// member segment is labeled (ties go to the earliest label).
inline std::optional<TopicLabel> region_majority_topic(const Document& doc, int span_start,
                                                       int span_end) {
    std::map<TopicLabel, int> votes;
    std::vector<TopicLabel> order;
    for (int pos = span_start; pos <= span_end && pos <= static_cast<int>(doc.segments.size()); ++pos) {
        const auto& topic = doc.segments[static_cast<std::size_t>(pos - 1)].topic;
        if (!topic || topic->empty()) continue;
        if (votes[*topic]++ == 0) order.push_back(*topic);
    }
    std::optional<TopicLabel> best;
    int best_votes = 0;
    for (const auto& label : order)
        if (votes[label] > best_votes) {
            best_votes = votes[label];
            best = label;
        }
    return best;
}

// Fixed-window chunking baseline: each window becomes a bare retrieval object
// (no header, no cloning), embedded from its raw text.
inline std::pair<KnowledgeStore, std::map<std::string, TopicLabel>> baseline_store(
    const std::vector<Document>& docs, const Embedder& embedder, int window) {
    KnowledgeStore store;
    std::map<std::string, TopicLabel> topics;
    for (const auto& doc : docs)
        for (const auto& fragment : fixed_window_fragments(doc, window)) {
            KnowledgeObject ko;
            ko.id = knowledge_object_id(doc.id, fragment.span_start, fragment.span_end, "chunk");
            ko.header = "";
            ko.primary_text = fragment.text;
            ko.raw_fragment = fragment.text;
            ko.metadata["doc_type"] = doc_type_name(doc.doc_type);
            ko.provenance.source_doc_id = doc.id;
            ko.provenance.span_start = fragment.span_start;
            ko.provenance.span_end = fragment.span_end;
            ko.vector = embedder.embed(ko.primary_text);
            if (fragment.majority_topic) topics[ko.id] = *fragment.majority_topic;
            store.add(std::move(ko));
        }
    return {std::move(store), std::move(topics)};
}

struct PipelineRun {
    std::vector<DisentanglementOutcome> outcomes;  // one per document, corpus order
    KnowledgeStore store;
    std::map<std::string, TopicLabel> object_topics;
};

inline PipelineRun run_pipeline(const std::vector<Document>& docs,
                                const std::vector<std::vector<EmbeddingVector>>& vectors_per_doc,
                                const ContextProfile& psi, const PipelineConfig& config,
                                const Embedder& embedder, const HeaderGenerator& gen) {
    if (docs.size() != vectors_per_doc.size())
        fail(errc::length_mismatch, "docs vs embedding lists");
    PipelineRun run;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        auto outcome = disentangle_document(docs[d], vectors_per_doc[d], psi, config, embedder, gen);
        for (const auto& ko : outcome.knowledge_objects) {
            auto topic = region_majority_topic(docs[d], ko.provenance.span_start, ko.provenance.span_end);
            if (topic) run.object_topics[ko.id] = *topic;
            run.store.add(ko);
        }
        run.outcomes.push_back(std::move(outcome));
    }
    return run;
}

// Top-k precision of every query against a store: fraction of the k slots
// occupied by objects of the query's expected topic (missing slots and
// unlabeled objects count as misses).
inline std::vector<double> evaluate_queries(const KnowledgeStore& store,
                                            const std::map<std::string, TopicLabel>& object_topics,
                                            const std::vector<ExampleQuery>& queries,
                                            const Embedder& embedder, int k) {
    if (k <= 0) fail(errc::invalid_spec, "k must be positive");
    std::vector<double> precisions;
    precisions.reserve(queries.size());
    for (const auto& q : queries) {
        auto hits = store.query(embedder.embed(q.text), k);
        int relevant = 0;
        for (const auto& hit : hits) {
            auto it = object_topics.find(hit.id);
            if (it != object_topics.end() && it->second == q.tag) ++relevant;
        }
        precisions.push_back(static_cast<double>(relevant) / static_cast<double>(k));
    }
    return precisions;
}

inline MetricSummary summarize(const std::vector<double>& values, int resamples, double level,
                               std::uint64_t seed) {
    MetricSummary s;
    s.n = static_cast<long long>(values.size());
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    auto [lo, hi] = bootstrap_ci(values, level, resamples, seed);
    s.ci_lo = lo;
    s.ci_hi = hi;
    return s;
}

// Full before/after comparison. "Before" is the fixed-window baseline store
// and segment-level entanglement; "after" is the pipeline store and
// object-level entanglement reported by each document's outcome.
inline EvaluationReport run_report(const std::vector<Document>& docs,
                                   const std::vector<std::vector<EmbeddingVector>>& vectors_per_doc,
                                   const ContextProfile& psi, const std::vector<ExampleQuery>& queries,
                                   const ReportOptions& options, const Embedder& embedder,
                                   const HeaderGenerator& gen) {
    check_alpha(options.alpha);
    PipelineConfig config;
    config.theta = options.theta;
    config.l_min = options.l_min;
    config.alpha = options.alpha;
    config.beta = options.beta;
    config.candidate_thetas = options.candidate_thetas;
    config.taxonomy = options.taxonomy;

    PipelineRun run = run_pipeline(docs, vectors_per_doc, psi, config, embedder, gen);

    EvaluationReport report;
    report.theta = options.theta;
    report.alpha = options.alpha;
    report.documents = static_cast<int>(docs.size());

    std::vector<double> ei_before, ei_after;
    for (const auto& outcome : run.outcomes) {
        ei_before.push_back(outcome.ei_before);
        ei_after.push_back(outcome.ei_after);
        report.knowledge_objects += static_cast<long long>(outcome.knowledge_objects.size());
        if (outcome.complete) ++report.complete_documents;
        report.all_faithful = report.all_faithful && outcome.faithful;
    }
    report.ei_before = summarize(ei_before, options.bootstrap_resamples, options.ci_level,
                                 options.bootstrap_seed);
    report.ei_after = summarize(ei_after, options.bootstrap_resamples, options.ci_level,
                                options.bootstrap_seed + 1);

    if (!queries.empty()) {
        auto [base_store, base_topics] = baseline_store(docs, embedder, options.baseline_window);
        auto pre = evaluate_queries(base_store, base_topics, queries, embedder, options.k);
        auto post = evaluate_queries(run.store, run.object_topics, queries, embedder, options.k);
        report.precision_before = summarize(pre, options.bootstrap_resamples, options.ci_level,
                                            options.bootstrap_seed + 2);
        report.precision_after = summarize(post, options.bootstrap_resamples, options.ci_level,
                                           options.bootstrap_seed + 3);
    }
    return report;
}

}  // namespace sdp
