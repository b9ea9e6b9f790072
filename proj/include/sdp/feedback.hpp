#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sdp/core.hpp"
#include "sdp/embed.hpp"
#include "sdp/error.hpp"
#include "sdp/pipeline.hpp"
#include "sdp/store.hpp"
#include "sdp/util.hpp"

namespace sdp {

// ---------------------------------------------------------------------------
// Interaction log
// ---------------------------------------------------------------------------

enum class Outcome { answered, hallucinated, unresolved };

inline const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::answered: return "answered";
        case Outcome::hallucinated: return "hallucinated";
        case Outcome::unresolved: return "unresolved";
    }
    return "unresolved";
}

inline Outcome parse_outcome(const std::string& s) {
    if (s == "answered") return Outcome::answered;
    if (s == "hallucinated") return Outcome::hallucinated;
    if (s == "unresolved") return Outcome::unresolved;
    fail(errc::invalid_spec, "unknown interaction outcome '" + s + "'");
}

struct InteractionRecord {
    std::string query_text;
    std::string query_class;  // optional tag, empty when absent
    std::vector<std::string> retrieved_ids;
    std::optional<std::vector<bool>> relevant;  // aligned with retrieved_ids
    Outcome outcome = Outcome::unresolved;
    std::optional<bool> correct;
    std::int64_t timestamp = 0;

    void validate() const {
        if (relevant && relevant->size() != retrieved_ids.size())
            fail(errc::length_mismatch, "relevance list length " + std::to_string(relevant->size()) +
                                            " does not match " + std::to_string(retrieved_ids.size()) +
                                            " retrieved ids");
    }

    // Identity for idempotent re-ingestion: two records with the same content
    // hash count once.
    std::uint64_t identity() const {
        std::uint64_t h = fnv1a64(query_text);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(query_class, h);
        for (const auto& id : retrieved_ids) {
            h = fnv1a64("\x1f", h);
            h = fnv1a64(id, h);
        }
        h = fnv1a64("\x1f", h);
        h = fnv1a64(outcome_name(outcome), h);
        h = fnv1a64("\x1f", h);
        if (relevant)
            for (bool r : *relevant) h = fnv1a64(r ? "1" : "0", h);
        h = fnv1a64("\x1f", h);
        if (correct) h = fnv1a64(*correct ? "y" : "n", h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(std::to_string(timestamp), h);
        return h;
    }
};

// ---------------------------------------------------------------------------
// Performance report
// ---------------------------------------------------------------------------

struct PerformanceReport {
    std::optional<double> retrieval_precision;
    std::optional<double> reasoning_accuracy;
    std::optional<double> hallucination_rate;
    std::optional<double> task_completion_rate;
    long long record_count = 0;
};

inline PerformanceReport performance_report(const std::vector<InteractionRecord>& log) {
    PerformanceReport rep;
    rep.record_count = static_cast<long long>(log.size());
    if (log.empty()) return rep;

    double precision_sum = 0.0;
    long long precision_n = 0, correct_yes = 0, correct_n = 0, hallucinated = 0, answered = 0;
    for (const auto& rec : log) {
        rec.validate();
        if (rec.relevant && !rec.retrieved_ids.empty()) {
            long long hits = 0;
            for (bool r : *rec.relevant)
                if (r) ++hits;
            precision_sum += static_cast<double>(hits) / static_cast<double>(rec.retrieved_ids.size());
            ++precision_n;
        }
        if (rec.correct) {
            ++correct_n;
            if (*rec.correct) ++correct_yes;
        }
        if (rec.outcome == Outcome::hallucinated) ++hallucinated;
        if (rec.outcome == Outcome::answered) ++answered;
    }
    if (precision_n > 0) rep.retrieval_precision = precision_sum / static_cast<double>(precision_n);
    if (correct_n > 0)
        rep.reasoning_accuracy = static_cast<double>(correct_yes) / static_cast<double>(correct_n);
    rep.hallucination_rate = static_cast<double>(hallucinated) / static_cast<double>(log.size());
    rep.task_completion_rate = static_cast<double>(answered) / static_cast<double>(log.size());
    return rep;
}

// ---------------------------------------------------------------------------
// Prompt classification
// ---------------------------------------------------------------------------

struct PromptClass {
    std::string topic;                   // best-hit taxonomy domain or UNKNOWN
    std::string complexity;              // LOW / HIGH
    std::vector<std::string> reasoning;  // LOOKUP, or any of COMPUTE / COMPARE
    std::vector<std::string> domains;    // all applicable domains
};

class PromptClassifier {
  public:
    virtual ~PromptClassifier() = default;
    virtual PromptClass classify(const std::string& query_text) const = 0;
};

// Keyword-driven default classifier. Topic is the taxonomy domain with the
// most keyword hits (UNKNOWN at zero); complexity splits at 12 tokens;
// reasoning is LOOKUP unless computational or comparative cue words appear.
class KeywordPromptClassifier : public PromptClassifier {
  public:
    explicit KeywordPromptClassifier(DomainTaxonomy taxonomy, const Embedder* embedder = nullptr)
        : taxonomy_(std::move(taxonomy)), embedder_(embedder) {
        taxonomy_.validate();
    }

    PromptClass classify(const std::string& query_text) const override {
        auto toks = tokenize(query_text);
        std::set<std::string> tokens(toks.begin(), toks.end());

        PromptClass out;
        int best_hits = 0;
        out.topic = "UNKNOWN";
        for (const auto& d : taxonomy_.domains) {
            int hits = 0;
            for (const auto& kw : d.keywords)
                if (tokens.count(kw)) ++hits;
            if (hits > best_hits) {
                best_hits = hits;
                out.topic = d.id;
            }
            bool applies = hits >= d.keyword_min;
            if (!applies && d.anchor && embedder_)
                applies = cosine_sim(embedder_->embed(query_text), *d.anchor) > d.anchor_threshold;
            if (applies) out.domains.push_back(d.id);
        }

        out.complexity = toks.size() <= 12 ? "LOW" : "HIGH";

        bool compute = tokens.count("calculate") || tokens.count("compute");
        bool compare = tokens.count("versus") || tokens.count("compare");
        // "how much" is a phrase, matched on adjacent tokens.
        for (std::size_t i = 0; !compute && i + 1 < toks.size(); ++i)
            compute = toks[i] == "how" && toks[i + 1] == "much";
        if (compute) out.reasoning.push_back("COMPUTE");
        if (compare) out.reasoning.push_back("COMPARE");
        if (out.reasoning.empty()) out.reasoning.push_back("LOOKUP");
        return out;
    }

  private:
    DomainTaxonomy taxonomy_;
    const Embedder* embedder_;
};

inline PromptClass classify_prompt(const std::string& query_text, const PromptClassifier& classifier) {
    return classifier.classify(query_text);
}

// ---------------------------------------------------------------------------
// Signposting
// ---------------------------------------------------------------------------

enum class SignpostKind { structural, header, conflict };

inline const char* signpost_kind_name(SignpostKind k) {
    switch (k) {
        case SignpostKind::structural: return "STRUCTURAL";
        case SignpostKind::header: return "HEADER";
        case SignpostKind::conflict: return "CONFLICT";
    }
    return "STRUCTURAL";
}

struct SignpostFlag {
    std::string ko_id;
    SignpostKind kind = SignpostKind::structural;
    std::string reason;
    std::int64_t from_ts = 0;
    std::int64_t to_ts = 0;
};

struct SignpostThresholds {
    int r_min = 20;              // STRUCTURAL: minimum retrievals
    double success_floor = 0.5;  // STRUCTURAL: answered/retrieved must reach this
    double h_rate = 0.2;         // CONFLICT: hallucination rate above this
    int h_min = 10;              // CONFLICT: minimum retrievals
    double nearmiss_delta = 0.05;  // HEADER: how far under alpha still counts
    double alpha = 0.0;            // calibrated entanglement threshold
};

struct SignpostOutcome {
    std::vector<SignpostFlag> flags;
    std::vector<std::string> unknown_ids;  // referenced by the log, absent from the store
};

// Recomputes usage counters for every object from the deduplicated log and
// derives window-scoped flags:
//   STRUCTURAL  heavily retrieved but rarely part of an answer
//   HEADER      never retrieved although some query landed near its vector
//   CONFLICT    heavily retrieved and implicated in hallucinations
// Counters and signpost lists are replaced, not incremented, so feeding the
// same log again changes nothing. The embedder must match the store vectors.
inline SignpostOutcome apply_signposts(KnowledgeStore& store,
                                       const std::vector<InteractionRecord>& log,
                                       const SignpostThresholds& thresholds,
                                       const Embedder& embedder) {
    check_alpha(thresholds.alpha);
    SignpostOutcome outcome;

    std::vector<const InteractionRecord*> unique;
    std::set<std::uint64_t> seen;
    for (const auto& rec : log) {
        rec.validate();
        if (seen.insert(rec.identity()).second) unique.push_back(&rec);
    }

    std::int64_t from_ts = 0, to_ts = 0;
    if (!unique.empty()) {
        from_ts = to_ts = unique.front()->timestamp;
        for (const auto* rec : unique) {
            from_ts = std::min(from_ts, rec->timestamp);
            to_ts = std::max(to_ts, rec->timestamp);
        }
    }

    struct Counters {
        int retrieved = 0, answered = 0, hallucinated = 0;
        std::set<std::string> tags;
    };
    std::map<std::string, Counters> counted;
    std::set<std::string> unknown;
    for (const auto* rec : unique) {
        std::set<std::string> ids(rec->retrieved_ids.begin(), rec->retrieved_ids.end());
        for (const auto& id : ids) {
            if (!store.find_mut(id)) {
                unknown.insert(id);
                continue;
            }
            Counters& c = counted[id];
            ++c.retrieved;
            if (rec->outcome == Outcome::answered) ++c.answered;
            if (rec->outcome == Outcome::hallucinated) ++c.hallucinated;
            if (!rec->query_class.empty()) c.tags.insert(rec->query_class);
        }
    }
    outcome.unknown_ids.assign(unknown.begin(), unknown.end());

    // Embed each distinct query once for the near-miss rule.
    std::map<std::string, EmbeddingVector> query_vectors;
    for (const auto* rec : unique)
        if (!query_vectors.count(rec->query_text))
            query_vectors.emplace(rec->query_text, embedder.embed(rec->query_text));

    for (const auto& id : store.ids()) {
        KnowledgeObject* ko = store.find_mut(id);
        Counters c;
        if (auto it = counted.find(id); it != counted.end()) c = it->second;
        ko->usage.retrieval_count = c.retrieved;
        ko->usage.answered_count = c.answered;
        ko->usage.hallucination_count = c.hallucinated;
        ko->usage.query_type_tags.assign(c.tags.begin(), c.tags.end());
        ko->usage.signposts.clear();

        auto flag = [&](SignpostKind kind, std::string reason) {
            ko->usage.signposts.push_back(signpost_kind_name(kind));
            outcome.flags.push_back({id, kind, std::move(reason), from_ts, to_ts});
        };
        if (c.retrieved >= thresholds.r_min &&
            static_cast<double>(c.answered) / c.retrieved < thresholds.success_floor)
            flag(SignpostKind::structural,
                 "retrieved " + std::to_string(c.retrieved) + " times but answered only " +
                     std::to_string(c.answered));
        if (c.retrieved == 0 && !query_vectors.empty()) {
            double best = -1.0;
            for (const auto& [text, vec] : query_vectors)
                best = std::max(best, cosine_sim(vec, ko->vector));
            if (best >= thresholds.alpha - thresholds.nearmiss_delta)
                flag(SignpostKind::header, "never retrieved despite query similarity " +
                                               std::to_string(best) + " near alpha " +
                                               std::to_string(thresholds.alpha));
        }
        if (c.retrieved >= thresholds.h_min &&
            static_cast<double>(c.hallucinated) / c.retrieved > thresholds.h_rate)
            flag(SignpostKind::conflict,
                 "implicated in " + std::to_string(c.hallucinated) + " hallucinations over " +
                     std::to_string(c.retrieved) + " retrievals");
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// Re-disentanglement queue
// ---------------------------------------------------------------------------

struct RequeueEntry {
    std::string doc_id;
    int span_start = 0;
    int span_end = 0;
    int flag_count = 0;
};

// Groups flags by provenance region and queues regions whose accumulated flag
// count reaches the threshold, ordered by count descending, then doc id, then
// span. Flags on unknown objects are skipped.
inline std::vector<RequeueEntry> requeue_regions(const KnowledgeStore& store,
                                                 const std::vector<SignpostFlag>& flags,
                                                 int queue_threshold = 3) {
    if (queue_threshold < 1) fail(errc::invalid_spec, "queue threshold must be at least 1");
    std::map<std::tuple<std::string, int, int>, int> counts;
    for (const auto& flag : flags) {
        const KnowledgeObject* ko = nullptr;
        try {
            ko = &store.get(flag.ko_id);
        } catch (const error&) {
            continue;
        }
        ++counts[{ko->provenance.source_doc_id, ko->provenance.span_start, ko->provenance.span_end}];
    }
    std::vector<RequeueEntry> queue;
    for (const auto& [region, count] : counts)
        if (count >= queue_threshold)
            queue.push_back({std::get<0>(region), std::get<1>(region), std::get<2>(region), count});
    std::sort(queue.begin(), queue.end(), [](const RequeueEntry& a, const RequeueEntry& b) {
        if (a.flag_count != b.flag_count) return a.flag_count > b.flag_count;
        if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
        if (a.span_start != b.span_start) return a.span_start < b.span_start;
        return a.span_end < b.span_end;
    });
    return queue;
}

}  // namespace sdp
