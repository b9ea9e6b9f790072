#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sdp/calibrate.hpp"
#include "sdp/core.hpp"
#include "sdp/embed.hpp"
#include "sdp/error.hpp"
#include "sdp/knowledge_object.hpp"
#include "sdp/metrics.hpp"
#include "sdp/segment.hpp"

namespace sdp {

// ---------------------------------------------------------------------------
// Operational context (the psi of the conditioned objective)
// ---------------------------------------------------------------------------

struct ExampleQuery {
    std::string text;
    std::string tag;  // expected topic/domain
};

struct UsageStat {
    int span_start = 0;  // 1-based inclusive segment positions
    int span_end = 0;
    int retrieval_count = 0;
    int failure_count = 0;
};

struct ContextProfile {
    DocType functional_class = DocType::unclassified;
    std::vector<UsageStat> usage_stats;
    std::vector<ExampleQuery> example_queries;
    std::map<std::string, double> prompt_terms;
    // Sets of segment `index` values (0-based) that must stay together.
    std::vector<std::vector<int>> dependency_groups;
    // 1-based inclusive spans that deserve to stand alone.
    std::vector<std::pair<int, int>> signposted_regions;
    double lambda = 1.0;
    double w_dependency = 1.0;
    double w_query = 1.0;
    double w_signpost = 1.0;

    void validate() const {
        if (lambda < 0.0) fail(errc::invalid_spec, "lambda must be non-negative");
        if (w_dependency < 0.0 || w_query < 0.0 || w_signpost < 0.0)
            fail(errc::invalid_spec, "context-loss weights must be non-negative");
    }
};

// ---------------------------------------------------------------------------
// Domain taxonomy
// ---------------------------------------------------------------------------

struct Domain {
    std::string id;
    std::string name;  // display name; defaults to id
    std::set<std::string> keywords;
    std::optional<EmbeddingVector> anchor;
    double anchor_threshold = 0.0;
    int keyword_min = 2;
};

struct DomainTaxonomy {
    std::vector<Domain> domains;

    void validate() const {
        std::set<std::string> ids;
        for (const auto& d : domains) {
            if (d.id.empty()) fail(errc::invalid_spec, "taxonomy domain with empty id");
            if (!ids.insert(d.id).second)
                fail(errc::duplicate_id, "taxonomy lists domain '" + d.id + "' twice");
            if (d.anchor) {
                double n = vector_norm(*d.anchor);
                if (std::abs(n - 1.0) > 1e-9)
                    fail(errc::invalid_spec, "anchor for domain '" + d.id + "' is not unit-norm");
            }
            if (d.keyword_min < 1)
                fail(errc::invalid_spec, "keyword_min for domain '" + d.id + "' must be at least 1");
        }
    }
};

// ---------------------------------------------------------------------------
// Header synthesis
// ---------------------------------------------------------------------------

class HeaderGenerator {
  public:
    virtual ~HeaderGenerator() = default;
    virtual std::string generate(const std::string& fragment_text, const Document& parent,
                                 const std::vector<ExampleQuery>& example_queries) const = 0;
    // Domain-conditioned restructuring used when a fragment is cloned.
    virtual std::string restructure_for_domain(const std::string& fragment_text,
                                               const std::string& domain) const {
        return "[Domain: " + domain + "] " + fragment_text;
    }
};

// Deterministic template: title, doc type, metadata domain, geographic scope,
// and the five most frequent fragment tokens (ties alphabetical), all joined
// by " — ". Example queries are accepted for contract parity but only
// condition external generators.
class TemplateHeaderGenerator : public HeaderGenerator {
  public:
    static std::string top_tokens(const std::string& text, std::size_t limit = 5) {
        std::map<std::string, int> counts;
        for (const auto& tok : tokenize(text)) ++counts[tok];
        std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (ranked.size() > limit) ranked.resize(limit);
        std::string out;
        for (const auto& [tok, cnt] : ranked) {
            if (!out.empty()) out.push_back(' ');
            out += tok;
        }
        return out;
    }

    std::string generate(const std::string& fragment_text, const Document& parent,
                         const std::vector<ExampleQuery>&) const override {
        auto meta = [&](const char* key) {
            auto it = parent.metadata.find(key);
            return it == parent.metadata.end() ? std::string() : it->second;
        };
        return parent.title + " — " + doc_type_name(parent.doc_type) + " — " + meta("domain") +
               " — " + meta("geographic") + " — " + top_tokens(fragment_text);
    }
};

inline std::string synthesize_header(const Fragment& fragment, const Document& parent,
                                     const std::vector<ExampleQuery>& example_queries,
                                     const HeaderGenerator& gen) {
    if (fragment.doc_id != parent.id)
        fail(errc::fragment_mismatch, "fragment from doc '" + fragment.doc_id +
                                          "' offered to parent '" + parent.id + "'");
    std::string header = gen.generate(fragment.text, parent, example_queries);
    if (header.empty()) fail(errc::generator_failed, "header generator produced an empty header");
    return header;
}

// ---------------------------------------------------------------------------
// Cross-domain applicability and cloning
// ---------------------------------------------------------------------------

// A domain applies when the parent document's metadata lists it, the fragment
// hits enough of its keywords, or the fragment's embedding clears its anchor
// threshold (anchor rule needs an embedder). Falls back to the document's
// metadata domain when nothing applies; the result may then be empty.
inline std::vector<std::string> applicable_domains(const Fragment& fragment, const Document& doc,
                                                   const DomainTaxonomy& taxonomy,
                                                   const Embedder* embedder = nullptr) {
    if (taxonomy.domains.empty()) fail(errc::empty_taxonomy, "taxonomy has no domains");
    taxonomy.validate();

    std::set<std::string> fragment_tokens;
    for (const auto& tok : tokenize(fragment.text)) fragment_tokens.insert(tok);
    std::string doc_domain;
    if (auto it = doc.metadata.find("domain"); it != doc.metadata.end()) doc_domain = it->second;

    std::optional<EmbeddingVector> fragment_vec;
    std::vector<std::string> out;
    for (const auto& d : taxonomy.domains) {
        bool applies = !doc_domain.empty() && (doc_domain == d.id || doc_domain == d.name);
        if (!applies && !d.keywords.empty()) {
            int hits = 0;
            for (const auto& kw : d.keywords)
                if (fragment_tokens.count(kw)) ++hits;
            applies = hits >= d.keyword_min;
        }
        if (!applies && d.anchor && embedder) {
            if (!fragment_vec) fragment_vec = embedder->embed(fragment.text);
            applies = cosine_sim(*fragment_vec, *d.anchor) > d.anchor_threshold;
        }
        if (applies) out.push_back(d.id);
    }
    if (out.empty() && !doc_domain.empty()) out.push_back(doc_domain);
    return out;
}

struct FragmentClone {
    std::string id;
    std::string domain;  // empty for the undomained identity clone
    std::string text;    // display text (restructured when cloned)
    std::vector<std::string> sibling_ids;
};

// One clone per domain. A single domain yields the identity (text untouched,
// no siblings); two or more yield restructured clones that list each other as
// siblings. Ids are content hashes over (doc, span, domain), so clones of the
// same fragment always differ and reruns reproduce them.
inline std::vector<FragmentClone> clone_for_domains(const Fragment& fragment,
                                                    const std::vector<std::string>& domains,
                                                    const HeaderGenerator& gen) {
    if (domains.empty())
        fail(errc::no_domains, "no domains to clone for fragment [" +
                                   std::to_string(fragment.span_start) + ".." +
                                   std::to_string(fragment.span_end) + "] of doc '" +
                                   fragment.doc_id + "'");
    std::vector<FragmentClone> clones;
    for (const auto& domain : domains) {
        FragmentClone c;
        c.id = knowledge_object_id(fragment.doc_id, fragment.span_start, fragment.span_end, domain);
        c.domain = domain;
        c.text = domains.size() == 1 ? fragment.text : gen.restructure_for_domain(fragment.text, domain);
        clones.push_back(std::move(c));
    }
    if (clones.size() > 1)
        for (std::size_t i = 0; i < clones.size(); ++i)
            for (std::size_t j = 0; j < clones.size(); ++j)
                if (i != j) clones[i].sibling_ids.push_back(clones[j].id);
    return clones;
}

// ---------------------------------------------------------------------------
// Knowledge Object assembly
// ---------------------------------------------------------------------------

namespace detail {

// Multiset containment: every token of `inner`, with multiplicity, appears in
// `outer`.
inline bool tokens_contained(const std::vector<std::string>& inner,
                             const std::vector<std::string>& outer) {
    std::map<std::string, long long> counts;
    for (const auto& t : outer) ++counts[t];
    for (const auto& t : inner)
        if (--counts[t] < 0) return false;
    return true;
}

}  // namespace detail

inline KnowledgeObject assemble_knowledge_object(const std::string& fragment_text,
                                                 const std::string& raw_fragment,
                                                 const std::string& header,
                                                 std::map<std::string, std::string> metadata,
                                                 KnowledgeObject::Provenance provenance,
                                                 const Embedder& embedder) {
    if (header.empty()) fail(errc::generator_failed, "cannot assemble an object with an empty header");
    if (fragment_text.empty()) fail(errc::empty_segment, "cannot assemble an object with empty text");
    KnowledgeObject ko;
    std::string domain;
    if (auto it = metadata.find("domain"); it != metadata.end()) domain = it->second;
    ko.id = knowledge_object_id(provenance.source_doc_id, provenance.span_start, provenance.span_end,
                                domain);
    ko.header = header;
    ko.primary_text = header + "\n\n" + fragment_text;
    ko.raw_fragment = raw_fragment;
    ko.metadata = std::move(metadata);
    ko.provenance = std::move(provenance);
    ko.usage = {};
    ko.vector = embedder.embed(ko.primary_text);
    if (!detail::tokens_contained(tokenize(ko.raw_fragment), tokenize(ko.primary_text)))
        fail(errc::generator_failed,
             "restructured text for object '" + ko.id + "' dropped source tokens");
    return ko;
}

// ---------------------------------------------------------------------------
// Context-conditioned loss
// ---------------------------------------------------------------------------

namespace detail {

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : a)
        if (b.count(t)) ++inter;
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace detail

// L_psi = w_a*a + w_b*b + w_c*c over a candidate split (fragments plus their
// headers):
//   a  fraction of dependency groups whose segments land in >= 2 fragments
//   b  1 - mean over example queries of the best header Jaccard overlap
//   c  fraction of signposted regions that did not survive as standalone
//      fragments
inline double context_loss(const std::vector<Fragment>& fragments,
                           const std::vector<std::string>& headers, const ContextProfile& psi) {
    psi.validate();
    if (fragments.size() != headers.size())
        fail(errc::length_mismatch, std::to_string(fragments.size()) + " fragments vs " +
                                        std::to_string(headers.size()) + " headers");

    double a = 0.0;
    if (!psi.dependency_groups.empty()) {
        // Owning fragment per 0-based segment index; -1 for out-of-range.
        auto owner = [&](int index) -> int {
            int position = index + 1;
            for (std::size_t f = 0; f < fragments.size(); ++f)
                if (fragments[f].span_start <= position && position <= fragments[f].span_end)
                    return static_cast<int>(f);
            return -1;
        };
        int split = 0;
        for (const auto& group : psi.dependency_groups) {
            std::set<int> owners;
            for (int index : group) {
                int o = owner(index);
                if (o >= 0) owners.insert(o);
            }
            if (owners.size() >= 2) ++split;
        }
        a = static_cast<double>(split) / static_cast<double>(psi.dependency_groups.size());
    }

    double b = 0.0;
    if (!psi.example_queries.empty()) {
        std::vector<std::set<std::string>> header_tokens;
        header_tokens.reserve(headers.size());
        for (const auto& h : headers) {
            auto toks = tokenize(h);
            header_tokens.emplace_back(toks.begin(), toks.end());
        }
        double covered = 0.0;
        for (const auto& q : psi.example_queries) {
            auto toks = tokenize(q.text);
            std::set<std::string> query_tokens(toks.begin(), toks.end());
            double best = 0.0;
            for (const auto& ht : header_tokens)
                best = std::max(best, detail::jaccard(query_tokens, ht));
            covered += best;
        }
        b = 1.0 - covered / static_cast<double>(psi.example_queries.size());
    }

    double c = 0.0;
    if (!psi.signposted_regions.empty()) {
        int missed = 0;
        for (const auto& [start, end] : psi.signposted_regions) {
            bool isolated = false;
            for (const auto& f : fragments)
                if (f.span_start == start && f.span_end == end) {
                    isolated = true;
                    break;
                }
            if (!isolated) ++missed;
        }
        c = static_cast<double>(missed) / static_cast<double>(psi.signposted_regions.size());
    }

    return psi.w_dependency * a + psi.w_query * b + psi.w_signpost * c;
}

// ---------------------------------------------------------------------------
// Faithfulness
// ---------------------------------------------------------------------------

// True iff the source document's token multiset is contained in the union of
// the objects' raw fragments. Duplication (cloning) is allowed; loss is not.
inline bool faithfulness_check(const Document& doc, const std::vector<KnowledgeObject>& objects) {
    std::vector<std::string> source;
    for (const auto& seg : doc.segments) {
        auto toks = tokenize(seg.text);
        source.insert(source.end(), toks.begin(), toks.end());
    }
    std::vector<std::string> recovered;
    for (const auto& ko : objects) {
        auto toks = tokenize(ko.raw_fragment);
        recovered.insert(recovered.end(), toks.begin(), toks.end());
    }
    return detail::tokens_contained(source, recovered);
}

// ---------------------------------------------------------------------------
// End-to-end disentanglement
// ---------------------------------------------------------------------------

struct PipelineConfig {
    double theta = 0.72;
    int l_min = 100;
    double alpha = 0.0;  // must be supplied (calibrated)
    double beta = 0.20;
    // Candidate thresholds scored by the objective; empty means the default
    // {theta-0.04, theta, theta+0.04} with out-of-range values dropped.
    std::vector<double> candidate_thetas;
    DomainTaxonomy taxonomy;

    std::vector<double> candidates() const {
        std::vector<double> cand = candidate_thetas;
        if (cand.empty()) cand = {theta - 0.04, theta, theta + 0.04};
        std::vector<double> kept;
        for (double t : cand)
            if (t > 0.0 && t < 1.0) kept.push_back(t);
        std::sort(kept.begin(), kept.end());
        kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
        if (kept.empty()) fail(errc::theta_out_of_range, "no candidate theta falls inside (0,1)");
        return kept;
    }
};

struct DisentanglementOutcome {
    std::vector<KnowledgeObject> knowledge_objects;
    double ei_before = 0.0;
    double ei_after = 0.0;
    bool complete = false;  // ei_after <= beta
    bool faithful = false;
    double objective_value = 0.0;
    double chosen_theta = 0.0;
    int fragment_count = 0;
};

namespace detail {

struct CandidateRun {
    double theta = 0.0;
    std::vector<Fragment> fragments;
    std::vector<std::string> headers;
    std::vector<KnowledgeObject> objects;
    std::vector<std::optional<TopicLabel>> object_topics;
    double ei_after = 0.0;
    double loss = 0.0;
    double objective = 0.0;
};

}  // namespace detail

// Runs boundary detection, header synthesis, cloning, and assembly for each
// candidate theta, scores every candidate by EI-over-objects plus
// lambda-weighted context loss, and keeps the minimum (ties: fewer objects,
// then lower theta). Faithfulness of the chosen candidate is mandatory.
inline DisentanglementOutcome disentangle_document(const Document& doc,
                                                   const std::vector<EmbeddingVector>& vectors,
                                                   const ContextProfile& psi,
                                                   const PipelineConfig& config,
                                                   const Embedder& embedder,
                                                   const HeaderGenerator& gen) {
    psi.validate();
    check_alpha(config.alpha);
    if (vectors.size() != doc.segments.size())
        fail(errc::length_mismatch, "doc '" + doc.id + "' has " + std::to_string(doc.segments.size()) +
                                        " segments but " + std::to_string(vectors.size()) + " vectors");
    int n = static_cast<int>(doc.segments.size());
    for (const auto& group : psi.dependency_groups)
        for (int index : group)
            if (index < 0 || index >= n)
                fail(errc::invalid_spec, "dependency group references segment index " +
                                             std::to_string(index) + " outside 0.." +
                                             std::to_string(n - 1));

    std::optional<detail::CandidateRun> best;
    for (double theta : config.candidates()) {
        detail::CandidateRun run;
        run.theta = theta;
        run.fragments = recursive_segment(doc, vectors, theta, config.l_min);
        for (const auto& fragment : run.fragments) {
            std::string header = synthesize_header(fragment, doc, psi.example_queries, gen);
            run.headers.push_back(header);

            std::vector<std::string> domains;
            if (config.taxonomy.domains.empty()) {
                if (auto it = doc.metadata.find("domain"); it != doc.metadata.end() && !it->second.empty())
                    domains.push_back(it->second);
            } else {
                domains = applicable_domains(fragment, doc, config.taxonomy, &embedder);
            }
            // No taxonomy hit and no metadata domain: keep a single undomained
            // object so assembly still produces exactly one unit.
            if (domains.empty()) domains.push_back("");

            for (const auto& clone : clone_for_domains(fragment, domains, gen)) {
                std::map<std::string, std::string> metadata;
                if (!clone.domain.empty()) metadata["domain"] = clone.domain;
                for (const char* key : {"geographic", "persona", "temporal"})
                    if (auto it = doc.metadata.find(key); it != doc.metadata.end())
                        metadata[key] = it->second;
                metadata["doc_type"] = doc_type_name(doc.doc_type);

                KnowledgeObject::Provenance prov;
                prov.source_doc_id = doc.id;
                prov.span_start = fragment.span_start;
                prov.span_end = fragment.span_end;
                prov.sibling_ids = clone.sibling_ids;
                prov.boundary_confidence = fragment.boundary_confidence;

                run.objects.push_back(assemble_knowledge_object(clone.text, fragment.text, header,
                                                                std::move(metadata), std::move(prov),
                                                                embedder));
                run.object_topics.push_back(fragment.majority_topic);
            }
        }

        std::vector<TopicLabel> labels;
        std::vector<EmbeddingVector> obj_vectors;
        for (std::size_t i = 0; i < run.objects.size(); ++i) {
            if (!run.object_topics[i] || run.object_topics[i]->empty()) continue;
            labels.push_back(*run.object_topics[i]);
            obj_vectors.push_back(run.objects[i].vector);
        }
        run.ei_after = labels.empty() ? 0.0 : entanglement_index(labels, obj_vectors, config.alpha).ei;
        run.loss = context_loss(run.fragments, run.headers, psi);
        run.objective = run.ei_after + psi.lambda * run.loss;

        bool better = !best || run.objective < best->objective ||
                      (run.objective == best->objective &&
                       (run.objects.size() < best->objects.size() ||
                        (run.objects.size() == best->objects.size() && run.theta < best->theta)));
        if (better) best = std::move(run);
    }

    DisentanglementOutcome outcome;
    outcome.knowledge_objects = std::move(best->objects);
    outcome.chosen_theta = best->theta;
    outcome.objective_value = best->objective;
    outcome.ei_after = best->ei_after;
    outcome.fragment_count = static_cast<int>(best->fragments.size());

    std::vector<TopicLabel> seg_labels;
    std::vector<EmbeddingVector> seg_vectors;
    for (std::size_t i = 0; i < doc.segments.size(); ++i) {
        const auto& topic = doc.segments[i].topic;
        if (!topic || topic->empty()) continue;
        seg_labels.push_back(*topic);
        seg_vectors.push_back(vectors[i]);
    }
    outcome.ei_before =
        seg_labels.empty() ? 0.0 : entanglement_index(seg_labels, seg_vectors, config.alpha).ei;

    outcome.faithful = faithfulness_check(doc, outcome.knowledge_objects);
    if (!outcome.faithful)
        fail(errc::faithfulness_violation,
             "assembled objects for doc '" + doc.id + "' do not cover its source tokens");
    outcome.complete = outcome.ei_after <= config.beta;
    return outcome;
}

}  // namespace sdp
