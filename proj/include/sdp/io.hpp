#pragma once

#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdp/calibrate.hpp"
#include "sdp/core.hpp"
#include "sdp/embed.hpp"
#include "sdp/error.hpp"
#include "sdp/feedback.hpp"
#include "sdp/pipeline.hpp"
#include "sdp/segment.hpp"
#include "sdp/util.hpp"

// JSON/JSONL schemas for every artifact the CLI reads or writes. Readers
// ignore unknown fields but corpus documents carry them along (in `extra`)
// so rewriting a corpus does not destroy foreign annotations.

namespace sdp::io {

namespace detail {

inline json parse_line(const std::string& line, const std::string& path, std::size_t line_no) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        fail(errc::io_error, path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
}

inline bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

template <typename Fn>
void for_each_jsonl(const std::string& path, Fn&& fn) {
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        fn(parse_line(line, path, line_no), line_no);
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

inline json segment_to_json(const Segment& seg) {
    json j = seg.extra.is_object() ? seg.extra : json::object();
    j["index"] = seg.index;
    j["text"] = seg.text;
    if (seg.topic) j["topic"] = *seg.topic;
    return j;
}

inline json document_to_json(const Document& doc) {
    json j = doc.extra.is_object() ? doc.extra : json::object();
    j["id"] = doc.id;
    j["title"] = doc.title;
    j["doc_type"] = doc_type_name(doc.doc_type);
    j["metadata"] = doc.metadata;
    json segs = json::array();
    for (const auto& seg : doc.segments) segs.push_back(segment_to_json(seg));
    j["segments"] = segs;
    return j;
}

inline Document document_from_json(const json& j) {
    Document doc;
    doc.id = j.at("id").get<std::string>();
    doc.title = j.value("title", "");
    doc.doc_type = parse_doc_type(j.value("doc_type", "unclassified"));
    if (j.contains("metadata") && j["metadata"].is_object())
        doc.metadata = j["metadata"].get<std::map<std::string, std::string>>();
    if (j.contains("segments"))
        for (const json& sj : j.at("segments")) {
            Segment seg;
            seg.index = sj.at("index").get<int>();
            seg.text = sj.at("text").get<std::string>();
            if (sj.contains("topic") && sj["topic"].is_string())
                seg.topic = sj["topic"].get<std::string>();
            for (const auto& [key, value] : sj.items())
                if (key != "index" && key != "text" && key != "topic") seg.extra[key] = value;
            doc.segments.push_back(std::move(seg));
        }
    for (const auto& [key, value] : j.items())
        if (key != "id" && key != "title" && key != "doc_type" && key != "metadata" &&
            key != "segments")
            doc.extra[key] = value;
    return validate_document(std::move(doc));
}

inline std::vector<Document> read_corpus(const std::string& path) {
    std::vector<Document> docs;
    std::set<std::string> ids;
    detail::for_each_jsonl(path, [&](const json& j, std::size_t line_no) {
        try {
            docs.push_back(document_from_json(j));
        } catch (const json::exception& e) {
            fail(errc::io_error, path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!ids.insert(docs.back().id).second)
            fail(errc::duplicate_id,
                 path + ":" + std::to_string(line_no) + ": duplicate document id '" + docs.back().id + "'");
    });
    return docs;
}

inline void write_corpus(const std::string& path, const std::vector<Document>& docs) {
    std::ostringstream out;
    for (const auto& doc : docs) out << document_to_json(doc).dump() << '\n';
    write_file_atomic(path, out.str());
}

// ---------------------------------------------------------------------------
// Annotations
// ---------------------------------------------------------------------------

inline AnnotationSet read_annotations(const std::string& path) {
    AnnotationSet ann;
    detail::for_each_jsonl(path, [&](const json& j, std::size_t line_no) {
        try {
            std::string doc_id = j.at("doc_id").get<std::string>();
            auto lists = j.at("annotators").get<std::vector<BoundarySet>>();
            ann.by_doc[doc_id] = std::move(lists);
        } catch (const json::exception& e) {
            fail(errc::io_error, path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    });
    return ann;
}

inline void write_annotations(const std::string& path, const AnnotationSet& ann) {
    std::ostringstream out;
    for (const auto& [doc_id, lists] : ann.by_doc)
        out << json{{"doc_id", doc_id}, {"annotators", lists}}.dump() << '\n';
    write_file_atomic(path, out.str());
}

// ---------------------------------------------------------------------------
// Embedders
// ---------------------------------------------------------------------------

inline json anchor_config_to_json(const AnchorEmbedderConfig& cfg) {
    return json{{"type", "anchor"},
                {"dim", cfg.dim},
                {"topics", cfg.topics},
                {"mu", cfg.cross_topic_sim},
                {"sigma", cfg.noise_scale},
                {"seed", cfg.seed}};
}

inline AnchorEmbedderConfig anchor_config_from_json(const json& j) {
    AnchorEmbedderConfig cfg;
    cfg.dim = j.at("dim").get<int>();
    cfg.topics = j.at("topics").get<std::vector<std::string>>();
    cfg.cross_topic_sim = j.value("mu", 0.2);
    cfg.noise_scale = j.value("sigma", 0.0);
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.validate();
    return cfg;
}

inline void write_anchor_config(const std::string& path, const AnchorEmbedderConfig& cfg) {
    write_file_atomic(path, anchor_config_to_json(cfg).dump(2) + "\n");
}

// Selector grammar: "anchor:cfg.json", "table:cfg.json", or
// "external-vectors:vectors.jsonl" (per-segment precomputed vectors).
inline std::unique_ptr<Embedder> make_embedder(const std::string& selector) {
    auto colon = selector.find(':');
    if (colon == std::string::npos)
        fail(errc::invalid_spec,
             "embedder selector must look like kind:path, got '" + selector + "'");
    std::string kind = selector.substr(0, colon);
    std::string path = selector.substr(colon + 1);

    if (kind == "anchor") {
        json j;
        try {
            j = json::parse(read_file(path));
        } catch (const json::exception& e) {
            fail(errc::io_error, path + ": invalid JSON: " + std::string(e.what()));
        }
        return std::make_unique<AnchorTextEmbedder>(anchor_config_from_json(j));
    }
    if (kind == "table") {
        json j;
        try {
            j = json::parse(read_file(path));
        } catch (const json::exception& e) {
            fail(errc::io_error, path + ": invalid JSON: " + std::string(e.what()));
        }
        int dim = j.at("dim").get<int>();
        std::map<std::string, EmbeddingVector> entries;
        if (j.contains("entries"))
            entries = j.at("entries").get<std::map<std::string, EmbeddingVector>>();
        TableFallback fb = TableFallback::error_out;
        if (j.value("fallback", "error") == "zero") fb = TableFallback::zero_vector;
        return std::make_unique<TableEmbedder>(dim, std::move(entries), fb);
    }
    if (kind == "external-vectors") {
        std::map<std::string, EmbeddingVector> by_segment;
        int dim = 0;
        detail::for_each_jsonl(path, [&](const json& j, std::size_t line_no) {
            try {
                std::string id = j.at("segment_id").get<std::string>();
                auto vec = j.at("vector").get<EmbeddingVector>();
                if (dim == 0) dim = static_cast<int>(vec.size());
                if (static_cast<int>(vec.size()) != dim)
                    fail(errc::dim_mismatch, path + ":" + std::to_string(line_no) + ": vector of " +
                                                 std::to_string(vec.size()) + " dims, expected " +
                                                 std::to_string(dim));
                by_segment[id] = std::move(vec);
            } catch (const json::exception& e) {
                fail(errc::io_error, path + ":" + std::to_string(line_no) + ": " + e.what());
            }
        });
        if (by_segment.empty()) fail(errc::empty_input, path + " holds no vectors");
        return std::make_unique<PrecomputedEmbedder>(dim, std::move(by_segment));
    }
    fail(errc::invalid_spec, "unknown embedder kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

inline std::vector<ExampleQuery> read_queries(const std::string& path) {
    std::vector<ExampleQuery> queries;
    detail::for_each_jsonl(path, [&](const json& j, std::size_t line_no) {
        try {
            queries.push_back({j.at("text").get<std::string>(), j.value("topic", j.value("tag", ""))});
        } catch (const json::exception& e) {
            fail(errc::io_error, path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    });
    return queries;
}

inline void write_queries(const std::string& path, const std::vector<ExampleQuery>& queries) {
    std::ostringstream out;
    for (const auto& q : queries) out << json{{"text", q.text}, {"topic", q.tag}}.dump() << '\n';
    write_file_atomic(path, out.str());
}

// ---------------------------------------------------------------------------
// Taxonomy
// ---------------------------------------------------------------------------

inline DomainTaxonomy taxonomy_from_json(const json& j) {
    DomainTaxonomy tax;
    for (const json& dj : j.at("domains")) {
        Domain d;
        d.id = dj.at("id").get<std::string>();
        d.name = dj.value("name", d.id);
        if (dj.contains("keywords"))
            for (const json& kw : dj["keywords"]) d.keywords.insert(kw.get<std::string>());
        if (dj.contains("anchor") && !dj["anchor"].is_null())
            d.anchor = dj["anchor"].get<EmbeddingVector>();
        d.anchor_threshold = dj.value("anchor_threshold", 0.0);
        d.keyword_min = dj.value("keyword_min", 2);
        tax.domains.push_back(std::move(d));
    }
    tax.validate();
    return tax;
}

inline DomainTaxonomy read_taxonomy(const std::string& path) {
    try {
        return taxonomy_from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        fail(errc::io_error, path + ": " + e.what());
    }
}

// One domain per topic label: keywords = {label}, single hit suffices. Lets
// labeled corpora exercise cloning without a hand-written taxonomy file.
inline DomainTaxonomy derive_taxonomy(const std::vector<Document>& docs) {
    DomainTaxonomy tax;
    std::set<std::string> seen;
    for (const auto& doc : docs)
        for (const auto& seg : doc.segments)
            if (seg.topic && !seg.topic->empty() && seen.insert(*seg.topic).second) {
                Domain d;
                d.id = *seg.topic;
                d.name = *seg.topic;
                d.keywords = {*seg.topic};
                d.keyword_min = 1;
                tax.domains.push_back(std::move(d));
            }
    return tax;
}

// ---------------------------------------------------------------------------
// Context profile
// ---------------------------------------------------------------------------

inline ContextProfile profile_from_json(const json& j) {
    ContextProfile psi;
    psi.functional_class = parse_doc_type(j.value("functional_class", "unclassified"));
    if (j.contains("usage_stats"))
        for (const json& u : j["usage_stats"]) {
            UsageStat stat;
            stat.span_start = u.at("span").at(0).get<int>();
            stat.span_end = u.at("span").at(1).get<int>();
            stat.retrieval_count = u.value("retrieval_count", 0);
            stat.failure_count = u.value("failure_count", 0);
            psi.usage_stats.push_back(stat);
        }
    if (j.contains("example_queries"))
        for (const json& q : j["example_queries"])
            psi.example_queries.push_back(
                {q.at("text").get<std::string>(), q.value("tag", q.value("topic", ""))});
    if (j.contains("prompt_terms"))
        psi.prompt_terms = j["prompt_terms"].get<std::map<std::string, double>>();
    if (j.contains("dependency_groups"))
        psi.dependency_groups = j["dependency_groups"].get<std::vector<std::vector<int>>>();
    if (j.contains("signposted_regions"))
        for (const json& r : j["signposted_regions"])
            psi.signposted_regions.emplace_back(r.at(0).get<int>(), r.at(1).get<int>());
    psi.lambda = j.value("lambda", 1.0);
    if (j.contains("weights")) {
        psi.w_dependency = j["weights"].value("dependency", 1.0);
        psi.w_query = j["weights"].value("query", 1.0);
        psi.w_signpost = j["weights"].value("signpost", 1.0);
    }
    psi.validate();
    return psi;
}

inline ContextProfile read_profile(const std::string& path) {
    try {
        return profile_from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        fail(errc::io_error, path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Interaction log
// ---------------------------------------------------------------------------

inline InteractionRecord interaction_from_json(const json& j) {
    InteractionRecord rec;
    rec.query_text = j.at("query_text").get<std::string>();
    rec.query_class = j.value("query_class", "");
    if (j.contains("retrieved_ids"))
        rec.retrieved_ids = j["retrieved_ids"].get<std::vector<std::string>>();
    if (j.contains("relevant") && !j["relevant"].is_null())
        rec.relevant = j["relevant"].get<std::vector<bool>>();
    rec.outcome = parse_outcome(j.value("outcome", "unresolved"));
    if (j.contains("correct") && !j["correct"].is_null()) rec.correct = j["correct"].get<bool>();
    rec.timestamp = j.value("timestamp", std::int64_t{0});
    rec.validate();
    return rec;
}

inline std::vector<InteractionRecord> read_log(const std::string& path) {
    std::vector<InteractionRecord> log;
    detail::for_each_jsonl(path, [&](const json& j, std::size_t line_no) {
        try {
            log.push_back(interaction_from_json(j));
        } catch (const json::exception& e) {
            fail(errc::io_error, path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    });
    return log;
}

inline void write_log(const std::string& path, const std::vector<InteractionRecord>& log) {
    std::ostringstream out;
    for (const auto& rec : log) {
        json j{{"query_text", rec.query_text},
               {"retrieved_ids", rec.retrieved_ids},
               {"outcome", outcome_name(rec.outcome)},
               {"timestamp", rec.timestamp}};
        if (!rec.query_class.empty()) j["query_class"] = rec.query_class;
        if (rec.relevant) j["relevant"] = *rec.relevant;
        if (rec.correct) j["correct"] = *rec.correct;
        out << j.dump() << '\n';
    }
    write_file_atomic(path, out.str());
}

// ---------------------------------------------------------------------------
// Fragments (segment subcommand output)
// ---------------------------------------------------------------------------

inline json fragment_to_json(const Fragment& f) {
    json j{{"doc_id", f.doc_id},
           {"span", {f.span_start, f.span_end}},
           {"text", f.text},
           {"token_count", f.token_count},
           {"depth", f.depth},
           {"boundary_confidence", f.boundary_confidence}};
    if (f.majority_topic) j["topic"] = *f.majority_topic;
    return j;
}

}  // namespace sdp::io
