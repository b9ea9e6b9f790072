#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sdp/embed.hpp"
#include "sdp/error.hpp"
#include "sdp/knowledge_object.hpp"
#include "sdp/util.hpp"

namespace sdp {

// Conjunctive equality constraints over knowledge-object metadata.
using MetadataFilter = std::map<std::string, std::string>;

struct QueryHit {
    std::string id;
    double similarity = 0.0;
};

inline json knowledge_object_to_json(const KnowledgeObject& ko) {
    json j;
    j["id"] = ko.id;
    j["header"] = ko.header;
    j["primary_text"] = ko.primary_text;
    j["raw_fragment"] = ko.raw_fragment;
    j["metadata"] = ko.metadata;
    j["provenance"] = {{"source_doc_id", ko.provenance.source_doc_id},
                       {"span_start", ko.provenance.span_start},
                       {"span_end", ko.provenance.span_end},
                       {"sibling_ids", ko.provenance.sibling_ids},
                       {"boundary_confidence", ko.provenance.boundary_confidence}};
    j["usage"] = {{"query_type_tags", ko.usage.query_type_tags},
                  {"retrieval_count", ko.usage.retrieval_count},
                  {"answered_count", ko.usage.answered_count},
                  {"hallucination_count", ko.usage.hallucination_count},
                  {"signposts", ko.usage.signposts}};
    j["vector"] = ko.vector;
    return j;
}

inline KnowledgeObject knowledge_object_from_json(const json& j) {
    KnowledgeObject ko;
    ko.id = j.at("id").get<std::string>();
    ko.header = j.value("header", "");
    ko.primary_text = j.at("primary_text").get<std::string>();
    ko.raw_fragment = j.value("raw_fragment", "");
    if (j.contains("metadata"))
        ko.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    if (j.contains("provenance")) {
        const json& p = j.at("provenance");
        ko.provenance.source_doc_id = p.value("source_doc_id", "");
        ko.provenance.span_start = p.value("span_start", 0);
        ko.provenance.span_end = p.value("span_end", 0);
        if (p.contains("sibling_ids"))
            ko.provenance.sibling_ids = p.at("sibling_ids").get<std::vector<std::string>>();
        ko.provenance.boundary_confidence = p.value("boundary_confidence", 1.0);
    }
    if (j.contains("usage")) {
        const json& u = j.at("usage");
        if (u.contains("query_type_tags"))
            ko.usage.query_type_tags = u.at("query_type_tags").get<std::vector<std::string>>();
        ko.usage.retrieval_count = u.value("retrieval_count", 0);
        ko.usage.answered_count = u.value("answered_count", 0);
        ko.usage.hallucination_count = u.value("hallucination_count", 0);
        if (u.contains("signposts"))
            ko.usage.signposts = u.at("signposts").get<std::vector<std::string>>();
    }
    ko.vector = j.at("vector").get<EmbeddingVector>();
    return ko;
}

// Exact-scan vector store over knowledge objects. Query ranks every object
// (optionally metadata-filtered) by cosine similarity, ties broken by
// ascending id, so results are a total order independent of insertion.
class KnowledgeStore {
  public:
    KnowledgeStore() = default;

    static KnowledgeStore index(std::vector<KnowledgeObject> objects) {
        KnowledgeStore store;
        for (auto& ko : objects) store.add(std::move(ko));
        return store;
    }

    void add(KnowledgeObject ko) {
        if (ko.id.empty()) fail(errc::invalid_spec, "knowledge object with empty id");
        if (ko.vector.empty()) fail(errc::zero_vector, "knowledge object '" + ko.id + "' has no vector");
        if (dim_ == 0) dim_ = static_cast<int>(ko.vector.size());
        if (static_cast<int>(ko.vector.size()) != dim_)
            fail(errc::dim_mismatch, "object '" + ko.id + "' has " + std::to_string(ko.vector.size()) +
                                         " dims, store holds " + std::to_string(dim_));
        if (by_id_.count(ko.id)) fail(errc::duplicate_id, "duplicate knowledge object id '" + ko.id + "'");
        order_.push_back(ko.id);
        by_id_.emplace(ko.id, std::move(ko));
    }

    std::size_t size() const { return order_.size(); }
    int dim() const { return dim_; }
    const std::vector<std::string>& ids() const { return order_; }

    const KnowledgeObject& get(const std::string& id) const {
        auto it = by_id_.find(id);
        if (it == by_id_.end()) fail(errc::unknown_document, "no knowledge object with id '" + id + "'");
        return it->second;
    }

    KnowledgeObject* find_mut(const std::string& id) {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : &it->second;
    }

    bool matches(const KnowledgeObject& ko, const MetadataFilter& filter) const {
        for (const auto& [key, want] : filter) {
            auto it = ko.metadata.find(key);
            if (it == ko.metadata.end() || it->second != want) return false;
        }
        return true;
    }

    // Top-k by (similarity desc, id asc). An empty store yields no hits; a
    // filter nobody matches likewise.
    std::vector<QueryHit> query(const EmbeddingVector& query_vector, int k,
                                const MetadataFilter& filter = {}) const {
        if (k <= 0) fail(errc::invalid_spec, "k must be positive");
        if (order_.empty()) return {};
        if (static_cast<int>(query_vector.size()) != dim_)
            fail(errc::dim_mismatch, "query vector has " + std::to_string(query_vector.size()) +
                                         " dims, store holds " + std::to_string(dim_));
        std::vector<QueryHit> hits;
        for (const auto& id : order_) {
            const KnowledgeObject& ko = by_id_.at(id);
            if (!matches(ko, filter)) continue;
            hits.push_back({id, cosine_sim(query_vector, ko.vector)});
        }
        std::sort(hits.begin(), hits.end(), [](const QueryHit& a, const QueryHit& b) {
            if (a.similarity != b.similarity) return a.similarity > b.similarity;
            return a.id < b.id;
        });
        if (static_cast<int>(hits.size()) > k) hits.resize(static_cast<std::size_t>(k));
        return hits;
    }

    // JSONL persistence. First line is a header carrying the schema version
    // and dimension; each following line is one object. Doubles round-trip
    // losslessly (shortest-representation serialization).
    void persist(const std::string& path) const {
        std::ostringstream out;
        out << json{{"schema_version", kSchemaVersion}, {"dim", dim_}, {"count", order_.size()}}.dump()
            << '\n';
        for (const auto& id : order_) out << knowledge_object_to_json(by_id_.at(id)).dump() << '\n';
        write_file_atomic(path, out.str());
    }

    static KnowledgeStore load(const std::string& path) {
        std::istringstream in(read_file(path));
        std::string line;
        if (!std::getline(in, line)) fail(errc::io_error, path + " is empty");
        json header;
        try {
            header = json::parse(line);
        } catch (const json::exception& e) {
            fail(errc::io_error, path + " header line is not valid JSON: " + e.what());
        }
        if (!header.contains("schema_version") || !header["schema_version"].is_number_integer())
            fail(errc::schema_version_mismatch, path + " header lacks a schema_version");
        if (header["schema_version"].get<int>() != kSchemaVersion)
            fail(errc::schema_version_mismatch,
                 path + " has schema version " + header["schema_version"].dump() + ", expected " +
                     std::to_string(kSchemaVersion));
        KnowledgeStore store;
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                store.add(knowledge_object_from_json(json::parse(line)));
            } catch (const json::exception& e) {
                fail(errc::io_error, path + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
        if (header.contains("dim") && store.dim_ != 0 && header["dim"].get<int>() != store.dim_)
            fail(errc::dim_mismatch, path + " header dim disagrees with object vectors");
        if (store.dim_ == 0 && header.contains("dim")) store.dim_ = header["dim"].get<int>();
        return store;
    }

    static constexpr int kSchemaVersion = 1;

  private:
    int dim_ = 0;
    std::vector<std::string> order_;
    std::unordered_map<std::string, KnowledgeObject> by_id_;
};

}  // namespace sdp
