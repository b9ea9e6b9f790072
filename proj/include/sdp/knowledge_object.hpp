#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "sdp/embed.hpp"
#include "sdp/util.hpp"

namespace sdp {

// Self-contained retrieval unit produced by the disentanglement pipeline.
// primary_text is what gets embedded and shown (header + blank line + body);
// raw_fragment preserves the untouched source text for faithfulness checks.
struct KnowledgeObject {
    struct Provenance {
        std::string source_doc_id;
        int span_start = 0;  // 1-based inclusive segment positions
        int span_end = 0;
        std::vector<std::string> sibling_ids;  // domain clones of the same fragment
        double boundary_confidence = 1.0;
    };

    struct Usage {
        std::vector<std::string> query_type_tags;
        int retrieval_count = 0;
        int answered_count = 0;
        int hallucination_count = 0;
        std::vector<std::string> signposts;
    };

    std::string id;
    std::string header;
    std::string primary_text;
    std::string raw_fragment;
    std::map<std::string, std::string> metadata;
    Provenance provenance;
    Usage usage;
    EmbeddingVector vector;
};

// Deterministic object id: FNV-1a over the identifying coordinates. Stable
// across runs and platforms, so re-running the pipeline reproduces ids.
inline std::string knowledge_object_id(const std::string& doc_id, int span_start, int span_end,
                                       const std::string& domain) {
    std::uint64_t h = fnv1a64(doc_id);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(std::to_string(span_start), h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(std::to_string(span_end), h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(domain, h);
    char buf[20];
    std::snprintf(buf, sizeof buf, "ko-%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace sdp
