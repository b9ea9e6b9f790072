#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sdp/error.hpp"

namespace sdp {

using json = nlohmann::json;
using TopicLabel = std::string;

// ---------------------------------------------------------------------------
// Tokenization
//
// Splits on Unicode whitespace, lowercases ASCII letters, then strips leading
// and trailing punctuation from each token. Punctuation means the ASCII punct
// set plus the common typographic marks (en/em dash, curly quotes, ellipsis);
// interior punctuation such as hyphens survives. Full Unicode case folding is
// deliberately out of scope.
// ---------------------------------------------------------------------------

namespace detail {

struct Utf8Char {
    char32_t cp;
    int len;  // bytes consumed; 1 for invalid sequences (treated as opaque)
};

inline Utf8Char decode_utf8(std::string_view s, std::size_t i) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) return {b0, 1};
    auto cont = [&](std::size_t k) {
        return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0 && cont(1)) {
        char32_t cp = ((b0 & 0x1Fu) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu);
        return {cp, 2};
    }
    if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        char32_t cp = ((b0 & 0x0Fu) << 12) | ((static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 6) |
                      (static_cast<unsigned char>(s[i + 2]) & 0x3Fu);
        return {cp, 3};
    }
    if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        char32_t cp = ((b0 & 0x07u) << 18) | ((static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 12) |
                      ((static_cast<unsigned char>(s[i + 2]) & 0x3Fu) << 6) |
                      (static_cast<unsigned char>(s[i + 3]) & 0x3Fu);
        return {cp, 4};
    }
    return {0xFFFD, 1};
}

inline bool is_space_cp(char32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

inline bool is_strip_punct_cp(char32_t cp) {
    if (cp < 0x80) return std::ispunct(static_cast<int>(cp)) != 0;
    switch (cp) {
        case 0x2013: case 0x2014:              // en dash, em dash
        case 0x2018: case 0x2019:              // curly single quotes
        case 0x201C: case 0x201D:              // curly double quotes
        case 0x2026:                           // ellipsis
            return true;
        default:
            return false;
    }
}

}  // namespace detail

inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&]() {
        if (current.empty()) return;
        // Strip punctuation from both edges, codepoint-aware.
        std::size_t begin = 0;
        while (begin < current.size()) {
            auto c = detail::decode_utf8(current, begin);
            if (!detail::is_strip_punct_cp(c.cp)) break;
            begin += static_cast<std::size_t>(c.len);
        }
        // Walk forward recording the start of the last non-punct run's end.
        std::size_t end = begin, scan = begin;
        while (scan < current.size()) {
            auto c = detail::decode_utf8(current, scan);
            scan += static_cast<std::size_t>(c.len);
            if (!detail::is_strip_punct_cp(c.cp)) end = scan;
        }
        if (end > begin) tokens.emplace_back(current.substr(begin, end - begin));
        current.clear();
    };
    std::size_t i = 0;
    while (i < text.size()) {
        auto c = detail::decode_utf8(text, i);
        if (detail::is_space_cp(c.cp)) {
            flush();
        } else if (c.cp < 0x80) {
            current.push_back(static_cast<char>(std::tolower(static_cast<int>(c.cp))));
        } else {
            current.append(text.substr(i, static_cast<std::size_t>(c.len)));
        }
        i += static_cast<std::size_t>(c.len);
    }
    flush();
    return tokens;
}

inline int count_tokens(std::string_view text) {
    return static_cast<int>(tokenize(text).size());
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

enum class DocType { normative, procedural, reference, computational, unclassified };

inline const char* doc_type_name(DocType t) {
    switch (t) {
        case DocType::normative: return "normative";
        case DocType::procedural: return "procedural";
        case DocType::reference: return "reference";
        case DocType::computational: return "computational";
        case DocType::unclassified: return "unclassified";
    }
    return "unclassified";
}

// Unknown strings map to unclassified so the in-memory enum stays closed.
inline DocType parse_doc_type(std::string_view s) {
    if (s == "normative") return DocType::normative;
    if (s == "procedural") return DocType::procedural;
    if (s == "reference") return DocType::reference;
    if (s == "computational") return DocType::computational;
    return DocType::unclassified;
}

struct Segment {
    std::string doc_id;
    int index = 0;  // 0-based position within the document
    std::string text;
    int token_count = 0;
    std::optional<TopicLabel> topic;
    json extra = json::object();  // unknown input fields, preserved on write
};

struct Document {
    std::string id;
    std::string title;
    DocType doc_type = DocType::unclassified;
    std::map<std::string, std::string> metadata;  // domain/geographic/temporal/persona/...
    std::vector<Segment> segments;
    json extra = json::object();
};

using Corpus = std::vector<Document>;

struct ValidationIssue {
    errc code;
    std::string detail;
};

// Structural checks: non-empty texts, contiguous 0-based indexes, no duplicate
// indexes. Reported all at once so a caller can show every problem.
inline std::vector<ValidationIssue> validate_issues(const Document& doc) {
    std::vector<ValidationIssue> issues;
    if (doc.id.empty()) issues.push_back({errc::invalid_spec, "document id is empty"});
    std::set<int> seen;
    for (std::size_t i = 0; i < doc.segments.size(); ++i) {
        const Segment& seg = doc.segments[i];
        std::string where = "doc '" + doc.id + "' segment index " + std::to_string(seg.index);
        if (seg.text.find_first_not_of(" \t\r\n") == std::string::npos)
            issues.push_back({errc::empty_segment, where + " has empty text"});
        if (!seen.insert(seg.index).second)
            issues.push_back({errc::duplicate_id, where + " repeats an index"});
        else if (seg.index != static_cast<int>(i))
            issues.push_back({errc::index_gap, where + " breaks the contiguous 0..n-1 numbering (expected " +
                                                    std::to_string(i) + ")"});
    }
    return issues;
}

// Returns the document with token counts recomputed; throws on the first
// structural issue, message carrying all of them.
inline Document validate_document(Document doc) {
    auto issues = validate_issues(doc);
    if (!issues.empty()) {
        std::string msg = issues.front().detail;
        for (std::size_t i = 1; i < issues.size(); ++i) msg += "; " + issues[i].detail;
        fail(issues.front().code, msg);
    }
    for (auto& seg : doc.segments) {
        seg.doc_id = doc.id;
        seg.token_count = count_tokens(seg.text);
    }
    return doc;
}

}  // namespace sdp
