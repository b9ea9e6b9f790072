#pragma once

#include <stdexcept>
#include <string>

namespace sdp {

// Stable error codes. The CLI maps these to machine-readable diagnostics, so
// renaming an enumerator is a breaking change.
enum class errc {
    empty_segment,
    index_gap,
    duplicate_id,
    unknown_document,
    zero_vector,
    dim_mismatch,
    length_mismatch,
    unknown_topic,
    unknown_segment,
    unknown_text,
    alpha_out_of_range,
    theta_out_of_range,
    gap_out_of_range,
    percent_out_of_range,
    empty_corpus,
    empty_input,
    degenerate,
    too_few_annotators,
    calibration_gate_failed,
    empty_calibration_set,
    overlapping_sets,
    no_cross_topic_pairs,
    alpha_degenerate,
    generator_failed,
    fragment_mismatch,
    no_domains,
    empty_taxonomy,
    faithfulness_violation,
    invalid_spec,
    io_error,
    schema_version_mismatch,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::empty_segment: return "EMPTY_SEGMENT";
        case errc::index_gap: return "INDEX_GAP";
        case errc::duplicate_id: return "DUPLICATE_ID";
        case errc::unknown_document: return "UNKNOWN_DOCUMENT";
        case errc::zero_vector: return "ZERO_VECTOR";
        case errc::dim_mismatch: return "DIM_MISMATCH";
        case errc::length_mismatch: return "LENGTH_MISMATCH";
        case errc::unknown_topic: return "UNKNOWN_TOPIC";
        case errc::unknown_segment: return "UNKNOWN_SEGMENT";
        case errc::unknown_text: return "UNKNOWN_TEXT";
        case errc::alpha_out_of_range: return "ALPHA_OUT_OF_RANGE";
        case errc::theta_out_of_range: return "THETA_OUT_OF_RANGE";
        case errc::gap_out_of_range: return "GAP_OUT_OF_RANGE";
        case errc::percent_out_of_range: return "PERCENT_OUT_OF_RANGE";
        case errc::empty_corpus: return "EMPTY_CORPUS";
        case errc::empty_input: return "EMPTY_INPUT";
        case errc::degenerate: return "DEGENERATE";
        case errc::too_few_annotators: return "TOO_FEW_ANNOTATORS";
        case errc::calibration_gate_failed: return "CALIBRATION_GATE_FAILED";
        case errc::empty_calibration_set: return "EMPTY_CALIBRATION_SET";
        case errc::overlapping_sets: return "OVERLAPPING_SETS";
        case errc::no_cross_topic_pairs: return "NO_CROSS_TOPIC_PAIRS";
        case errc::alpha_degenerate: return "ALPHA_DEGENERATE";
        case errc::generator_failed: return "GENERATOR_FAILED";
        case errc::fragment_mismatch: return "FRAGMENT_MISMATCH";
        case errc::no_domains: return "NO_DOMAINS";
        case errc::empty_taxonomy: return "EMPTY_TAXONOMY";
        case errc::faithfulness_violation: return "FAITHFULNESS_VIOLATION";
        case errc::invalid_spec: return "INVALID_SPEC";
        case errc::io_error: return "IO_ERROR";
        case errc::schema_version_mismatch: return "SCHEMA_VERSION_MISMATCH";
    }
    return "UNKNOWN";
}

class error : public std::runtime_error {
  public:
    error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
    throw error(code, message);
}

}  // namespace sdp
