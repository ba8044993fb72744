#pragma once

#include "prefforge/data/records.hpp"
#include "prefforge/pipeline/config.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prefforge::pipeline {

// A record could not be produced at `stage` (generation failed after
// retries, unparseable output, failed validation). The pipeline quarantines
// the record and continues.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& message)
        : std::runtime_error(message), stage_(std::move(stage)) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// The record was deliberately left out by policy (empty retrieval with
// skip_record).
class RecordSkipped : public std::runtime_error {
public:
    RecordSkipped(std::string stage, const std::string& reason)
        : std::runtime_error(reason), stage_(std::move(stage)) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// Stage 1: rewrite q_raw into q_enhanced.
data::EnhancedRecord enhance_question(const data::RawQuestion& rec, const PipelineConfig& config);

// Stage 2: answer q_enhanced directly, capturing the raw reasoning trace as
// y_l. The structured reasoning channel wins; otherwise a think block in the
// text is split off; otherwise the reasoning is empty and flagged missing.
data::RejectedRecord generate_rejected(const data::EnhancedRecord& rec, const PipelineConfig& config);

// Stage 3: attach merged retrieval results for q_enhanced.
data::RagRecord integrate_knowledge(const data::RejectedRecord& rec, const PipelineConfig& config);

// Extracts the step strings of a reasoning chain reply. Accepts a bare JSON
// array, one wrapped in a ```json fence, or an array embedded in prose.
// Throws std::invalid_argument when no non-empty array of strings is found.
std::vector<std::string> parse_cot_steps(std::string_view reply);

// Steps joined by a blank line.
std::string join_cot_steps(const std::vector<std::string>& steps);

// Stage 4.1: the preferred reasoning chain. One format-repair retry is made
// when the reply is not a JSON array of strings.
std::string build_preferred_cot(const data::RagRecord& rec, const PipelineConfig& config);

// Stage 4.2: the preferred answer, written from q_raw, the RAG content and
// reasoning_w. Throws std::invalid_argument on empty reasoning_w.
data::FinalRecord generate_preferred_answer(const data::RagRecord& rec, const std::string& reasoning_w,
                                            const PipelineConfig& config);

// Stage 5: prompt/chosen/rejected triple.
data::DpoTriple format_dpo(const data::FinalRecord& rec, const PipelineConfig& config);

}  // namespace prefforge::pipeline
