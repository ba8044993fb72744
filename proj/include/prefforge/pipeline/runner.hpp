#pragma once

#include "prefforge/data/records.hpp"
#include "prefforge/pipeline/config.hpp"

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prefforge::pipeline {

// Steps executed by the runner. `cot` and `answer` together form the
// preferred-sample stage and write 04_final.jsonl when run as part of a
// full pipeline.
enum class Step { enhance, reject, retrieve, cot, answer, format };

std::string_view step_name(Step step);

inline constexpr std::string_view kEnhancedFile = "01_enhanced.jsonl";
inline constexpr std::string_view kRejectedFile = "02_rejected.jsonl";
inline constexpr std::string_view kRagFile = "03_rag.jsonl";
inline constexpr std::string_view kFinalFile = "04_final.jsonl";
inline constexpr std::string_view kDpoFile = "05_dpo.jsonl";
inline constexpr std::string_view kFailedFile = "failed.jsonl";
inline constexpr std::string_view kSkippedFile = "skipped.jsonl";

// Fatal problems: unreadable or invalid input, unwritable output.
class PipelineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StepCounts {
    Step step = Step::enhance;
    std::size_t input = 0;
    std::size_t success = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
    // Outputs taken over from a previous run instead of regenerated.
    std::size_t reused = 0;

    bool operator==(const StepCounts&) const = default;
};

struct RecordIssue {
    std::string id;
    std::string stage;
    std::string message;

    bool operator==(const RecordIssue&) const = default;
};

struct RunSummary {
    std::size_t input_count = 0;
    std::size_t success_count = 0;
    std::vector<StepCounts> steps;
    std::vector<RecordIssue> failures;
    std::vector<RecordIssue> skipped;
    // Stopped early, by request or because stop_after was reached.
    bool interrupted = false;

    std::size_t failed_count() const { return failures.size(); }
    std::size_t skipped_count() const { return skipped.size(); }
};

struct RunOptions {
    // Reuse records already present in a step's output (and its .partial
    // companion) instead of regenerating them.
    bool resume = false;
    // Stop after this step completes, as if the process had been killed.
    std::optional<Step> stop_after;
    // Checked before each record starts; in-flight records finish.
    const std::atomic<bool>* stop_requested = nullptr;
};

/// Runs all five stages from a raw-question JSONL file into `out_dir`. Each
/// stage file is complete before the next stage reads it. Failed records go
/// to failed.jsonl, records skipped by policy to skipped.jsonl. Throws
/// PipelineError for an invalid raw file or unwritable output directory.
RunSummary run_pipeline(const std::filesystem::path& raw_path, const std::filesystem::path& out_dir,
                        const PipelineConfig& config, const RunOptions& options = {});

/// Runs one step over `in_path`, writing `out_path`. Input and output record
/// types follow the step: enhance raw->enhanced, reject enhanced->rejected,
/// retrieve rejected->rag, cot rag->cot, answer cot->final, format
/// final->dpo. Failures and skips are written next to the output as
/// failed.jsonl / skipped.jsonl.
RunSummary run_step(Step step, const std::filesystem::path& in_path, const std::filesystem::path& out_path,
                    const PipelineConfig& config, const RunOptions& options = {});

// Reads raw questions leniently and checks them. Throws PipelineError with
// every problem found.
std::vector<data::RawQuestion> load_raw_questions(const std::filesystem::path& path);

}  // namespace prefforge::pipeline
