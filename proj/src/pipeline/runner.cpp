#include "prefforge/pipeline/runner.hpp"

#include "prefforge/data/stage_io.hpp"
#include "prefforge/data/validate.hpp"
#include "prefforge/pipeline/stages.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

namespace prefforge::pipeline {

namespace fs = std::filesystem;

namespace {

template <class Out>
struct StepOutcome {
    std::vector<Out> outputs;
    // Per input index: issue stage label when the record failed or was skipped.
    std::vector<std::optional<RecordIssue>> failures;
    std::vector<std::optional<RecordIssue>> skips;
    std::vector<bool> reused;
    std::vector<bool> succeeded;
    bool interrupted = false;
};

// Records appended to a .partial file while a step runs. A crash can leave
// a torn last line, which is ignored.
template <class Out>
void load_partial(const fs::path& path, std::map<std::string, Out>& into) {
    std::ifstream in(path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        auto parsed = data::Json::parse(line, nullptr, false);
        if (parsed.is_discarded()) continue;
        try {
            auto record = data::record_from_json<Out>(parsed, data::ReadMode::strict);
            into.insert_or_assign(record.id, std::move(record));
        } catch (const data::SchemaError&) {
        }
    }
}

template <class Out, class In, class Fn>
StepOutcome<Out> execute(Step step, const std::vector<In>& inputs, Fn fn, const fs::path& out_path,
                         const PipelineConfig& config, const RunOptions& options) {
    const std::size_t n = inputs.size();
    StepOutcome<Out> outcome;
    outcome.failures.resize(n);
    outcome.skips.resize(n);
    outcome.reused.assign(n, false);

    fs::path partial_path = out_path;
    partial_path += ".partial";

    std::map<std::string, Out> previous;
    if (options.resume) {
        if (fs::exists(out_path)) {
            for (auto& record : data::read_stage_file<Out>(out_path, data::ReadMode::strict)) {
                previous.insert_or_assign(record.id, std::move(record));
            }
        }
        if (fs::exists(partial_path)) load_partial(partial_path, previous);
    } else {
        fs::remove(partial_path);
    }

    std::vector<std::optional<Out>> results(n);
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < n; ++i) {
        if (auto it = previous.find(inputs[i].id); it != previous.end()) {
            results[i] = it->second;
            outcome.reused[i] = true;
        } else {
            pending.push_back(i);
        }
    }

    if (!pending.empty()) {
        std::ofstream partial(partial_path, std::ios::binary | std::ios::app);
        if (!partial) throw PipelineError("cannot write " + partial_path.string());
        std::mutex partial_mutex;
        std::atomic<std::size_t> next{0};
        std::atomic<bool> stopped{false};

        auto worker = [&] {
            for (;;) {
                if (options.stop_requested && options.stop_requested->load()) {
                    stopped = true;
                    return;
                }
                const std::size_t slot = next.fetch_add(1);
                if (slot >= pending.size()) return;
                const std::size_t i = pending[slot];
                const auto& input = inputs[i];
                try {
                    Out out = fn(input);
                    {
                        std::lock_guard lock(partial_mutex);
                        partial << data::serialize_line(out);
                        partial.flush();
                    }
                    results[i] = std::move(out);
                } catch (const RecordSkipped& skip) {
                    outcome.skips[i] = RecordIssue{input.id, skip.stage(), skip.what()};
                } catch (const StageError& err) {
                    outcome.failures[i] = RecordIssue{input.id, err.stage(), err.what()};
                } catch (const std::exception& err) {
                    outcome.failures[i] = RecordIssue{input.id, std::string(step_name(step)), err.what()};
                }
            }
        };

        const std::size_t workers = std::min(config.concurrency, pending.size());
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
        threads.clear();
        outcome.interrupted = stopped.load();
    }

    outcome.succeeded.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (!results[i]) continue;
        outcome.succeeded[i] = true;
        outcome.outputs.push_back(std::move(*results[i]));
    }
    if (!outcome.interrupted) {
        data::write_stage_file(outcome.outputs, out_path);
        fs::remove(partial_path);
    }
    return outcome;
}

template <class Out, class In>
StepCounts count_step(Step step, const std::vector<In>& inputs, const StepOutcome<Out>& outcome) {
    StepCounts counts;
    counts.step = step;
    counts.input = inputs.size();
    counts.success = outcome.outputs.size();
    for (const auto& f : outcome.failures) counts.failed += f.has_value();
    for (const auto& s : outcome.skips) counts.skipped += s.has_value();
    counts.reused = static_cast<std::size_t>(std::count(outcome.reused.begin(), outcome.reused.end(), true));
    return counts;
}

template <class Out>
void collect_issues(const StepOutcome<Out>& outcome, RunSummary& summary) {
    for (const auto& f : outcome.failures) {
        if (f) summary.failures.push_back(*f);
    }
    for (const auto& s : outcome.skips) {
        if (s) summary.skipped.push_back(*s);
    }
}

std::string issues_jsonl(const std::vector<RecordIssue>& issues, const char* message_key) {
    std::string out;
    for (const auto& issue : issues) {
        data::Json row = data::Json::object();
        row["id"] = issue.id;
        row["stage"] = issue.stage;
        row[message_key] = issue.message;
        out += row.dump(-1, ' ', false, data::Json::error_handler_t::replace);
        out.push_back('\n');
    }
    return out;
}

std::vector<RecordIssue> read_issues(const fs::path& path, const char* message_key) {
    std::vector<RecordIssue> issues;
    if (!fs::exists(path)) return issues;
    for (const auto& line : data::read_json_lines(path, true)) {
        issues.push_back({line.value.value("id", ""), line.value.value("stage", ""), line.value.value(message_key, "")});
    }
    return issues;
}

void write_issue_files(const fs::path& dir, const RunSummary& summary) {
    data::write_file_atomic(dir / kFailedFile, issues_jsonl(summary.failures, "error"));
    data::write_file_atomic(dir / kSkippedFile, issues_jsonl(summary.skipped, "reason"));
}

// Combined preferred-sample step: reasoning chain, then answer.
data::FinalRecord prefer(const data::RagRecord& rec, const PipelineConfig& config) {
    const auto reasoning = build_preferred_cot(rec, config);
    return generate_preferred_answer(rec, reasoning, config);
}

void prepare_output_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw PipelineError("cannot create output directory " + dir.string());
    const auto probe = dir / ".write-probe";
    {
        std::ofstream out(probe);
        if (!out) throw PipelineError("output directory " + dir.string() + " is not writable");
    }
    fs::remove(probe, ec);
}

template <class T>
std::vector<T> load_step_input(const fs::path& path) {
    try {
        return data::read_stage_file<T>(path, data::ReadMode::lenient);
    } catch (const data::StageFileError& err) {
        throw PipelineError(path.string() + ": " + err.what());
    }
}

}  // namespace

std::string_view step_name(Step step) {
    switch (step) {
        case Step::enhance: return "enhance";
        case Step::reject: return "reject";
        case Step::retrieve: return "retrieve";
        case Step::cot: return "cot";
        case Step::answer: return "answer";
        case Step::format: return "format";
    }
    return "unknown";
}

std::vector<data::RawQuestion> load_raw_questions(const fs::path& path) {
    auto records = load_step_input<data::RawQuestion>(path);
    std::string problems;
    std::size_t count = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (const auto& v : data::validate_record(records[i]).violations) {
            if (count++ < 10) problems += "\n  record " + std::to_string(i + 1) + ": " + v.to_string();
        }
    }
    for (const auto& v : data::validate_ids(records).violations) {
        if (count++ < 10) problems += "\n  " + v.to_string();
    }
    if (count > 0) {
        throw PipelineError(path.string() + ": " + std::to_string(count) + " invalid field(s)" + problems);
    }
    return records;
}

RunSummary run_pipeline(const fs::path& raw_path, const fs::path& out_dir, const PipelineConfig& config,
                        const RunOptions& options) {
    validate_config(config);
    const auto raw = load_raw_questions(raw_path);
    prepare_output_dir(out_dir);

    RunSummary summary;
    summary.input_count = raw.size();

    auto finish = [&](bool interrupted) {
        summary.interrupted = interrupted;
        write_issue_files(out_dir, summary);
        return summary;
    };
    auto stop_here = [&](Step step, bool interrupted) {
        return interrupted || (options.stop_after && *options.stop_after == step);
    };

    try {
        auto enhanced = execute<data::EnhancedRecord>(
            Step::enhance, raw, [&](const data::RawQuestion& r) { return enhance_question(r, config); },
            out_dir / kEnhancedFile, config, options);
        summary.steps.push_back(count_step(Step::enhance, raw, enhanced));
        collect_issues(enhanced, summary);
        if (stop_here(Step::enhance, enhanced.interrupted)) return finish(true);

        auto rejected = execute<data::RejectedRecord>(
            Step::reject, enhanced.outputs,
            [&](const data::EnhancedRecord& r) { return generate_rejected(r, config); }, out_dir / kRejectedFile,
            config, options);
        summary.steps.push_back(count_step(Step::reject, enhanced.outputs, rejected));
        collect_issues(rejected, summary);
        if (stop_here(Step::reject, rejected.interrupted)) return finish(true);

        auto rag = execute<data::RagRecord>(
            Step::retrieve, rejected.outputs,
            [&](const data::RejectedRecord& r) { return integrate_knowledge(r, config); }, out_dir / kRagFile,
            config, options);
        summary.steps.push_back(count_step(Step::retrieve, rejected.outputs, rag));
        collect_issues(rag, summary);
        if (stop_here(Step::retrieve, rag.interrupted)) return finish(true);

        auto final_records = execute<data::FinalRecord>(
            Step::answer, rag.outputs, [&](const data::RagRecord& r) { return prefer(r, config); },
            out_dir / kFinalFile, config, options);
        {
            // Split the combined step into its two sub-steps for reporting.
            StepCounts cot{Step::cot, rag.outputs.size()};
            StepCounts answer{Step::answer};
            for (std::size_t i = 0; i < rag.outputs.size(); ++i) {
                const auto& failure = final_records.failures[i];
                if (failure && failure->stage == "cot") {
                    ++cot.failed;
                } else if (failure) {
                    ++cot.success;
                    ++answer.input;
                    ++answer.failed;
                } else if (final_records.succeeded[i]) {
                    ++cot.success;
                    ++answer.input;
                    ++answer.success;
                    cot.reused += final_records.reused[i];
                    answer.reused += final_records.reused[i];
                }
            }
            summary.steps.push_back(cot);
            summary.steps.push_back(answer);
        }
        collect_issues(final_records, summary);
        if (stop_here(Step::cot, final_records.interrupted) || stop_here(Step::answer, final_records.interrupted)) {
            return finish(true);
        }

        auto dpo = execute<data::DpoTriple>(
            Step::format, final_records.outputs, [&](const data::FinalRecord& r) { return format_dpo(r, config); },
            out_dir / kDpoFile, config, options);
        summary.steps.push_back(count_step(Step::format, final_records.outputs, dpo));
        collect_issues(dpo, summary);
        summary.success_count = dpo.outputs.size();
        return finish(dpo.interrupted);
    } catch (const data::StageFileError& err) {
        throw PipelineError(err.what());
    } catch (const fs::filesystem_error& err) {
        throw PipelineError(err.what());
    }
}

RunSummary run_step(Step step, const fs::path& in_path, const fs::path& out_path, const PipelineConfig& config,
                    const RunOptions& options) {
    validate_config(config);
    const auto dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
    prepare_output_dir(dir);

    RunSummary summary;
    auto run = [&]<class In, class Out>(std::vector<In> inputs, auto fn) {
        summary.input_count = inputs.size();
        auto outcome = execute<Out>(step, inputs, fn, out_path, config, options);
        summary.steps.push_back(count_step(step, inputs, outcome));
        collect_issues(outcome, summary);
        summary.success_count = outcome.outputs.size();
        summary.interrupted = outcome.interrupted;
    };

    try {
        switch (step) {
            case Step::enhance:
                run.operator()<data::RawQuestion, data::EnhancedRecord>(
                    load_raw_questions(in_path), [&](const data::RawQuestion& r) { return enhance_question(r, config); });
                break;
            case Step::reject:
                run.operator()<data::EnhancedRecord, data::RejectedRecord>(
                    load_step_input<data::EnhancedRecord>(in_path),
                    [&](const data::EnhancedRecord& r) { return generate_rejected(r, config); });
                break;
            case Step::retrieve:
                run.operator()<data::RejectedRecord, data::RagRecord>(
                    load_step_input<data::RejectedRecord>(in_path),
                    [&](const data::RejectedRecord& r) { return integrate_knowledge(r, config); });
                break;
            case Step::cot:
                run.operator()<data::RagRecord, data::CotRecord>(
                    load_step_input<data::RagRecord>(in_path), [&](const data::RagRecord& r) {
                        data::CotRecord out;
                        static_cast<data::RagRecord&>(out) = r;
                        out.reasoning_w = build_preferred_cot(r, config);
                        return out;
                    });
                break;
            case Step::answer:
                run.operator()<data::CotRecord, data::FinalRecord>(
                    load_step_input<data::CotRecord>(in_path), [&](const data::CotRecord& r) {
                        return generate_preferred_answer(r, r.reasoning_w, config);
                    });
                break;
            case Step::format:
                run.operator()<data::FinalRecord, data::DpoTriple>(
                    load_step_input<data::FinalRecord>(in_path),
                    [&](const data::FinalRecord& r) { return format_dpo(r, config); });
                break;
        }

        // Keep issues recorded by other steps in the same directory.
        const auto own = std::string(step_name(step));
        auto merge = [&](std::vector<RecordIssue> existing, const std::vector<RecordIssue>& fresh) {
            std::erase_if(existing, [&](const RecordIssue& issue) { return issue.stage == own; });
            existing.insert(existing.end(), fresh.begin(), fresh.end());
            return existing;
        };
        RunSummary files = summary;
        files.failures = merge(read_issues(dir / kFailedFile, "error"), summary.failures);
        files.skipped = merge(read_issues(dir / kSkippedFile, "reason"), summary.skipped);
        write_issue_files(dir, files);
    } catch (const data::StageFileError& err) {
        throw PipelineError(err.what());
    } catch (const fs::filesystem_error& err) {
        throw PipelineError(err.what());
    }
    return summary;
}

}  // namespace prefforge::pipeline
