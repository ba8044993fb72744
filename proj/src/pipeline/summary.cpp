#include "prefforge/pipeline/summary.hpp"

#include <fmt/format.h>

namespace prefforge::pipeline {

std::string format_run_summary(const RunSummary& summary) {
    std::string out = fmt::format("{:<10} {:>8} {:>8} {:>8} {:>8} {:>8}\n", "step", "input", "success", "failed",
                                  "skipped", "reused");
    for (const auto& row : summary.steps) {
        out += fmt::format("{:<10} {:>8} {:>8} {:>8} {:>8} {:>8}\n", step_name(row.step), row.input, row.success,
                           row.failed, row.skipped, row.reused);
    }
    out += fmt::format("{:<10} {:>8} {:>8} {:>8} {:>8}\n", "total", summary.input_count, summary.success_count,
                       summary.failed_count(), summary.skipped_count());
    if (summary.interrupted) out += "run stopped early; rerun with --resume to continue\n";
    return out;
}

data::Json summary_to_json(const RunSummary& summary) {
    data::Json steps = data::Json::array();
    for (const auto& row : summary.steps) {
        steps.push_back({{"step", step_name(row.step)},
                         {"input", row.input},
                         {"success", row.success},
                         {"failed", row.failed},
                         {"skipped", row.skipped},
                         {"reused", row.reused}});
    }
    return {{"input", summary.input_count},
            {"success", summary.success_count},
            {"failed", summary.failed_count()},
            {"skipped", summary.skipped_count()},
            {"interrupted", summary.interrupted},
            {"steps", std::move(steps)}};
}

}  // namespace prefforge::pipeline
