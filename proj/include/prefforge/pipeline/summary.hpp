#pragma once

#include "prefforge/data/records.hpp"
#include "prefforge/pipeline/runner.hpp"

#include <string>

namespace prefforge::pipeline {

// Fixed-width table, one row per step plus a total row. Columns are always
// step, input, success, failed, skipped, reused.
std::string format_run_summary(const RunSummary& summary);

data::Json summary_to_json(const RunSummary& summary);

}  // namespace prefforge::pipeline
