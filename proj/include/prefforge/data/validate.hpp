#pragma once

#include "prefforge/data/records.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace prefforge::data {

struct Violation {
    std::string path;
    std::string message;

    std::string to_string() const { return path + ": " + message; }
    bool operator==(const Violation&) const = default;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    void add(std::string path, std::string message) {
        violations.push_back({std::move(path), std::move(message)});
    }
};

struct ValidationOptions {
    // Suffix every DPO prompt must end with.
    std::string think_directive = " /think";
};

// Lists every invariant the record violates for its stage. An empty report
// means the record is valid.
ValidationReport validate_record(const RawQuestion& rec);
ValidationReport validate_record(const EnhancedRecord& rec);
ValidationReport validate_record(const RejectedRecord& rec);
ValidationReport validate_record(const RagRecord& rec);
ValidationReport validate_record(const CotRecord& rec);
ValidationReport validate_record(const FinalRecord& rec);
ValidationReport validate_record(const DpoTriple& rec, const ValidationOptions& options = {});

// Schema and invariant check of an untyped JSON object against a stage.
// Schema problems (missing/unknown fields) are reported as violations too.
ValidationReport validate_json(const Json& object, Stage stage, ReadMode mode = ReadMode::strict,
                               const ValidationOptions& options = {});

// Dataset-level check: ids non-empty and unique. Reports "records[i].id".
template <class T>
ValidationReport validate_ids(const std::vector<T>& records) {
    ValidationReport report;
    std::vector<std::string> seen;
    seen.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        seen.push_back(records[i].id);
    }
    std::vector<std::string> sorted = seen;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto range = std::equal_range(sorted.begin(), sorted.end(), seen[i]);
        if (range.second - range.first > 1) {
            report.add("records[" + std::to_string(i) + "].id", "duplicate id '" + seen[i] + "'");
        }
    }
    return report;
}

}  // namespace prefforge::data
