#include "prefforge/data/validate.hpp"

#include "prefforge/data/think.hpp"

namespace prefforge::data {

namespace {

void check_raw(const RawQuestion& rec, ValidationReport& report) {
    if (rec.id.empty()) report.add("id", "must be non-empty");
    if (rec.q_raw.empty()) report.add("q_raw", "must be non-empty");
}

void check_enhanced(const EnhancedRecord& rec, ValidationReport& report) {
    check_raw(rec, report);
    if (rec.q_enhanced.empty()) report.add("q_enhanced", "must be non-empty");
}

void check_rejected(const RejectedRecord& rec, ValidationReport& report) {
    check_enhanced(rec, report);
    if (rec.y_l.answer.empty()) report.add("y_l.answer", "must be non-empty");
    if (rec.y_l.reasoning.empty() && !rec.reasoning_l_missing) {
        report.add("y_l.reasoning", "empty without missing-trace flag");
    }
    if (!rec.y_l.reasoning.empty() && rec.reasoning_l_missing) {
        report.add("y_l.reasoning", "missing-trace flag set but reasoning present");
    }
}

void check_rag(const RagRecord& rec, ValidationReport& report) {
    check_rejected(rec, report);
    if (rec.rag_content.empty() && !rec.rag_empty) {
        report.add("rag_content", "empty without retrieval-empty flag");
    }
    if (!rec.rag_content.empty() && rec.rag_empty) {
        report.add("rag_content", "retrieval-empty flag set but content present");
    }
}

void check_think_field(std::string_view field, const std::string& text, ValidationReport& report) {
    try {
        (void)split_think(text);
    } catch (const ThinkFormatError& err) {
        report.add(std::string(field), err.reason());
    }
}

}  // namespace

ValidationReport validate_record(const RawQuestion& rec) {
    ValidationReport report;
    check_raw(rec, report);
    return report;
}

ValidationReport validate_record(const EnhancedRecord& rec) {
    ValidationReport report;
    check_enhanced(rec, report);
    return report;
}

ValidationReport validate_record(const RejectedRecord& rec) {
    ValidationReport report;
    check_rejected(rec, report);
    return report;
}

ValidationReport validate_record(const RagRecord& rec) {
    ValidationReport report;
    check_rag(rec, report);
    return report;
}

ValidationReport validate_record(const CotRecord& rec) {
    ValidationReport report;
    check_rag(rec, report);
    if (rec.reasoning_w.empty()) report.add("y_w.reasoning", "must be non-empty");
    return report;
}

ValidationReport validate_record(const FinalRecord& rec) {
    ValidationReport report;
    check_rag(rec, report);
    if (rec.y_w.reasoning.empty()) report.add("y_w.reasoning", "must be non-empty");
    if (rec.y_w.answer.empty()) report.add("y_w.answer", "must be non-empty");
    return report;
}

ValidationReport validate_record(const DpoTriple& rec, const ValidationOptions& options) {
    ValidationReport report;
    if (rec.id.empty()) report.add("id", "must be non-empty");
    const auto& directive = options.think_directive;
    if (!rec.prompt.ends_with(directive)) {
        report.add("prompt", "does not end with think directive '" + directive + "'");
    } else if (rec.prompt.size() == directive.size()) {
        report.add("prompt", "no question before think directive");
    }
    check_think_field("chosen", rec.chosen, report);
    check_think_field("rejected", rec.rejected, report);
    return report;
}

ValidationReport validate_json(const Json& object, Stage stage, ReadMode mode, const ValidationOptions& options) {
    try {
        switch (stage) {
            case Stage::raw: return validate_record(record_from_json<RawQuestion>(object, mode));
            case Stage::enhanced: return validate_record(record_from_json<EnhancedRecord>(object, mode));
            case Stage::rejected: return validate_record(record_from_json<RejectedRecord>(object, mode));
            case Stage::rag: return validate_record(record_from_json<RagRecord>(object, mode));
            case Stage::cot: return validate_record(record_from_json<CotRecord>(object, mode));
            case Stage::final: return validate_record(record_from_json<FinalRecord>(object, mode));
            case Stage::dpo: return validate_record(record_from_json<DpoTriple>(object, mode), options);
        }
    } catch (const SchemaError& err) {
        ValidationReport report;
        report.add("record", err.what());
        return report;
    }
    return {};
}

}  // namespace prefforge::data
