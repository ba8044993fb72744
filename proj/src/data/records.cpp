#include "prefforge/data/records.hpp"

#include <algorithm>
#include <array>

namespace prefforge::data {

namespace {

constexpr std::array<std::pair<Stage, std::string_view>, 7> kStageNames{{
    {Stage::raw, "raw"},
    {Stage::enhanced, "enhanced"},
    {Stage::rejected, "rejected"},
    {Stage::rag, "rag"},
    {Stage::cot, "cot"},
    {Stage::final, "final"},
    {Stage::dpo, "dpo"},
}};

void put_raw(Json& out, const RawQuestion& rec) {
    out["id"] = rec.id;
    out["q_raw"] = rec.q_raw;
}

void put_enhanced(Json& out, const EnhancedRecord& rec) {
    put_raw(out, rec);
    out["q_enhanced"] = rec.q_enhanced;
}

// Flags are optional booleans, written only when set.
void put_rejected(Json& out, const RejectedRecord& rec) {
    put_enhanced(out, rec);
    out["reasoning_l"] = rec.y_l.reasoning;
    out["answer_l"] = rec.y_l.answer;
    if (rec.reasoning_l_missing) out["reasoning_l_missing"] = true;
}

void put_rag(Json& out, const RagRecord& rec) {
    put_rejected(out, rec);
    out["rag_content"] = rec.rag_content;
    if (rec.rag_empty) out["rag_empty"] = true;
}

void put_extra(Json& out, const ExtraFields& extra) {
    for (const auto& [key, value] : extra.json().items()) {
        if (!out.contains(key)) out[key] = value;
    }
}

std::string get_string(const Json& object, const char* key) {
    auto it = object.find(key);
    if (it == object.end()) throw SchemaError(std::string("missing field '") + key + "'");
    if (!it->is_string()) throw SchemaError(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

bool get_flag(const Json& object, const char* key) {
    auto it = object.find(key);
    if (it == object.end()) return false;
    if (!it->is_boolean()) throw SchemaError(std::string("field '") + key + "' must be a boolean");
    return it->get<bool>();
}

ExtraFields collect_extra(const Json& object, Stage stage, ReadMode mode) {
    if (!object.is_object()) throw SchemaError("record is not a JSON object");
    const auto& known = known_fields(stage);
    ExtraFields extra;
    for (const auto& [key, value] : object.items()) {
        if (std::find(known.begin(), known.end(), key) != known.end()) continue;
        if (mode == ReadMode::strict) {
            throw SchemaError("unknown field '" + key + "' for stage " + std::string(stage_name(stage)));
        }
        extra.set(key, value);
    }
    return extra;
}

void fill_raw(RawQuestion& rec, const Json& object) {
    rec.id = get_string(object, "id");
    rec.q_raw = get_string(object, "q_raw");
}

void fill_enhanced(EnhancedRecord& rec, const Json& object) {
    fill_raw(rec, object);
    rec.q_enhanced = get_string(object, "q_enhanced");
}

void fill_rejected(RejectedRecord& rec, const Json& object) {
    fill_enhanced(rec, object);
    rec.y_l.reasoning = get_string(object, "reasoning_l");
    rec.y_l.answer = get_string(object, "answer_l");
    rec.reasoning_l_missing = get_flag(object, "reasoning_l_missing");
}

void fill_rag(RagRecord& rec, const Json& object) {
    fill_rejected(rec, object);
    rec.rag_content = get_string(object, "rag_content");
    rec.rag_empty = get_flag(object, "rag_empty");
}

}  // namespace

std::string_view stage_name(Stage stage) {
    for (const auto& [s, name] : kStageNames) {
        if (s == stage) return name;
    }
    return "unknown";
}

std::optional<Stage> stage_from_name(std::string_view name) {
    for (const auto& [s, n] : kStageNames) {
        if (n == name) return s;
    }
    return std::nullopt;
}

ExtraFields::ExtraFields(Json object) : fields_(std::move(object)) {
    if (!fields_.is_object()) throw SchemaError("extra fields must be a JSON object");
}

void ExtraFields::set(const std::string& key, Json value) { fields_[key] = std::move(value); }

bool ExtraFields::operator==(const ExtraFields& other) const {
    // nlohmann::json (std::map backed) compares objects irrespective of order.
    return nlohmann::json::parse(fields_.dump()) == nlohmann::json::parse(other.fields_.dump());
}

const std::vector<std::string>& known_fields(Stage stage) {
    static const std::vector<std::string> raw{"id", "q_raw"};
    static const std::vector<std::string> enhanced{"id", "q_raw", "q_enhanced"};
    static const std::vector<std::string> rejected{"id", "q_raw", "q_enhanced", "reasoning_l",
                                                   "answer_l", "reasoning_l_missing"};
    static const std::vector<std::string> rag{"id",          "q_raw",   "q_enhanced", "reasoning_l",
                                              "answer_l",    "reasoning_l_missing",
                                              "rag_content", "rag_empty"};
    static const std::vector<std::string> cot{"id",          "q_raw",   "q_enhanced", "reasoning_l",
                                              "answer_l",    "reasoning_l_missing",
                                              "rag_content", "rag_empty", "reasoning_w"};
    static const std::vector<std::string> final_fields{
        "id",          "q_raw",     "q_enhanced",  "reasoning_l", "answer_l", "reasoning_l_missing",
        "rag_content", "rag_empty", "reasoning_w", "answer_w"};
    static const std::vector<std::string> dpo{"id", "prompt", "chosen", "rejected"};
    switch (stage) {
        case Stage::raw: return raw;
        case Stage::enhanced: return enhanced;
        case Stage::rejected: return rejected;
        case Stage::rag: return rag;
        case Stage::cot: return cot;
        case Stage::final: return final_fields;
        case Stage::dpo: return dpo;
    }
    return raw;
}

Stage detect_stage(const Json& object) {
    if (!object.is_object()) return Stage::raw;
    if (object.contains("prompt") || object.contains("chosen")) return Stage::dpo;
    if (object.contains("answer_w")) return Stage::final;
    if (object.contains("reasoning_w")) return Stage::cot;
    if (object.contains("rag_content")) return Stage::rag;
    if (object.contains("answer_l") || object.contains("reasoning_l")) return Stage::rejected;
    if (object.contains("q_enhanced")) return Stage::enhanced;
    return Stage::raw;
}

Json record_to_json(const RawQuestion& rec) {
    Json out = Json::object();
    put_raw(out, rec);
    put_extra(out, rec.extra);
    return out;
}

Json record_to_json(const EnhancedRecord& rec) {
    Json out = Json::object();
    put_enhanced(out, rec);
    put_extra(out, rec.extra);
    return out;
}

Json record_to_json(const RejectedRecord& rec) {
    Json out = Json::object();
    put_rejected(out, rec);
    put_extra(out, rec.extra);
    return out;
}

Json record_to_json(const RagRecord& rec) {
    Json out = Json::object();
    put_rag(out, rec);
    put_extra(out, rec.extra);
    return out;
}

Json record_to_json(const CotRecord& rec) {
    Json out = Json::object();
    put_rag(out, rec);
    out["reasoning_w"] = rec.reasoning_w;
    put_extra(out, rec.extra);
    return out;
}

Json record_to_json(const FinalRecord& rec) {
    Json out = Json::object();
    put_rag(out, rec);
    out["reasoning_w"] = rec.y_w.reasoning;
    out["answer_w"] = rec.y_w.answer;
    put_extra(out, rec.extra);
    return out;
}

Json record_to_json(const DpoTriple& rec) {
    Json out = Json::object();
    out["id"] = rec.id;
    out["prompt"] = rec.prompt;
    out["chosen"] = rec.chosen;
    out["rejected"] = rec.rejected;
    put_extra(out, rec.extra);
    return out;
}

template <>
RawQuestion record_from_json<RawQuestion>(const Json& object, ReadMode mode) {
    RawQuestion rec;
    rec.extra = collect_extra(object, Stage::raw, mode);
    fill_raw(rec, object);
    return rec;
}

template <>
EnhancedRecord record_from_json<EnhancedRecord>(const Json& object, ReadMode mode) {
    EnhancedRecord rec;
    rec.extra = collect_extra(object, Stage::enhanced, mode);
    fill_enhanced(rec, object);
    return rec;
}

template <>
RejectedRecord record_from_json<RejectedRecord>(const Json& object, ReadMode mode) {
    RejectedRecord rec;
    rec.extra = collect_extra(object, Stage::rejected, mode);
    fill_rejected(rec, object);
    return rec;
}

template <>
RagRecord record_from_json<RagRecord>(const Json& object, ReadMode mode) {
    RagRecord rec;
    rec.extra = collect_extra(object, Stage::rag, mode);
    fill_rag(rec, object);
    return rec;
}

template <>
CotRecord record_from_json<CotRecord>(const Json& object, ReadMode mode) {
    CotRecord rec;
    rec.extra = collect_extra(object, Stage::cot, mode);
    fill_rag(rec, object);
    rec.reasoning_w = get_string(object, "reasoning_w");
    return rec;
}

template <>
FinalRecord record_from_json<FinalRecord>(const Json& object, ReadMode mode) {
    FinalRecord rec;
    rec.extra = collect_extra(object, Stage::final, mode);
    fill_rag(rec, object);
    rec.y_w.reasoning = get_string(object, "reasoning_w");
    rec.y_w.answer = get_string(object, "answer_w");
    return rec;
}

template <>
DpoTriple record_from_json<DpoTriple>(const Json& object, ReadMode mode) {
    DpoTriple rec;
    rec.extra = collect_extra(object, Stage::dpo, mode);
    rec.id = get_string(object, "id");
    rec.prompt = get_string(object, "prompt");
    rec.chosen = get_string(object, "chosen");
    rec.rejected = get_string(object, "rejected");
    return rec;
}

}  // namespace prefforge::data
