#pragma once

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prefforge::data {

using Json = nlohmann::ordered_json;

// Pipeline stage a record belongs to. `cot` is the intermediate output of the
// preferred-reasoning step when it is run on its own.
enum class Stage { raw, enhanced, rejected, rag, cot, final, dpo };

std::string_view stage_name(Stage stage);
std::optional<Stage> stage_from_name(std::string_view name);

// Thrown for schema problems: missing or mistyped fields, unknown fields in
// strict mode.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fields a reader did not recognise. Kept verbatim in lenient mode and
// written back after the known fields. Equality ignores key order.
class ExtraFields {
public:
    ExtraFields() = default;
    explicit ExtraFields(Json object);

    const Json& json() const { return fields_; }
    bool empty() const { return fields_.empty(); }
    void set(const std::string& key, Json value);

    bool operator==(const ExtraFields& other) const;

private:
    Json fields_ = Json::object();
};

// A (reasoning, answer) pair. Housing both the preferred and the rejected
// response.
struct CompositeSample {
    std::string reasoning;
    std::string answer;

    bool operator==(const CompositeSample&) const = default;
};

struct RawQuestion {
    std::string id;
    std::string q_raw;
    ExtraFields extra;

    bool operator==(const RawQuestion&) const = default;
};

struct EnhancedRecord : RawQuestion {
    std::string q_enhanced;

    bool operator==(const EnhancedRecord&) const = default;
};

struct RejectedRecord : EnhancedRecord {
    CompositeSample y_l;
    // Set when the generator produced no reasoning trace for y_l.
    bool reasoning_l_missing = false;

    bool operator==(const RejectedRecord&) const = default;
};

struct RagRecord : RejectedRecord {
    std::string rag_content;
    // Set when retrieval came back empty and the record proceeded anyway.
    bool rag_empty = false;

    bool operator==(const RagRecord&) const = default;
};

struct CotRecord : RagRecord {
    std::string reasoning_w;

    bool operator==(const CotRecord&) const = default;
};

struct FinalRecord : RagRecord {
    CompositeSample y_w;

    bool operator==(const FinalRecord&) const = default;
};

struct DpoTriple {
    std::string id;
    std::string prompt;
    std::string chosen;
    std::string rejected;
    ExtraFields extra;

    bool operator==(const DpoTriple&) const = default;
};

template <class T> struct StageOf;
template <> struct StageOf<RawQuestion> { static constexpr Stage value = Stage::raw; };
template <> struct StageOf<EnhancedRecord> { static constexpr Stage value = Stage::enhanced; };
template <> struct StageOf<RejectedRecord> { static constexpr Stage value = Stage::rejected; };
template <> struct StageOf<RagRecord> { static constexpr Stage value = Stage::rag; };
template <> struct StageOf<CotRecord> { static constexpr Stage value = Stage::cot; };
template <> struct StageOf<FinalRecord> { static constexpr Stage value = Stage::final; };
template <> struct StageOf<DpoTriple> { static constexpr Stage value = Stage::dpo; };

enum class ReadMode { strict, lenient };

// JSON conversion with the fixed flat field names. Field order on output is
// fixed so that serialised files are byte-stable.
Json record_to_json(const RawQuestion& rec);
Json record_to_json(const EnhancedRecord& rec);
Json record_to_json(const RejectedRecord& rec);
Json record_to_json(const RagRecord& rec);
Json record_to_json(const CotRecord& rec);
Json record_to_json(const FinalRecord& rec);
Json record_to_json(const DpoTriple& rec);

template <class T>
T record_from_json(const Json& object, ReadMode mode = ReadMode::strict);

// Field names that belong to a stage's schema, in output order.
const std::vector<std::string>& known_fields(Stage stage);

// Best guess of the stage of a JSON object from the fields it carries.
Stage detect_stage(const Json& object);

}  // namespace prefforge::data
