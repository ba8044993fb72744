#pragma once

#include "prefforge/pipeline/templates.hpp"
#include "prefforge/provider/cleanup.hpp"
#include "prefforge/provider/limiter.hpp"
#include "prefforge/provider/retry.hpp"
#include "prefforge/provider/types.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace prefforge::pipeline {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flat key/value view of a TOML-subset file: [section] headers (dotted names
// allowed), `key = value` with string, integer, float or boolean values and
// `#` comments. Keys are stored as "section.key".
class ConfigFile {
public:
    using Value = std::variant<std::string, std::int64_t, double, bool>;

    static ConfigFile parse(std::string_view text, std::filesystem::path base_dir = {});
    static ConfigFile load(const std::filesystem::path& path);

    bool contains(const std::string& key) const { return values_.contains(key); }
    std::vector<std::string> keys() const;
    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<std::int64_t> get_int(const std::string& key) const;
    std::optional<double> get_double(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;

    // Names of sub-tables under `prefix`, e.g. providers.* -> {"main", ...}.
    std::vector<std::string> tables_under(const std::string& prefix) const;

    // Directory relative paths in the file resolve against.
    const std::filesystem::path& base_dir() const { return base_dir_; }
    void set(const std::string& key, Value value) { values_[key] = std::move(value); }

private:
    std::map<std::string, Value> values_;
    std::filesystem::path base_dir_;
};

enum class EmptyRetrievalPolicy { skip_record, proceed_without_rag };
enum class PromptSource { enhanced, raw };

struct GenerationSettings {
    double temperature = 0.7;
    int max_tokens = 2048;
};

struct StageBinding {
    std::shared_ptr<provider::Generator> generator;
    PromptTemplate prompt;
    GenerationSettings settings;
};

struct PipelineConfig {
    StageBinding enhance;
    StageBinding reject;
    StageBinding cot;
    StageBinding answer;
    // Used by evaluation, not by the pipeline stages.
    StageBinding judge;
    std::shared_ptr<provider::Retriever> retriever;

    std::string cot_repair_instruction;
    std::size_t concurrency = 4;
    EmptyRetrievalPolicy empty_retrieval = EmptyRetrievalPolicy::skip_record;
    PromptSource prompt_source = PromptSource::enhanced;
    std::string think_directive = " /think";
};

// Throws ConfigError unless every stage is bound, templates are consistent
// with their stage, and the concurrency cap is at least 1.
void validate_config(const PipelineConfig& config);

// Mock generators and retriever with the built-in templates.
PipelineConfig mock_pipeline_config();

struct BuildOptions {
    // Replaces the provider of every stage, e.g. "mock".
    std::optional<std::string> provider_override;
    std::uint64_t seed = 0x5eed;
    provider::Sleeper sleeper = provider::real_sleeper();
    // Environment lookup; defaults to std::getenv.
    std::function<std::optional<std::string>(const std::string&)> getenv;
};

/// Builds a runnable configuration. Generators and the retriever are wrapped
/// with retries and share one concurrency limiter sized by
/// `pipeline.concurrency`. Credentials come from the environment variables
/// named by `api_key_env` (defaults PROVIDER_API_KEY and RETRIEVAL_API_KEY).
PipelineConfig build_pipeline_config(const ConfigFile& file, const BuildOptions& options = {});

provider::RetryPolicy retry_policy_from(const ConfigFile& file);

}  // namespace prefforge::pipeline
