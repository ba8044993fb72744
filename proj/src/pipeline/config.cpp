#include "prefforge/pipeline/config.hpp"

#include "prefforge/provider/http_client.hpp"
#include "prefforge/provider/mock.hpp"
#include "prefforge/provider/retrieval.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace prefforge::pipeline {

namespace fs = std::filesystem;
using provider::StageTag;

namespace {

std::string trim(std::string_view text) {
    const auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = text.find_last_not_of(" \t\r");
    return std::string(text.substr(begin, end - begin + 1));
}

bool valid_key(std::string_view key) {
    if (key.empty()) return false;
    for (char c : key) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                        c == '-' || c == '.';
        if (!ok) return false;
    }
    return !key.starts_with('.') && !key.ends_with('.');
}

// Drops a trailing comment that is not inside a string.
std::string strip_comment(std::string_view line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (quote == '"' && c == '\\') {
                ++i;
            } else if (c == quote) {
                quote = 0;
            }
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return std::string(line.substr(0, i));
        }
    }
    return std::string(line);
}

ConfigFile::Value parse_value(const std::string& raw, std::size_t line) {
    auto fail = [&](const std::string& what) {
        return ConfigError("config line " + std::to_string(line) + ": " + what);
    };
    if (raw.empty()) throw fail("missing value");
    if (raw.front() == '"') {
        std::string out;
        std::size_t i = 1;
        for (; i < raw.size() && raw[i] != '"'; ++i) {
            if (raw[i] != '\\') {
                out.push_back(raw[i]);
                continue;
            }
            if (++i >= raw.size()) throw fail("dangling escape");
            switch (raw[i]) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default: throw fail(std::string("unsupported escape \\") + raw[i]);
            }
        }
        if (i >= raw.size()) throw fail("unterminated string");
        if (i + 1 != raw.size()) throw fail("trailing characters after string");
        return out;
    }
    if (raw.front() == '\'') {
        const auto close = raw.find('\'', 1);
        if (close == std::string::npos) throw fail("unterminated string");
        if (close + 1 != raw.size()) throw fail("trailing characters after string");
        return raw.substr(1, close - 1);
    }
    if (raw == "true") return true;
    if (raw == "false") return false;

    std::string number;
    for (char c : raw) {
        if (c != '_') number.push_back(c);
    }
    const bool is_float = number.find_first_of(".eE") != std::string::npos;
    try {
        std::size_t consumed = 0;
        if (is_float) {
            const double value = std::stod(number, &consumed);
            if (consumed == number.size()) return value;
        } else {
            const long long value = std::stoll(number, &consumed);
            if (consumed == number.size()) return static_cast<std::int64_t>(value);
        }
    } catch (const std::exception&) {
    }
    throw fail("cannot parse value '" + raw + "'");
}

bool key_is_known(const std::string& key) {
    static const std::set<std::string> pipeline{"concurrency", "empty_retrieval", "prompt_source", "think_directive",
                                                "default_provider"};
    static const std::set<std::string> retry{"max_attempts", "base_delay_ms", "multiplier", "jitter"};
    static const std::set<std::string> providers{"kind", "base_url", "model", "api_key_env", "timeout_ms"};
    static const std::set<std::string> stages{"provider", "temperature", "max_tokens", "system_template",
                                              "user_template"};
    static const std::set<std::string> templates{"cot_repair"};
    static const std::set<std::string> retrieval{"kind",      "endpoint",  "api_key_env", "top_k",    "timeout_ms",
                                                 "min_chars", "max_chars", "min_score",   "separator"};

    const auto first = key.find('.');
    const auto last = key.rfind('.');
    if (first == std::string::npos) return false;
    const auto section = key.substr(0, first);
    const auto leaf = key.substr(last + 1);
    if (first == last) {
        if (section == "pipeline") return pipeline.contains(leaf);
        if (section == "retry") return retry.contains(leaf);
        if (section == "templates") return templates.contains(leaf);
        if (section == "retrieval") return retrieval.contains(leaf);
        return false;
    }
    const auto middle = key.substr(first + 1, last - first - 1);
    if (middle.find('.') != std::string::npos) return false;
    if (section == "providers") return providers.contains(leaf);
    if (section == "stages") return provider::tag_from_name(middle).has_value() && stages.contains(leaf);
    return false;
}

std::optional<std::string> default_getenv(const std::string& name) {
    if (const char* value = std::getenv(name.c_str())) return std::string(value);
    return std::nullopt;
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text, fs::path base_dir) {
    ConfigFile file;
    file.base_dir_ = std::move(base_dir);
    std::string section;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string content = trim(strip_comment(line));
        if (content.empty()) continue;
        if (content.front() == '[') {
            if (content.starts_with("[[")) {
                throw ConfigError("config line " + std::to_string(number) + ": arrays of tables are not supported");
            }
            if (content.back() != ']') throw ConfigError("config line " + std::to_string(number) + ": bad section");
            section = trim(std::string_view(content).substr(1, content.size() - 2));
            if (!valid_key(section)) {
                throw ConfigError("config line " + std::to_string(number) + ": bad section name");
            }
            continue;
        }
        const auto eq = content.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
        const std::string key = trim(std::string_view(content).substr(0, eq));
        if (!valid_key(key)) throw ConfigError("config line " + std::to_string(number) + ": bad key '" + key + "'");
        const std::string full = section.empty() ? key : section + "." + key;
        if (file.values_.contains(full)) {
            throw ConfigError("config line " + std::to_string(number) + ": duplicate key '" + full + "'");
        }
        file.values_[full] = parse_value(trim(std::string_view(content).substr(eq + 1)), number);
    }
    return file;
}

ConfigFile ConfigFile::load(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.parent_path());
}

std::optional<std::string> ConfigFile::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
    throw ConfigError("config key '" + key + "' must be a string");
}

std::optional<std::int64_t> ConfigFile::get_int(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (const auto* i = std::get_if<std::int64_t>(&it->second)) return *i;
    throw ConfigError("config key '" + key + "' must be an integer");
}

std::optional<double> ConfigFile::get_double(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (const auto* d = std::get_if<double>(&it->second)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*i);
    throw ConfigError("config key '" + key + "' must be a number");
}

std::optional<bool> ConfigFile::get_bool(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (const auto* b = std::get_if<bool>(&it->second)) return *b;
    throw ConfigError("config key '" + key + "' must be a boolean");
}

std::vector<std::string> ConfigFile::keys() const {
    std::vector<std::string> out;
    out.reserve(values_.size());
    for (const auto& [key, value] : values_) out.push_back(key);
    return out;
}

std::vector<std::string> ConfigFile::tables_under(const std::string& prefix) const {
    std::vector<std::string> names;
    const std::string head = prefix + ".";
    for (const auto& [key, value] : values_) {
        if (!key.starts_with(head)) continue;
        const auto rest = key.substr(head.size());
        const auto dot = rest.find('.');
        if (dot == std::string::npos) continue;
        const auto name = rest.substr(0, dot);
        if (names.empty() || names.back() != name) names.push_back(name);
    }
    return names;
}

void validate_config(const PipelineConfig& config) {
    const std::pair<const StageBinding*, StageTag> bindings[] = {
        {&config.enhance, StageTag::enhance},
        {&config.reject, StageTag::reject},
        {&config.cot, StageTag::cot},
        {&config.answer, StageTag::answer},
    };
    for (const auto& [binding, tag] : bindings) {
        if (!binding->generator) {
            throw ConfigError("stage " + std::string(provider::tag_name(tag)) + " has no generator bound");
        }
        try {
            check_template(binding->prompt, tag);
        } catch (const TemplateError& err) {
            throw ConfigError(err.what());
        }
        if (binding->settings.max_tokens < 1) {
            throw ConfigError("stage " + std::string(provider::tag_name(tag)) + ": max_tokens must be >= 1");
        }
        if (binding->settings.temperature < 0.0) {
            throw ConfigError("stage " + std::string(provider::tag_name(tag)) + ": temperature must be >= 0");
        }
    }
    if (config.judge.generator) {
        try {
            check_template(config.judge.prompt, StageTag::judge);
        } catch (const TemplateError& err) {
            throw ConfigError(err.what());
        }
    }
    if (!config.retriever) throw ConfigError("no retriever bound");
    if (config.concurrency < 1) throw ConfigError("concurrency cap must be >= 1");
}

PipelineConfig mock_pipeline_config() {
    auto mock = std::make_shared<provider::MockGenerator>();
    PipelineConfig config;
    config.enhance = {mock, builtin_template(StageTag::enhance), {}};
    config.reject = {mock, builtin_template(StageTag::reject), {}};
    config.cot = {mock, builtin_template(StageTag::cot), {}};
    config.answer = {mock, builtin_template(StageTag::answer), {}};
    config.judge = {mock, builtin_template(StageTag::judge), {0.0, 512}};
    config.retriever = std::make_shared<provider::MockRetriever>();
    config.cot_repair_instruction = builtin_cot_repair_instruction();
    return config;
}

provider::RetryPolicy retry_policy_from(const ConfigFile& file) {
    provider::RetryPolicy policy;
    if (auto v = file.get_int("retry.max_attempts")) policy.max_attempts = static_cast<int>(*v);
    if (auto v = file.get_int("retry.base_delay_ms")) policy.base_delay = std::chrono::milliseconds(*v);
    if (auto v = file.get_double("retry.multiplier")) policy.multiplier = *v;
    if (auto v = file.get_double("retry.jitter")) policy.jitter = *v;
    if (policy.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
    if (policy.jitter < 0.0 || policy.jitter >= 1.0) throw ConfigError("retry.jitter must be in [0, 1)");
    if (policy.multiplier < 1.0) throw ConfigError("retry.multiplier must be >= 1");
    return policy;
}

PipelineConfig build_pipeline_config(const ConfigFile& file, const BuildOptions& options) {
    auto getenv = options.getenv ? options.getenv : default_getenv;
    PipelineConfig config = mock_pipeline_config();

    if (auto v = file.get_int("pipeline.concurrency")) {
        if (*v < 1) throw ConfigError("pipeline.concurrency must be >= 1");
        config.concurrency = static_cast<std::size_t>(*v);
    }
    if (auto v = file.get_string("pipeline.empty_retrieval")) {
        if (*v == "skip_record") {
            config.empty_retrieval = EmptyRetrievalPolicy::skip_record;
        } else if (*v == "proceed_without_rag") {
            config.empty_retrieval = EmptyRetrievalPolicy::proceed_without_rag;
        } else {
            throw ConfigError("pipeline.empty_retrieval must be skip_record or proceed_without_rag");
        }
    }
    if (auto v = file.get_string("pipeline.prompt_source")) {
        if (*v == "enhanced") {
            config.prompt_source = PromptSource::enhanced;
        } else if (*v == "raw") {
            config.prompt_source = PromptSource::raw;
        } else {
            throw ConfigError("pipeline.prompt_source must be enhanced or raw");
        }
    }
    if (auto v = file.get_string("pipeline.think_directive")) config.think_directive = *v;

    const auto policy = retry_policy_from(file);
    auto limiter = std::make_shared<provider::ConcurrencyLimiter>(config.concurrency);
    std::uint64_t seed = options.seed;

    std::map<std::string, std::shared_ptr<provider::Generator>> generators;
    auto generator_named = [&](const std::string& name) -> std::shared_ptr<provider::Generator> {
        if (auto it = generators.find(name); it != generators.end()) return it->second;
        const std::string prefix = "providers." + name + ".";
        std::string kind = file.get_string(prefix + "kind").value_or(name == "mock" ? "mock" : "");
        std::shared_ptr<provider::Generator> base;
        if (kind == "mock") {
            base = std::make_shared<provider::MockGenerator>();
        } else if (kind == "openai") {
            provider::ChatClientConfig client;
            client.provider_id = name;
            client.base_url = file.get_string(prefix + "base_url").value_or("");
            if (client.base_url.empty()) throw ConfigError(prefix + "base_url is required");
            client.model = file.get_string(prefix + "model").value_or("");
            if (client.model.empty()) throw ConfigError(prefix + "model is required");
            const auto env = file.get_string(prefix + "api_key_env").value_or("PROVIDER_API_KEY");
            client.api_key = getenv(env).value_or("");
            if (auto t = file.get_int(prefix + "timeout_ms")) client.timeout = std::chrono::milliseconds(*t);
            try {
                base = std::make_shared<provider::HttpChatClient>(client, limiter);
            } catch (const std::invalid_argument& err) {
                throw ConfigError(prefix + "base_url: " + err.what());
            }
        } else if (kind.empty()) {
            throw ConfigError("unknown provider '" + name + "'");
        } else {
            throw ConfigError(prefix + "kind must be mock or openai, got '" + kind + "'");
        }
        auto wrapped = std::make_shared<provider::RetryingGenerator>(base, policy, options.sleeper, seed++);
        generators[name] = wrapped;
        return wrapped;
    };

    const std::string default_provider = file.get_string("pipeline.default_provider").value_or("mock");
    auto bind = [&](StageBinding& binding, StageTag tag) {
        const std::string prefix = "stages." + std::string(provider::tag_name(tag)) + ".";
        const std::string name =
            options.provider_override.value_or(file.get_string(prefix + "provider").value_or(default_provider));
        binding.generator = generator_named(name);
        if (auto v = file.get_double(prefix + "temperature")) binding.settings.temperature = *v;
        if (auto v = file.get_int(prefix + "max_tokens")) binding.settings.max_tokens = static_cast<int>(*v);
        if (auto path = file.get_string(prefix + "system_template")) {
            binding.prompt.system = load_template_text(file.base_dir() / *path);
        }
        if (auto path = file.get_string(prefix + "user_template")) {
            binding.prompt.user = load_template_text(file.base_dir() / *path);
        }
    };
    bind(config.enhance, StageTag::enhance);
    bind(config.reject, StageTag::reject);
    bind(config.cot, StageTag::cot);
    bind(config.answer, StageTag::answer);
    bind(config.judge, StageTag::judge);

    if (auto path = file.get_string("templates.cot_repair")) {
        config.cot_repair_instruction = load_template_text(file.base_dir() / *path);
    }

    const bool offline = options.provider_override && *options.provider_override == "mock";
    const std::string retrieval_kind = offline ? "mock" : file.get_string("retrieval.kind").value_or("mock");
    provider::CleanupOptions cleanup =
        retrieval_kind == "mock" ? provider::MockRetriever::mock_cleanup_options() : provider::CleanupOptions{};
    if (auto v = file.get_int("retrieval.min_chars")) cleanup.min_chars = static_cast<std::size_t>(*v);
    if (auto v = file.get_int("retrieval.max_chars")) cleanup.max_chars = static_cast<std::size_t>(*v);
    if (auto v = file.get_double("retrieval.min_score")) cleanup.min_score = *v;
    if (auto v = file.get_string("retrieval.separator")) cleanup.separator = *v;

    std::shared_ptr<provider::Retriever> retriever;
    if (retrieval_kind == "mock") {
        retriever = std::make_shared<provider::MockRetriever>(cleanup);
    } else if (retrieval_kind == "http") {
        provider::RetrievalClientConfig client;
        client.endpoint = file.get_string("retrieval.endpoint").value_or("");
        if (client.endpoint.empty()) throw ConfigError("retrieval.endpoint is required");
        client.api_key = getenv(file.get_string("retrieval.api_key_env").value_or("RETRIEVAL_API_KEY")).value_or("");
        if (auto v = file.get_int("retrieval.top_k")) client.top_k = static_cast<int>(*v);
        if (auto t = file.get_int("retrieval.timeout_ms")) client.timeout = std::chrono::milliseconds(*t);
        try {
            retriever = std::make_shared<provider::HttpRetriever>(client, cleanup, limiter);
        } catch (const std::invalid_argument& err) {
            throw ConfigError(std::string("retrieval.endpoint: ") + err.what());
        }
    } else {
        throw ConfigError("retrieval.kind must be mock or http");
    }
    config.retriever = std::make_shared<provider::RetryingRetriever>(retriever, policy, options.sleeper, seed++);

    for (const auto& name : file.tables_under("providers")) (void)generator_named(name);

    // Reject typos early: every key must be one the loader understands.
    for (const auto& key : file.keys()) {
        if (!key_is_known(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    validate_config(config);
    return config;
}

}  // namespace prefforge::pipeline
