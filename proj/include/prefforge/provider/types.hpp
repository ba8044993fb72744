#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prefforge::provider {

enum class StageTag { enhance, reject, cot, answer, judge };

std::string_view tag_name(StageTag tag);
std::optional<StageTag> tag_from_name(std::string_view name);

struct GenRequest {
    std::string system_prompt;
    std::string user_prompt;
    StageTag stage_tag = StageTag::enhance;
    double temperature = 0.7;
    int max_tokens = 2048;
    bool want_raw_reasoning = false;
    // Not sent over the wire. Used for logging, fault attribution and by the
    // offline mock, which reads its inputs from `inputs` instead of parsing
    // the rendered prompt.
    std::string record_id;
    std::map<std::string, std::string> inputs;
};

struct GenResponse {
    std::string text;
    std::optional<std::string> raw_reasoning;
    std::string provider_id;
    std::chrono::milliseconds latency{0};
};

enum class ErrorKind {
    auth,          // bad or missing credential; never retried
    rate_limit,    // HTTP 429
    timeout,       // request or connect timeout
    transient,     // 5xx, connection reset, unparseable body
    bad_request,   // other 4xx; never retried
    exhausted,     // retry budget used up
};

std::string_view error_kind_name(ErrorKind kind);

class ProviderError : public std::runtime_error {
public:
    ProviderError(ErrorKind kind, const std::string& message, int attempts = 1);

    ErrorKind kind() const { return kind_; }
    int attempts() const { return attempts_; }
    bool retryable() const;

private:
    ErrorKind kind_;
    int attempts_;
};

// Text generator behind a chat-completion style contract. Implementations
// must be safe for concurrent use.
class Generator {
public:
    virtual ~Generator() = default;
    virtual GenResponse complete(const GenRequest& request) = 0;
    virtual std::string id() const = 0;
};

struct RetrievedPassage {
    std::string text;
    std::optional<double> score;
};

struct RetrievalResult {
    std::string query;
    std::vector<std::string> passages;
    std::string merged;
    // No passage survived cleanup; the caller applies its empty-retrieval policy.
    bool empty = false;
};

class Retriever {
public:
    virtual ~Retriever() = default;
    virtual RetrievalResult retrieve(const std::string& query) = 0;
    virtual std::string id() const = 0;
};

}  // namespace prefforge::provider
