#pragma once

#include "prefforge/provider/limiter.hpp"
#include "prefforge/provider/types.hpp"

#include <chrono>
#include <memory>
#include <string>

namespace prefforge::provider {

// Splits "https://host:port/v1" into origin "https://host:port" and path
// prefix "/v1". Throws std::invalid_argument on a URL without scheme.
struct UrlParts {
    std::string origin;
    std::string path;
};
UrlParts split_url(const std::string& url);

struct ChatClientConfig {
    std::string provider_id = "openai-compatible";
    // Base URL; requests go to <base_url>/chat/completions.
    std::string base_url;
    std::string model;
    std::string api_key;
    std::chrono::milliseconds timeout{120000};
};

// Client for OpenAI-compatible chat-completion endpoints. A reasoning
// channel is read from message.reasoning_content or message.reasoning when
// the server provides one.
class HttpChatClient final : public Generator {
public:
    HttpChatClient(ChatClientConfig config, std::shared_ptr<ConcurrencyLimiter> limiter);

    GenResponse complete(const GenRequest& request) override;
    std::string id() const override { return config_.provider_id; }

private:
    ChatClientConfig config_;
    UrlParts url_;
    std::shared_ptr<ConcurrencyLimiter> limiter_;
};

// Maps an HTTP status to an error class; 2xx is not an error.
ErrorKind classify_http_status(int status);

// Builds the JSON request body sent by HttpChatClient.
std::string chat_request_body(const ChatClientConfig& config, const GenRequest& request);

// Parses a chat-completion response body. Throws ProviderError(transient) on
// a body without usable text.
GenResponse parse_chat_response(const std::string& body, const std::string& provider_id);

}  // namespace prefforge::provider
