#include "prefforge/provider/http_client.hpp"

#include <httplib.h>
#include <json.hpp>

#include <stdexcept>

namespace prefforge::provider {

using nlohmann::json;

UrlParts split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("URL without scheme: " + url);
    const auto path_begin = url.find('/', scheme_end + 3);
    if (path_begin == std::string::npos) return {url, ""};
    std::string path = url.substr(path_begin);
    while (path.ends_with('/')) path.pop_back();
    return {url.substr(0, path_begin), path};
}

ErrorKind classify_http_status(int status) {
    if (status == 401 || status == 403) return ErrorKind::auth;
    if (status == 429) return ErrorKind::rate_limit;
    if (status == 408 || status == 504) return ErrorKind::timeout;
    if (status >= 500) return ErrorKind::transient;
    return ErrorKind::bad_request;
}

std::string chat_request_body(const ChatClientConfig& config, const GenRequest& request) {
    json body;
    body["model"] = config.model;
    json messages = json::array();
    if (!request.system_prompt.empty()) {
        messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    }
    messages.push_back({{"role", "user"}, {"content", request.user_prompt}});
    body["messages"] = std::move(messages);
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    body["stream"] = false;
    return body.dump();
}

GenResponse parse_chat_response(const std::string& body, const std::string& provider_id) {
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded()) throw ProviderError(ErrorKind::transient, "response is not JSON");
    const auto choices = parsed.find("choices");
    if (choices == parsed.end() || !choices->is_array() || choices->empty()) {
        throw ProviderError(ErrorKind::transient, "response has no choices");
    }
    const json& message = (*choices)[0].value("message", json::object());
    GenResponse response;
    response.provider_id = provider_id;
    if (auto content = message.find("content"); content != message.end() && content->is_string()) {
        response.text = content->get<std::string>();
    }
    for (const char* key : {"reasoning_content", "reasoning"}) {
        if (auto reasoning = message.find(key); reasoning != message.end() && reasoning->is_string()) {
            response.raw_reasoning = reasoning->get<std::string>();
            break;
        }
    }
    if (response.text.empty()) throw ProviderError(ErrorKind::transient, "empty completion text");
    return response;
}

HttpChatClient::HttpChatClient(ChatClientConfig config, std::shared_ptr<ConcurrencyLimiter> limiter)
    : config_(std::move(config)), url_(split_url(config_.base_url)), limiter_(std::move(limiter)) {
    if (!limiter_) limiter_ = std::make_shared<ConcurrencyLimiter>(1);
}

GenResponse HttpChatClient::complete(const GenRequest& request) {
    const auto started = std::chrono::steady_clock::now();
    auto permit = limiter_->acquire();

    httplib::Client client(url_.origin);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto result = client.Post(url_.path + "/chat/completions", headers, chat_request_body(config_, request),
                              "application/json");
    if (!result) {
        const auto error = result.error();
        const auto kind = error == httplib::Error::ConnectionTimeout || error == httplib::Error::Read
                              ? ErrorKind::timeout
                              : ErrorKind::transient;
        throw ProviderError(kind, "request failed: " + httplib::to_string(error));
    }
    if (result->status < 200 || result->status >= 300) {
        throw ProviderError(classify_http_status(result->status),
                            "HTTP " + std::to_string(result->status) + " from " + config_.provider_id);
    }
    GenResponse response = parse_chat_response(result->body, config_.provider_id);
    response.latency =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    return response;
}

}  // namespace prefforge::provider
