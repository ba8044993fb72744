#include "prefforge/provider/retrieval.hpp"

#include <httplib.h>
#include <json.hpp>

namespace prefforge::provider {

using nlohmann::json;

std::vector<RetrievedPassage> parse_retrieval_response(const std::string& body) {
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        throw ProviderError(ErrorKind::transient, "retrieval response is not a JSON object");
    }
    const json* list = nullptr;
    for (const char* key : {"passages", "results"}) {
        if (auto it = parsed.find(key); it != parsed.end() && it->is_array()) {
            list = &*it;
            break;
        }
    }
    if (!list) throw ProviderError(ErrorKind::transient, "retrieval response has no passages array");

    std::vector<RetrievedPassage> passages;
    for (const auto& entry : *list) {
        if (entry.is_string()) {
            passages.push_back({entry.get<std::string>(), std::nullopt});
            continue;
        }
        if (!entry.is_object()) continue;
        RetrievedPassage passage;
        for (const char* key : {"text", "content"}) {
            if (auto it = entry.find(key); it != entry.end() && it->is_string()) {
                passage.text = it->get<std::string>();
                break;
            }
        }
        if (auto score = entry.find("score"); score != entry.end() && score->is_number()) {
            passage.score = score->get<double>();
        }
        passages.push_back(std::move(passage));
    }
    return passages;
}

HttpRetriever::HttpRetriever(RetrievalClientConfig config, CleanupOptions cleanup,
                             std::shared_ptr<ConcurrencyLimiter> limiter)
    : config_(std::move(config)),
      url_(split_url(config_.endpoint)),
      cleanup_(std::move(cleanup)),
      limiter_(std::move(limiter)) {
    if (!limiter_) limiter_ = std::make_shared<ConcurrencyLimiter>(1);
}

RetrievalResult HttpRetriever::retrieve(const std::string& query) {
    auto permit = limiter_->acquire();

    httplib::Client client(url_.origin);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
    client.set_connection_timeout(seconds, 0);
    client.set_read_timeout(seconds, 0);

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    json body{{"query", query}, {"top_k", config_.top_k}};
    auto result = client.Post(url_.path.empty() ? "/" : url_.path, headers, body.dump(), "application/json");
    if (!result) {
        throw ProviderError(ErrorKind::transient, "retrieval backend unreachable: " + httplib::to_string(result.error()));
    }
    if (result->status < 200 || result->status >= 300) {
        throw ProviderError(classify_http_status(result->status), "retrieval HTTP " + std::to_string(result->status));
    }
    const auto passages = parse_retrieval_response(result->body);
    return assemble_retrieval(query, passages, cleanup_);
}

}  // namespace prefforge::provider
