#pragma once

#include "prefforge/provider/cleanup.hpp"
#include "prefforge/provider/http_client.hpp"
#include "prefforge/provider/limiter.hpp"
#include "prefforge/provider/types.hpp"

#include <chrono>
#include <memory>
#include <string>
#include <vector>

namespace prefforge::provider {

struct RetrievalClientConfig {
    std::string provider_id = "http-retrieval";
    // Full URL receiving POST {"query": ..., "top_k": ...}.
    std::string endpoint;
    std::string api_key;
    int top_k = 8;
    std::chrono::milliseconds timeout{60000};
};

// Accepts {"passages": [...]} or {"results": [...]} where each entry is a
// string or an object with "text" (or "content") and optional "score".
std::vector<RetrievedPassage> parse_retrieval_response(const std::string& body);

class HttpRetriever final : public Retriever {
public:
    HttpRetriever(RetrievalClientConfig config, CleanupOptions cleanup, std::shared_ptr<ConcurrencyLimiter> limiter);

    RetrievalResult retrieve(const std::string& query) override;
    std::string id() const override { return config_.provider_id; }

private:
    RetrievalClientConfig config_;
    UrlParts url_;
    CleanupOptions cleanup_;
    std::shared_ptr<ConcurrencyLimiter> limiter_;
};

}  // namespace prefforge::provider
