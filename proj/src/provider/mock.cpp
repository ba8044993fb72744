#include "prefforge/provider/mock.hpp"

#include "prefforge/data/think.hpp"

#include <json.hpp>

namespace prefforge::provider {

namespace {

std::string input_or(const std::map<std::string, std::string>& inputs, const char* key, std::string_view fallback) {
    auto it = inputs.find(key);
    return it != inputs.end() ? it->second : std::string(fallback);
}

// "Q7: what is X" -> "what is X"
std::string_view strip_label(std::string_view prompt) {
    const auto colon = prompt.find(": ");
    if (colon == std::string_view::npos || colon == 0) return prompt;
    const auto label = prompt.substr(0, colon);
    if (label.find_first_of(" \t\n") != std::string_view::npos) return prompt;
    return prompt.substr(colon + 2);
}

}  // namespace

MockOutput mock_provider(StageTag tag, const std::map<std::string, std::string>& inputs, std::string_view fallback) {
    switch (tag) {
        case StageTag::enhance:
            return {"ENH::" + input_or(inputs, "q_raw", fallback), std::nullopt};
        case StageTag::reject: {
            const auto question = input_or(inputs, "q_enhanced", fallback);
            return {"REJANS::" + question, "REJCOT::" + question};
        }
        case StageTag::cot: {
            nlohmann::json steps = nlohmann::json::array();
            steps.push_back("COT1::" + input_or(inputs, "q_enhanced", fallback));
            steps.push_back("COT2::" + utf8_prefix(input_or(inputs, "rag_content", ""), kMockPrefixChars));
            return {steps.dump(), std::nullopt};
        }
        case StageTag::answer:
            return {"ANS::" + utf8_prefix(input_or(inputs, "reasoning_w", fallback), kMockPrefixChars), std::nullopt};
        case StageTag::judge:
            return {R"({"information_richness":7,"relevance":7,"accuracy":7})", std::nullopt};
    }
    return {};
}

GenResponse MockGenerator::complete(const GenRequest& request) {
    const std::string_view fallback = request.inputs.empty() ? strip_label(request.user_prompt) : std::string_view{};
    MockOutput output = mock_provider(request.stage_tag, request.inputs, fallback);

    GenResponse response;
    response.provider_id = id();
    if (output.reasoning && !request.want_raw_reasoning) {
        response.text = data::wrap_think(*output.reasoning, output.text);
    } else {
        response.text = std::move(output.text);
        response.raw_reasoning = std::move(output.reasoning);
    }
    return response;
}

MockRetriever::MockRetriever(CleanupOptions options) : options_(std::move(options)) {}

CleanupOptions MockRetriever::mock_cleanup_options() {
    CleanupOptions options;
    options.min_chars = 0;
    return options;
}

RetrievalResult MockRetriever::retrieve(const std::string& query) {
    const std::vector<RetrievedPassage> raw{{"RAG::" + query + "::1", std::nullopt},
                                            {"RAG::" + query + "::2", std::nullopt}};
    return assemble_retrieval(query, raw, options_);
}

}  // namespace prefforge::provider
