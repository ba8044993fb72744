#pragma once

#include "prefforge/provider/cleanup.hpp"
#include "prefforge/provider/types.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace prefforge::provider {

// Output of the offline mock for one request.
struct MockOutput {
    std::string text;
    std::optional<std::string> reasoning;
};

// Number of code points the mock copies from RAG content and reasoning.
inline constexpr std::size_t kMockPrefixChars = 16;

// Pure, deterministic stand-in for a generator:
//   enhance -> "ENH::" + q_raw
//   reject  -> text "REJANS::" + q_enhanced, reasoning "REJCOT::" + q_enhanced
//   cot     -> JSON array ["COT1::" + q_enhanced, "COT2::" + prefix(rag_content)]
//   answer  -> "ANS::" + prefix(reasoning_w)
//   judge   -> {"information_richness":7,"relevance":7,"accuracy":7}
// `inputs` holds the template variables; `fallback` is used in place of a
// missing primary input.
MockOutput mock_provider(StageTag tag, const std::map<std::string, std::string>& inputs,
                         std::string_view fallback = {});

// Generator over mock_provider. When a request carries no inputs, the user
// prompt stands in for the stage's primary input with any leading
// "Label: " tag removed. A reject request without want_raw_reasoning gets its
// reasoning inline as a think block.
class MockGenerator final : public Generator {
public:
    GenResponse complete(const GenRequest& request) override;
    std::string id() const override { return "mock"; }
};

// Returns passages "RAG::<q>::1" and "RAG::<q>::2". Its default cleanup
// keeps short passages so the mock contract survives the length filter.
class MockRetriever final : public Retriever {
public:
    explicit MockRetriever(CleanupOptions options = mock_cleanup_options());

    RetrievalResult retrieve(const std::string& query) override;
    std::string id() const override { return "mock"; }

    static CleanupOptions mock_cleanup_options();

private:
    CleanupOptions options_;
};

}  // namespace prefforge::provider
