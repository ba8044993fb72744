#include "prefforge/provider/types.hpp"

#include <array>

namespace prefforge::provider {

namespace {

constexpr std::array<std::pair<StageTag, std::string_view>, 5> kTagNames{{
    {StageTag::enhance, "enhance"},
    {StageTag::reject, "reject"},
    {StageTag::cot, "cot"},
    {StageTag::answer, "answer"},
    {StageTag::judge, "judge"},
}};

}  // namespace

std::string_view tag_name(StageTag tag) {
    for (const auto& [t, name] : kTagNames) {
        if (t == tag) return name;
    }
    return "unknown";
}

std::optional<StageTag> tag_from_name(std::string_view name) {
    for (const auto& [t, n] : kTagNames) {
        if (n == name) return t;
    }
    return std::nullopt;
}

std::string_view error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::auth: return "auth";
        case ErrorKind::rate_limit: return "rate_limit";
        case ErrorKind::timeout: return "timeout";
        case ErrorKind::transient: return "transient";
        case ErrorKind::bad_request: return "bad_request";
        case ErrorKind::exhausted: return "exhausted";
    }
    return "unknown";
}

ProviderError::ProviderError(ErrorKind kind, const std::string& message, int attempts)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind), attempts_(attempts) {}

bool ProviderError::retryable() const {
    return kind_ == ErrorKind::rate_limit || kind_ == ErrorKind::timeout || kind_ == ErrorKind::transient;
}

}  // namespace prefforge::provider
