#include "prefforge/pipeline/stages.hpp"

#include "prefforge/data/think.hpp"
#include "prefforge/data/validate.hpp"

#include <json.hpp>

namespace prefforge::pipeline {

using provider::StageTag;

namespace {

std::string trim(std::string_view text) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    const auto end = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(begin, end - begin + 1));
}

struct Call {
    const StageBinding& binding;
    StageTag tag;
    const char* stage;
    const std::string& record_id;
    TemplateVars vars;
    bool want_raw_reasoning = false;
    std::string user_suffix{};
};

provider::GenResponse generate(const Call& call) {
    provider::GenRequest request;
    try {
        request.system_prompt = render(call.binding.prompt.system, call.vars);
        request.user_prompt = render(call.binding.prompt.user, call.vars) + call.user_suffix;
    } catch (const TemplateError& err) {
        throw StageError(call.stage, err.what());
    }
    request.stage_tag = call.tag;
    request.temperature = call.binding.settings.temperature;
    request.max_tokens = call.binding.settings.max_tokens;
    request.want_raw_reasoning = call.want_raw_reasoning;
    request.record_id = call.record_id;
    request.inputs = call.vars;
    try {
        return call.binding.generator->complete(request);
    } catch (const provider::ProviderError& err) {
        throw StageError(call.stage, err.what());
    }
}

// A model that thinks out loud may prefix its answer with a think block.
std::string answer_without_think(const std::string& text) {
    if (text.find(data::kThinkOpen) == std::string::npos) return trim(text);
    try {
        return trim(data::split_think(text).answer);
    } catch (const data::ThinkFormatError&) {
        return trim(text);
    }
}

void require_valid(const data::ValidationReport& report, const char* stage) {
    if (!report.ok()) throw StageError(stage, "invalid output: " + report.violations.front().to_string());
}

}  // namespace

data::EnhancedRecord enhance_question(const data::RawQuestion& rec, const PipelineConfig& config) {
    auto response = generate({config.enhance, StageTag::enhance, "enhance", rec.id, {{"q_raw", rec.q_raw}}});
    data::EnhancedRecord out;
    static_cast<data::RawQuestion&>(out) = rec;
    out.q_enhanced = answer_without_think(response.text);
    require_valid(data::validate_record(out), "enhance");
    return out;
}

data::RejectedRecord generate_rejected(const data::EnhancedRecord& rec, const PipelineConfig& config) {
    Call call{config.reject, StageTag::reject, "reject", rec.id, {{"q_raw", rec.q_raw}, {"q_enhanced", rec.q_enhanced}}};
    call.want_raw_reasoning = true;
    call.user_suffix = config.think_directive;
    auto response = generate(call);

    data::RejectedRecord out;
    static_cast<data::EnhancedRecord&>(out) = rec;
    if (response.raw_reasoning && !trim(*response.raw_reasoning).empty()) {
        out.y_l = {trim(*response.raw_reasoning), answer_without_think(response.text)};
    } else if (response.text.find(data::kThinkOpen) != std::string::npos) {
        try {
            auto parts = data::split_think(response.text);
            out.y_l = {trim(parts.reasoning), trim(parts.answer)};
        } catch (const data::ThinkFormatError& err) {
            throw StageError("reject", std::string("unparseable reasoning block: ") + err.what());
        }
    } else {
        out.y_l = {"", trim(response.text)};
    }
    out.reasoning_l_missing = out.y_l.reasoning.empty();
    require_valid(data::validate_record(out), "reject");
    return out;
}

data::RagRecord integrate_knowledge(const data::RejectedRecord& rec, const PipelineConfig& config) {
    provider::RetrievalResult result;
    try {
        result = config.retriever->retrieve(rec.q_enhanced);
    } catch (const provider::ProviderError& err) {
        throw StageError("retrieve", err.what());
    }
    data::RagRecord out;
    static_cast<data::RejectedRecord&>(out) = rec;
    if (result.empty || result.merged.empty()) {
        if (config.empty_retrieval == EmptyRetrievalPolicy::skip_record) {
            throw RecordSkipped("retrieve", "retrieval returned no usable passages");
        }
        out.rag_content.clear();
        out.rag_empty = true;
    } else {
        out.rag_content = result.merged;
    }
    require_valid(data::validate_record(out), "retrieve");
    return out;
}

std::vector<std::string> parse_cot_steps(std::string_view reply) {
    auto try_parse = [](std::string_view text) -> std::optional<std::vector<std::string>> {
        auto parsed = nlohmann::json::parse(text, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_array()) return std::nullopt;
        std::vector<std::string> steps;
        for (const auto& item : parsed) {
            if (!item.is_string()) return std::nullopt;
            auto step = trim(item.get<std::string>());
            if (!step.empty()) steps.push_back(std::move(step));
        }
        if (steps.empty()) return std::nullopt;
        return steps;
    };

    const std::string text = trim(reply);
    if (auto steps = try_parse(text)) return *steps;
    const auto open = text.find('[');
    const auto close = text.rfind(']');
    if (open != std::string::npos && close != std::string::npos && close > open) {
        if (auto steps = try_parse(std::string_view(text).substr(open, close - open + 1))) return *steps;
    }
    throw std::invalid_argument("reply is not a JSON array of reasoning steps");
}

std::string join_cot_steps(const std::vector<std::string>& steps) {
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += steps[i];
    }
    return out;
}

std::string build_preferred_cot(const data::RagRecord& rec, const PipelineConfig& config) {
    Call call{config.cot,
              StageTag::cot,
              "cot",
              rec.id,
              {{"q_raw", rec.q_raw}, {"q_enhanced", rec.q_enhanced}, {"rag_content", rec.rag_content}}};
    auto response = generate(call);
    try {
        return join_cot_steps(parse_cot_steps(answer_without_think(response.text)));
    } catch (const std::invalid_argument&) {
    }
    call.user_suffix = "\n\n" + config.cot_repair_instruction;
    response = generate(call);
    try {
        return join_cot_steps(parse_cot_steps(answer_without_think(response.text)));
    } catch (const std::invalid_argument& err) {
        throw StageError("cot", std::string(err.what()) + " (after format-repair retry)");
    }
}

data::FinalRecord generate_preferred_answer(const data::RagRecord& rec, const std::string& reasoning_w,
                                            const PipelineConfig& config) {
    if (reasoning_w.empty()) throw std::invalid_argument("reasoning_w must be non-empty");
    auto response = generate({config.answer,
                              StageTag::answer,
                              "answer",
                              rec.id,
                              {{"q_raw", rec.q_raw},
                               {"q_enhanced", rec.q_enhanced},
                               {"rag_content", rec.rag_content},
                               {"reasoning_w", reasoning_w}}});
    data::FinalRecord out;
    static_cast<data::RagRecord&>(out) = rec;
    out.y_w = {reasoning_w, answer_without_think(response.text)};
    require_valid(data::validate_record(out), "answer");
    return out;
}

data::DpoTriple format_dpo(const data::FinalRecord& rec, const PipelineConfig& config) {
    require_valid(data::validate_record(rec), "format");
    data::DpoTriple out;
    out.id = rec.id;
    const auto& question = config.prompt_source == PromptSource::enhanced ? rec.q_enhanced : rec.q_raw;
    out.prompt = question + config.think_directive;
    try {
        out.chosen = data::wrap_think(rec.y_w.reasoning, rec.y_w.answer);
        out.rejected = data::wrap_think(rec.y_l.reasoning, rec.y_l.answer);
    } catch (const data::ThinkFormatError& err) {
        throw StageError("format", err.what());
    }
    data::ValidationOptions options;
    options.think_directive = config.think_directive;
    require_valid(data::validate_record(out, options), "format");
    return out;
}

}  // namespace prefforge::pipeline
