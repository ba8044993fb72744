#include "prefforge/eval/judge.hpp"

#include "prefforge/data/stage_io.hpp"

#include <atomic>
#include <set>
#include <thread>

namespace prefforge::eval {

namespace {

std::string required_string(const data::Json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw data::StageFileError(std::string("missing field '") + key + "'", line);
    if (!it->is_string()) throw data::StageFileError(std::string("field '") + key + "' must be a string", line);
    return it->get<std::string>();
}

std::string optional_string(const data::Json& obj, const char* key, std::size_t line) {
    if (!obj.contains(key) || obj[key].is_null()) return {};
    return required_string(obj, key, line);
}

struct Outcome {
    std::optional<std::map<Dimension, double>> scores;
    std::string reason;
    std::size_t calls = 0;
};

Outcome judge_one(const AnswerRecord& rec, const pipeline::StageBinding& judge) {
    Outcome outcome;
    const pipeline::TemplateVars vars{{"question", rec.question},
                                      {"answer", rec.answer},
                                      {"reference", rec.reference},
                                      {"model_id", rec.model_id}};
    provider::GenRequest request;
    try {
        request.system_prompt = pipeline::render(judge.prompt.system, vars);
        request.user_prompt = pipeline::render(judge.prompt.user, vars);
    } catch (const pipeline::TemplateError& err) {
        outcome.reason = err.what();
        return outcome;
    }
    request.stage_tag = provider::StageTag::judge;
    request.temperature = judge.settings.temperature;
    request.max_tokens = judge.settings.max_tokens;
    request.record_id = rec.model_id + "/" + rec.question_id;
    request.inputs = vars;
    for (int attempt = 0; attempt < 2; ++attempt) {
        ++outcome.calls;
        try {
            outcome.scores = parse_judge_reply(judge.generator->complete(request).text);
        } catch (const provider::ProviderError& err) {
            outcome.reason = std::string("judge call failed: ") + err.what();
            return outcome;
        }
        if (outcome.scores) return outcome;
        outcome.reason = "unparseable judge reply";
    }
    return outcome;
}

}  // namespace

std::string_view dimension_name(Dimension dim) {
    switch (dim) {
        case Dimension::information_richness: return "information_richness";
        case Dimension::relevance: return "relevance";
        case Dimension::accuracy: return "accuracy";
    }
    return "?";
}

std::vector<AnswerRecord> read_answers(const std::filesystem::path& path) {
    std::vector<AnswerRecord> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& line : data::read_json_lines(path, true)) {
        if (!line.value.is_object()) throw data::StageFileError("expected a JSON object", line.line);
        AnswerRecord rec{required_string(line.value, "model_id", line.line),
                         required_string(line.value, "question_id", line.line),
                         optional_string(line.value, "question", line.line),
                         required_string(line.value, "answer", line.line),
                         optional_string(line.value, "reference", line.line)};
        if (!seen.emplace(rec.model_id, rec.question_id).second) {
            throw data::StageFileError("duplicate answer for model '" + rec.model_id + "', question '" +
                                           rec.question_id + "'",
                                       line.line);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::optional<std::map<Dimension, double>> parse_judge_reply(std::string_view reply) {
    auto parsed = data::Json::parse(reply, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        const auto open = reply.find('{');
        const auto close = reply.rfind('}');
        if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
        parsed = data::Json::parse(reply.substr(open, close - open + 1), nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object()) return std::nullopt;
    }
    std::map<Dimension, double> scores;
    for (auto dim : kDimensions) {
        auto it = parsed.find(std::string(dimension_name(dim)));
        if (it == parsed.end() || !it->is_number()) return std::nullopt;
        const double value = it->get<double>();
        if (!(value >= 0.0 && value <= 10.0)) return std::nullopt;
        scores[dim] = value;
    }
    return scores;
}

JudgeResult judge_answers(const std::vector<AnswerRecord>& answers, const pipeline::StageBinding& judge,
                          const JudgeOptions& options) {
    if (!judge.generator) throw std::invalid_argument("no judge provider bound");
    std::vector<Outcome> outcomes(answers.size());
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> workers;
        const auto n = std::max<std::size_t>(1, std::min(options.concurrency, answers.size()));
        for (std::size_t w = 0; w < n; ++w) {
            workers.emplace_back([&] {
                for (auto i = next++; i < answers.size(); i = next++) outcomes[i] = judge_one(answers[i], judge);
            });
        }
    }
    JudgeResult result;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        result.calls += outcomes[i].calls;
        if (!outcomes[i].scores) {
            result.absent.push_back({answers[i].model_id, answers[i].question_id, outcomes[i].reason});
            continue;
        }
        for (auto dim : kDimensions) {
            result.scores.push_back({answers[i].model_id, answers[i].question_id, dim, outcomes[i].scores->at(dim)});
        }
    }
    return result;
}

}  // namespace prefforge::eval
