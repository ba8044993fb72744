#include "prefforge/eval/report.hpp"

#include "prefforge/data/stage_io.hpp"
#include "prefforge/data/think.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>

namespace prefforge::eval {

namespace {

std::size_t column_index(Dimension dim) {
    switch (dim) {
        case Dimension::information_richness: return 0;
        case Dimension::relevance: return 1;
        case Dimension::accuracy: return 2;
    }
    return 0;
}

std::string format_cell(const std::optional<double>& value) {
    return value ? fmt::format("{:.4f}", *value) : std::string("NA");
}

}  // namespace

const std::array<std::string_view, kColumnCount>& column_names() {
    static const std::array<std::string_view, kColumnCount> names = {"information_richness", "relevance",
                                                                     "accuracy", "rouge_l", "bleu_4"};
    return names;
}

const std::array<std::string_view, kColumnCount>& column_titles() {
    static const std::array<std::string_view, kColumnCount> titles = {"Information Richness", "Relevance",
                                                                      "Accuracy", "ROUGE-L", "BLEU-4"};
    return titles;
}

std::string scored_text(const std::string& answer, ScoredText mode) {
    if (mode == ScoredText::full_text || answer.find(data::kThinkOpen) == std::string::npos) return answer;
    try {
        return data::split_think(answer).answer;
    } catch (const data::ThinkFormatError&) {
        return answer;
    }
}

std::vector<NlgScore> nlg_scores(const std::vector<AnswerRecord>& answers, const NlgOptions& options) {
    std::vector<NlgScore> out;
    for (const auto& rec : answers) {
        if (rec.reference.empty()) continue;
        const auto cand = tokenize(scored_text(rec.answer, options.scored), options.tokenizer);
        const auto ref = tokenize(rec.reference, options.tokenizer);
        out.push_back({rec.model_id, rec.question_id, rouge_l(cand, ref).f1,
                       bleu(cand, {ref}, {4, options.smooth_bleu})});
    }
    return out;
}

std::vector<ScoreRow> merge_scores(const std::vector<JudgeScore>& judge, const std::vector<NlgScore>& nlg,
                                   std::optional<Tokenizer> tokenizer) {
    std::vector<ScoreRow> rows;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    auto row_for = [&](const std::string& model, const std::string& question) -> ScoreRow& {
        auto [it, inserted] = index.emplace(std::make_pair(model, question), rows.size());
        if (inserted) rows.push_back({model, question, {}, tokenizer});
        return rows[it->second];
    };
    for (const auto& s : judge) row_for(s.model_id, s.question_id).values[column_index(s.dimension)] = s.value;
    for (const auto& s : nlg) {
        auto& row = row_for(s.model_id, s.question_id);
        row.values[3] = s.rouge_l;
        row.values[4] = s.bleu_4;
    }
    return rows;
}

std::vector<ScoreRow> score_answers(const std::vector<AnswerRecord>& answers, const JudgeResult* judge,
                                    const NlgOptions& options) {
    std::vector<ScoreRow> rows;
    for (const auto& rec : answers) rows.push_back({rec.model_id, rec.question_id, {}, options.tokenizer});
    auto merged = merge_scores(judge ? judge->scores : std::vector<JudgeScore>{}, nlg_scores(answers, options));
    std::map<std::pair<std::string, std::string>, const ScoreRow*> by_key;
    for (const auto& row : merged) by_key[{row.model_id, row.question_id}] = &row;
    for (auto& row : rows) {
        if (auto it = by_key.find({row.model_id, row.question_id}); it != by_key.end()) row.values = it->second->values;
    }
    return rows;
}

data::Json score_row_to_json(const ScoreRow& row) {
    data::Json out = {{"model_id", row.model_id}, {"question_id", row.question_id}};
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        const std::string key(column_names()[c]);
        out[key] = row.values[c] ? data::Json(*row.values[c]) : data::Json(nullptr);
    }
    out["tokenizer"] = row.tokenizer ? data::Json(tokenizer_name(*row.tokenizer)) : data::Json(nullptr);
    return out;
}

std::vector<ScoreRow> read_score_rows(const std::filesystem::path& path) {
    std::vector<ScoreRow> rows;
    for (const auto& line : data::read_json_lines(path, true)) {
        const auto& obj = line.value;
        if (!obj.is_object() || !obj.contains("model_id") || !obj["model_id"].is_string() ||
            !obj.contains("question_id") || !obj["question_id"].is_string()) {
            throw data::StageFileError("expected an object with string model_id and question_id", line.line);
        }
        ScoreRow row{obj["model_id"].get<std::string>(), obj["question_id"].get<std::string>(), {}, {}};
        if (obj.contains("tokenizer") && obj["tokenizer"].is_string()) {
            row.tokenizer = tokenizer_from_name(obj["tokenizer"].get<std::string>());
        }
        for (std::size_t c = 0; c < kColumnCount; ++c) {
            const std::string key(column_names()[c]);
            if (!obj.contains(key) || obj[key].is_null()) continue;
            if (!obj[key].is_number()) throw data::StageFileError("field '" + key + "' must be a number", line.line);
            row.values[c] = obj[key].get<double>();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

MetricReport aggregate_rows(const std::vector<ScoreRow>& rows) {
    MetricReport report;
    std::map<std::string, std::size_t> index;
    std::vector<std::array<double, kColumnCount>> sums;
    bool mixed = false;
    for (const auto& row : rows) {
        if (row.tokenizer != rows.front().tokenizer) mixed = true;
        auto [it, inserted] = index.emplace(row.model_id, report.rows.size());
        if (inserted) {
            report.rows.push_back({row.model_id, {}, {}});
            sums.push_back({});
        }
        auto& target = report.rows[it->second];
        for (std::size_t c = 0; c < kColumnCount; ++c) {
            if (!row.values[c]) continue;
            sums[it->second][c] += *row.values[c];
            ++target.counts[c];
        }
    }
    for (std::size_t r = 0; r < report.rows.size(); ++r) {
        for (std::size_t c = 0; c < kColumnCount; ++c) {
            const auto n = report.rows[r].counts[c];
            if (n > 0) report.rows[r].means[c] = sums[r][c] / static_cast<double>(n);
        }
    }
    if (!rows.empty() && !mixed) report.tokenizer = rows.front().tokenizer;
    return report;
}

MetricReport aggregate_report(const std::vector<JudgeScore>& judge, const std::vector<NlgScore>& nlg,
                              std::optional<Tokenizer> tokenizer) {
    return aggregate_rows(merge_scores(judge, nlg, tokenizer));
}

std::string report_csv(const MetricReport& report) {
    std::string out = "model";
    for (auto name : column_names()) out += fmt::format(",{}", name);
    out += '\n';
    for (const auto& row : report.rows) {
        out += row.model_id;
        for (const auto& mean : row.means) out += "," + format_cell(mean);
        out += '\n';
    }
    return out;
}

std::string report_table(const MetricReport& report) {
    std::size_t model_width = 5;
    for (const auto& row : report.rows) model_width = std::max(model_width, row.model_id.size());
    std::string out = fmt::format("{:<{}}", "Model", model_width);
    for (auto title : column_titles()) out += fmt::format("  {:>{}}", title, title.size());
    out += '\n';
    for (const auto& row : report.rows) {
        out += fmt::format("{:<{}}", row.model_id, model_width);
        for (std::size_t c = 0; c < kColumnCount; ++c) {
            out += fmt::format("  {:>{}}", format_cell(row.means[c]), column_titles()[c].size());
        }
        out += '\n';
    }
    if (report.tokenizer) out += fmt::format("tokenizer: {}\n", tokenizer_name(*report.tokenizer));
    return out;
}

}  // namespace prefforge::eval
