#pragma once

#include "prefforge/data/records.hpp"
#include "prefforge/eval/bleu.hpp"
#include "prefforge/eval/judge.hpp"
#include "prefforge/eval/rouge.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prefforge::eval {

// Report columns in output order.
enum class Column { information_richness, relevance, accuracy, rouge_l, bleu_4 };
inline constexpr std::size_t kColumnCount = 5;

const std::array<std::string_view, kColumnCount>& column_names();
const std::array<std::string_view, kColumnCount>& column_titles();

// Which part of an answer is compared with the reference.
enum class ScoredText { answer_body, full_text };

struct NlgOptions {
    Tokenizer tokenizer = Tokenizer::unicode_char;
    ScoredText scored = ScoredText::answer_body;
    bool smooth_bleu = false;
};

struct NlgScore {
    std::string model_id;
    std::string question_id;
    double rouge_l = 0.0;  // F1
    double bleu_4 = 0.0;
};

// Text that is scored: with answer_body, a response carrying a think block
// is reduced to the text after it.
std::string scored_text(const std::string& answer, ScoredText mode);

// Answers without a reference are left out.
std::vector<NlgScore> nlg_scores(const std::vector<AnswerRecord>& answers, const NlgOptions& options = {});

// Every metric for one (model, question) pair; absent cells are empty.
struct ScoreRow {
    std::string model_id;
    std::string question_id;
    std::array<std::optional<double>, kColumnCount> values;
    std::optional<Tokenizer> tokenizer;
};

// One row per pair, in order of first appearance.
std::vector<ScoreRow> merge_scores(const std::vector<JudgeScore>& judge, const std::vector<NlgScore>& nlg,
                                   std::optional<Tokenizer> tokenizer = std::nullopt);

// One row per answer, in answer order. `judge` may be null when judging was
// not run.
std::vector<ScoreRow> score_answers(const std::vector<AnswerRecord>& answers, const JudgeResult* judge,
                                    const NlgOptions& options = {});

data::Json score_row_to_json(const ScoreRow& row);
std::vector<ScoreRow> read_score_rows(const std::filesystem::path& path);

struct ReportRow {
    std::string model_id;
    std::array<std::optional<double>, kColumnCount> means;
    std::array<std::size_t, kColumnCount> counts{};
};

struct MetricReport {
    std::vector<ReportRow> rows;
    std::optional<Tokenizer> tokenizer;
};

// Per-model means over the present cells only; a column with no present
// cell stays absent. The tokenizer is reported when all rows agree on it.
MetricReport aggregate_rows(const std::vector<ScoreRow>& rows);
MetricReport aggregate_report(const std::vector<JudgeScore>& judge, const std::vector<NlgScore>& nlg,
                              std::optional<Tokenizer> tokenizer = std::nullopt);

// Header "model,<column names>"; absent cells are written as NA.
std::string report_csv(const MetricReport& report);
std::string report_table(const MetricReport& report);

}  // namespace prefforge::eval
