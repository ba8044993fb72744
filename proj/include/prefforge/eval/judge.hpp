#pragma once

#include "prefforge/pipeline/config.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prefforge::eval {

enum class Dimension { information_richness, relevance, accuracy };

inline constexpr std::array<Dimension, 3> kDimensions = {Dimension::information_richness, Dimension::relevance,
                                                         Dimension::accuracy};

std::string_view dimension_name(Dimension dim);

// One line of an answers file.
struct AnswerRecord {
    std::string model_id;
    std::string question_id;
    std::string question;
    std::string answer;
    std::string reference;
};

// Reads answers JSONL. model_id, question_id and answer are required,
// question and reference default to empty. A repeated (model_id,
// question_id) pair is an error. Throws data::StageFileError.
std::vector<AnswerRecord> read_answers(const std::filesystem::path& path);

struct JudgeScore {
    std::string model_id;
    std::string question_id;
    Dimension dimension = Dimension::accuracy;
    double value = 0.0;
};

struct AbsentScore {
    std::string model_id;
    std::string question_id;
    std::string reason;
};

struct JudgeResult {
    std::vector<JudgeScore> scores;
    // Pairs for which no dimension could be scored.
    std::vector<AbsentScore> absent;
    std::size_t calls = 0;
};

// Extracts the three dimension scores from a judge reply. The reply must hold
// a JSON object with a number in [0, 10] for every dimension.
std::optional<std::map<Dimension, double>> parse_judge_reply(std::string_view reply);

struct JudgeOptions {
    std::size_t concurrency = 4;
};

// One judge call per answer. An unparseable reply is re-requested once; a
// second bad reply or a provider error leaves the answer unscored. Scores
// come back in answer order, dimensions in kDimensions order.
JudgeResult judge_answers(const std::vector<AnswerRecord>& answers, const pipeline::StageBinding& judge,
                          const JudgeOptions& options = {});

}  // namespace prefforge::eval
