#pragma once

#include "prefforge/dpo/objective.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace prefforge::dpo {

// Defaults are arbitrary tabular-scale choices, not tuned values.
struct TrainConfig {
    double beta = 0.1;
    double learning_rate = 0.5;
    int steps = 200;
    std::uint64_t seed = 7;

    // Throws std::invalid_argument. steps = 0 is accepted as a no-op run.
    void validate() const;
};

struct HistoryEntry {
    int step = 0;  // number of updates applied
    double mean_loss = 0.0;
    double mean_margin = 0.0;
};

struct DatasetStats {
    double mean_loss = 0.0;
    double mean_margin = 0.0;
    std::vector<double> margins;
};

struct TrainResult {
    ToyPolicy policy;
    std::vector<HistoryEntry> history;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(int step, const std::string& message);
    int step() const { return step_; }

private:
    int step_;
};

// Fixed-order pairwise summation, so results do not depend on how the work
// is split.
double pairwise_sum(std::span<const double> values);

DatasetStats evaluate_dataset(const ToyPolicy& theta, const ToyPolicy& ref,
                              std::span<const PreferenceInstance> dataset, double beta);

// Full-batch gradient descent on the mean loss. The reference policy is a
// frozen copy of theta0. history[s-1] holds the dataset statistics after s
// updates.
TrainResult train(const ToyPolicy& theta0, std::span<const PreferenceInstance> dataset, const TrainConfig& cfg);

// "step,mean_loss,mean_margin" rows, values printed with 17 significant digits.
std::string history_csv(const std::vector<HistoryEntry>& history);

struct ToyProblem {
    Vocab vocab;
    ToyPolicy theta0;
    std::vector<PreferenceInstance> dataset;
};

// Synthetic instances over a small numbered vocab. Every chosen/rejected pair
// differs. The same seed always yields the same problem.
ToyProblem synthetic_problem(std::uint64_t seed, std::size_t instances = 8, std::size_t vocab_size = 8);

}  // namespace prefforge::dpo
