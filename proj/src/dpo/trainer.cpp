#include "prefforge/dpo/trainer.hpp"

#include <fmt/format.h>

#include <cmath>

namespace prefforge::dpo {

void TrainConfig::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be a positive number");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning rate must be a positive number");
    }
    if (steps < 0) throw std::invalid_argument("steps must be non-negative");
}

DivergenceError::DivergenceError(int step, const std::string& message)
    : std::runtime_error(fmt::format("training diverged at step {}: {}", step, message)), step_(step) {}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double total = 0.0;
        for (double v : values) total += v;
        return total;
    }
    const auto half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

DatasetStats evaluate_dataset(const ToyPolicy& theta, const ToyPolicy& ref,
                              std::span<const PreferenceInstance> dataset, double beta) {
    DatasetStats stats;
    std::vector<double> losses;
    for (const auto& inst : dataset) {
        const double m = implicit_reward_margin(theta, ref, inst, beta);
        stats.margins.push_back(m);
        losses.push_back(dpo_loss_from_margin(m));
    }
    if (!dataset.empty()) {
        const auto n = static_cast<double>(dataset.size());
        stats.mean_loss = pairwise_sum(losses) / n;
        stats.mean_margin = pairwise_sum(stats.margins) / n;
    }
    return stats;
}

TrainResult train(const ToyPolicy& theta0, std::span<const PreferenceInstance> dataset, const TrainConfig& cfg) {
    cfg.validate();
    if (dataset.empty()) throw std::invalid_argument("training dataset is empty");
    for (const auto& inst : dataset) check_instance(inst, theta0.vocab_size());

    const ToyPolicy ref = theta0;
    std::vector<double> ref_deltas;
    for (const auto& inst : dataset) {
        ref_deltas.push_back(sequence_logprob(ref, inst.prompt, inst.chosen) -
                             sequence_logprob(ref, inst.prompt, inst.rejected));
    }

    TrainResult result{theta0, {}};
    const double weight = 1.0 / static_cast<double>(dataset.size());
    Matrix grad(theta0.logits().rows(), theta0.logits().cols());
    for (int step = 1; step <= cfg.steps; ++step) {
        grad.setZero();
        try {
            for (std::size_t i = 0; i < dataset.size(); ++i) {
                accumulate_dpo_grad(result.policy, ref_deltas[i], dataset[i], cfg.beta, weight, grad);
            }
        } catch (const NumericError& err) {
            throw DivergenceError(step, err.what());
        }
        result.policy.logits() -= cfg.learning_rate * grad;
        if (!result.policy.logits().allFinite()) throw DivergenceError(step, "non-finite logits");

        DatasetStats stats;
        try {
            stats = evaluate_dataset(result.policy, ref, dataset, cfg.beta);
        } catch (const NumericError& err) {
            throw DivergenceError(step, err.what());
        }
        result.history.push_back({step, stats.mean_loss, stats.mean_margin});
    }
    return result;
}

std::string history_csv(const std::vector<HistoryEntry>& history) {
    std::string out = "step,mean_loss,mean_margin\n";
    for (const auto& row : history) {
        out += fmt::format("{},{:.17g},{:.17g}\n", row.step, row.mean_loss, row.mean_margin);
    }
    return out;
}

ToyProblem synthetic_problem(std::uint64_t seed, std::size_t instances, std::size_t vocab_size) {
    Rng rng(seed);
    Vocab vocab = Vocab::numbered(vocab_size);
    ToyPolicy theta0 = ToyPolicy::random(vocab_size, rng, 0.5);
    auto draw = [&](std::size_t min_len, std::size_t max_len) {
        TokenSeq seq(min_len + rng.below(max_len - min_len + 1));
        for (auto& t : seq) t = rng.below(vocab_size);
        return seq;
    };
    std::vector<PreferenceInstance> dataset;
    while (dataset.size() < instances) {
        PreferenceInstance inst{draw(1, 3), draw(2, 5), draw(2, 5)};
        if (inst.chosen == inst.rejected) continue;
        dataset.push_back(std::move(inst));
    }
    return {std::move(vocab), std::move(theta0), std::move(dataset)};
}

}  // namespace prefforge::dpo
