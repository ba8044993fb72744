#pragma once

#include "prefforge/dpo/policy.hpp"

#include <stdexcept>

namespace prefforge::dpo {

struct PreferenceInstance {
    TokenSeq prompt;
    TokenSeq chosen;
    TokenSeq rejected;

    PreferenceInstance swapped() const { return {prompt, rejected, chosen}; }
    bool operator==(const PreferenceInstance&) const = default;
};

// Throws std::domain_error for out-of-vocab tokens and std::invalid_argument
// when chosen and rejected are the same sequence.
void check_instance(const PreferenceInstance& inst, std::size_t vocab_size);

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ln sigma(x), stable for large |x|.
double log_sigmoid(double x);
// sigma(x) without overflow.
double sigmoid(double x);

// m = beta * ((ln pi_theta(y_w) - ln pi_ref(y_w)) - (ln pi_theta(y_l) - ln pi_ref(y_l)))
double implicit_reward_margin(const ToyPolicy& theta, const ToyPolicy& ref, const PreferenceInstance& inst,
                              double beta);

// -ln sigma(m) for the margin above.
double dpo_loss(const ToyPolicy& theta, const ToyPolicy& ref, const PreferenceInstance& inst, double beta);

// Loss as a function of the margin alone.
double dpo_loss_from_margin(double margin);

// d loss / d theta.logits, same shape as the logits.
Matrix dpo_grad(const ToyPolicy& theta, const ToyPolicy& ref, const PreferenceInstance& inst, double beta);

// Adds the gradient of one instance, scaled by `weight`, into `grad` and
// returns its margin. `ref_delta` is ln pi_ref(y_w) - ln pi_ref(y_l).
double accumulate_dpo_grad(const ToyPolicy& theta, double ref_delta, const PreferenceInstance& inst, double beta,
                           double weight, Matrix& grad);

}  // namespace prefforge::dpo
