#include "prefforge/dpo/objective.hpp"

#include <cmath>

namespace prefforge::dpo {

namespace {

void check_pair(const ToyPolicy& theta, const ToyPolicy& ref) {
    if (theta.vocab_size() != ref.vocab_size()) throw std::invalid_argument("policies have different vocab sizes");
}

double finite_or_throw(double value, const char* what) {
    if (!std::isfinite(value)) throw NumericError(std::string("non-finite ") + what);
    return value;
}

}  // namespace

void check_instance(const PreferenceInstance& inst, std::size_t vocab_size) {
    check_tokens(inst.prompt, vocab_size, "prompt");
    check_tokens(inst.chosen, vocab_size, "chosen");
    check_tokens(inst.rejected, vocab_size, "rejected");
    if (inst.chosen == inst.rejected) throw std::invalid_argument("chosen and rejected are identical");
}

double log_sigmoid(double x) {
    if (x >= 0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double implicit_reward_margin(const ToyPolicy& theta, const ToyPolicy& ref, const PreferenceInstance& inst,
                              double beta) {
    check_pair(theta, ref);
    const double delta_w = sequence_logprob(theta, inst.prompt, inst.chosen) -
                           sequence_logprob(ref, inst.prompt, inst.chosen);
    const double delta_l = sequence_logprob(theta, inst.prompt, inst.rejected) -
                           sequence_logprob(ref, inst.prompt, inst.rejected);
    return finite_or_throw(beta * (delta_w - delta_l), "margin");
}

double dpo_loss_from_margin(double margin) { return finite_or_throw(-log_sigmoid(margin), "loss"); }

double dpo_loss(const ToyPolicy& theta, const ToyPolicy& ref, const PreferenceInstance& inst, double beta) {
    return dpo_loss_from_margin(implicit_reward_margin(theta, ref, inst, beta));
}

double accumulate_dpo_grad(const ToyPolicy& theta, double ref_delta, const PreferenceInstance& inst, double beta,
                           double weight, Matrix& grad) {
    const double policy_delta = sequence_logprob(theta, inst.prompt, inst.chosen) -
                                sequence_logprob(theta, inst.prompt, inst.rejected);
    const double margin = finite_or_throw(beta * (policy_delta - ref_delta), "margin");
    // dL/dm = -sigma(-m)
    const double scale = -beta * sigmoid(-margin) * weight;
    if (scale != 0.0) {
        accumulate_logprob_grad(theta, inst.prompt, inst.chosen, scale, grad);
        accumulate_logprob_grad(theta, inst.prompt, inst.rejected, -scale, grad);
    }
    return margin;
}

Matrix dpo_grad(const ToyPolicy& theta, const ToyPolicy& ref, const PreferenceInstance& inst, double beta) {
    check_pair(theta, ref);
    const double ref_delta = sequence_logprob(ref, inst.prompt, inst.chosen) -
                             sequence_logprob(ref, inst.prompt, inst.rejected);
    Matrix grad = Matrix::Zero(theta.logits().rows(), theta.logits().cols());
    accumulate_dpo_grad(theta, ref_delta, inst, beta, 1.0, grad);
    return grad;
}

}  // namespace prefforge::dpo
