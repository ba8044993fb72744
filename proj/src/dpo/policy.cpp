#include "prefforge/dpo/policy.hpp"

#include <cmath>

namespace prefforge::dpo {

namespace {

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    const double top = row.maxCoeff();
    return top + std::log((row.array() - top).exp().sum());
}

void check_chain(const ToyPolicy& policy, const TokenSeq& prompt, const TokenSeq& y) {
    check_tokens(prompt, policy.vocab_size(), "prompt");
    check_tokens(y, policy.vocab_size(), "response");
}

}  // namespace

ToyPolicy::ToyPolicy(std::size_t vocab_size) : logits_(Matrix::Zero(vocab_size + 1, vocab_size)) {
    if (vocab_size < 2) throw std::invalid_argument("policy needs a vocab of at least two symbols");
}

ToyPolicy::ToyPolicy(Matrix logits) : logits_(std::move(logits)) {
    if (logits_.cols() < 2 || logits_.rows() != logits_.cols() + 1) {
        throw std::invalid_argument("logits must have shape (V+1) x V with V >= 2");
    }
}

ToyPolicy ToyPolicy::random(std::size_t vocab_size, Rng& rng, double scale) {
    ToyPolicy policy(vocab_size);
    for (Eigen::Index r = 0; r < policy.logits_.rows(); ++r) {
        for (Eigen::Index c = 0; c < policy.logits_.cols(); ++c) policy.logits_(r, c) = rng.uniform(-scale, scale);
    }
    return policy;
}

double ToyPolicy::log_prob(Token prev, Token next) const {
    const auto row = logits_.row(static_cast<Eigen::Index>(prev));
    return row(static_cast<Eigen::Index>(next)) - log_sum_exp(row);
}

Eigen::VectorXd ToyPolicy::probabilities(Token prev) const {
    const auto row = logits_.row(static_cast<Eigen::Index>(prev));
    const Eigen::RowVectorXd e = (row.array() - row.maxCoeff()).exp();
    return (e / e.sum()).transpose();
}

double sequence_logprob(const ToyPolicy& policy, const TokenSeq& prompt, const TokenSeq& y) {
    check_chain(policy, prompt, y);
    Token prev = prompt.empty() ? policy.bos() : prompt.back();
    double total = 0.0;
    for (Token next : y) {
        total += policy.log_prob(prev, next);
        prev = next;
    }
    return total;
}

void accumulate_logprob_grad(const ToyPolicy& policy, const TokenSeq& prompt, const TokenSeq& y, double weight,
                             Matrix& grad) {
    check_chain(policy, prompt, y);
    Token prev = prompt.empty() ? policy.bos() : prompt.back();
    for (Token next : y) {
        const auto row = static_cast<Eigen::Index>(prev);
        grad.row(row) -= weight * policy.probabilities(prev).transpose();
        grad(row, static_cast<Eigen::Index>(next)) += weight;
        prev = next;
    }
}

}  // namespace prefforge::dpo
