#pragma once

#include "prefforge/dpo/random.hpp"
#include "prefforge/dpo/vocab.hpp"

#include <Eigen/Dense>

#include <stdexcept>

namespace prefforge::dpo {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Tabular bigram policy. Row r holds the logits of the next token given the
// previous token r; the last row (index V) conditions on BOS.
class ToyPolicy {
public:
    // All-zero logits, i.e. uniform next-token distributions.
    explicit ToyPolicy(std::size_t vocab_size);
    explicit ToyPolicy(Matrix logits);

    // Logits drawn uniformly from [-scale, scale].
    static ToyPolicy random(std::size_t vocab_size, Rng& rng, double scale = 1.0);

    std::size_t vocab_size() const { return static_cast<std::size_t>(logits_.cols()); }
    Token bos() const { return vocab_size(); }

    const Matrix& logits() const { return logits_; }
    Matrix& logits() { return logits_; }

    // ln P(next | prev); prev may be bos().
    double log_prob(Token prev, Token next) const;
    Eigen::VectorXd probabilities(Token prev) const;

    bool operator==(const ToyPolicy& other) const { return logits_ == other.logits_; }

private:
    Matrix logits_;
};

// Sum of ln P(y_t | y_{t-1}) over y. The chain starts from the last prompt
// token, or BOS for an empty prompt. Throws std::domain_error for tokens
// outside the vocab.
double sequence_logprob(const ToyPolicy& policy, const TokenSeq& prompt, const TokenSeq& y);

// Adds weight * d/dlogits ln pi(y | prompt) into `grad`.
void accumulate_logprob_grad(const ToyPolicy& policy, const TokenSeq& prompt, const TokenSeq& y, double weight,
                             Matrix& grad);

}  // namespace prefforge::dpo
