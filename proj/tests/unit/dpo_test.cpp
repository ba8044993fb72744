#include "fakes.hpp"

#include "prefforge/dpo/objective.hpp"
#include "prefforge/dpo/policy.hpp"
#include "prefforge/dpo/text_dataset.hpp"
#include "prefforge/dpo/trainer.hpp"

#include <doctest.h>
#include <fmt/format.h>

#include <cmath>
#include <random>

using namespace prefforge::dpo;

namespace {

// Straight softmax over one logit row, no stabilisation tricks.
double naive_log_prob(const Matrix& logits, std::size_t row, std::size_t col) {
    double z = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) z += std::exp(logits(static_cast<Eigen::Index>(row), j));
    return logits(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) - std::log(z);
}

double naive_sequence_logprob(const Matrix& logits, const TokenSeq& prompt, const TokenSeq& y) {
    std::size_t prev = prompt.empty() ? static_cast<std::size_t>(logits.cols()) : prompt.back();
    double total = 0.0;
    for (auto t : y) {
        total += naive_log_prob(logits, prev, t);
        prev = t;
    }
    return total;
}

double naive_loss(const Matrix& theta, const Matrix& ref, const PreferenceInstance& inst, double beta) {
    const double m = beta * ((naive_sequence_logprob(theta, inst.prompt, inst.chosen) -
                              naive_sequence_logprob(ref, inst.prompt, inst.chosen)) -
                             (naive_sequence_logprob(theta, inst.prompt, inst.rejected) -
                              naive_sequence_logprob(ref, inst.prompt, inst.rejected)));
    return std::log1p(std::exp(-m));
}

TokenSeq random_seq(std::mt19937_64& rng, std::size_t v, std::size_t min_len, std::size_t max_len) {
    TokenSeq out(min_len + rng() % (max_len - min_len + 1));
    for (auto& t : out) t = rng() % v;
    return out;
}

PreferenceInstance random_instance(std::mt19937_64& rng, std::size_t v) {
    PreferenceInstance inst;
    inst.prompt = random_seq(rng, v, 0, 3);
    inst.chosen = random_seq(rng, v, 1, 4);
    do {
        inst.rejected = random_seq(rng, v, 1, 4);
    } while (inst.rejected == inst.chosen);
    return inst;
}

ToyPolicy random_policy(std::mt19937_64& rng, std::size_t v, double scale) {
    Rng r(rng());
    return ToyPolicy::random(v, r, scale);
}

std::uint64_t history_fingerprint(const std::vector<HistoryEntry>& history) {
    std::string text;
    for (const auto& h : history) text += fmt::format("{},{:.10g},{:.10g}\n", h.step, h.mean_loss, h.mean_margin);
    return testing::fnv1a(text);
}

}  // namespace

TEST_SUITE("dpo") {

TEST_CASE("uniform policy sequence log-probability") {
    const ToyPolicy uniform(2);
    CHECK(sequence_logprob(uniform, {}, {0, 1, 1}) == doctest::Approx(-2.0794415416798359).epsilon(1e-15));
    CHECK(sequence_logprob(uniform, {0}, {}) == 0.0);
    CHECK_THROWS_AS(sequence_logprob(uniform, {}, {2}), std::domain_error);
    CHECK_THROWS_AS(sequence_logprob(uniform, {5}, {0}), std::domain_error);
}

TEST_CASE("near one-hot policy gives log-probability near zero") {
    Matrix logits = Matrix::Zero(3, 2);
    logits(2, 0) = 800.0;  // BOS -> 0
    logits(0, 1) = 800.0;  // 0 -> 1
    const ToyPolicy peaked(logits);
    CHECK(std::abs(sequence_logprob(peaked, {}, {0, 1})) < 1e-300);
    CHECK(std::isfinite(sequence_logprob(peaked, {}, {1, 0})));
}

TEST_CASE("sequence log-probability matches a naive softmax") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 300; ++i) {
        const std::size_t v = 2 + rng() % 6;
        const auto policy = random_policy(rng, v, 2.0);
        const auto prompt = random_seq(rng, v, 0, 3);
        const auto y = random_seq(rng, v, 0, 6);
        CHECK(sequence_logprob(policy, prompt, y) ==
              doctest::Approx(naive_sequence_logprob(policy.logits(), prompt, y)).epsilon(1e-12));
    }
}

TEST_CASE("policy and vocab construction") {
    CHECK_THROWS_AS(ToyPolicy(Matrix::Zero(2, 2)), std::invalid_argument);
    CHECK(ToyPolicy(4).logits().rows() == 5);
    CHECK(ToyPolicy(4).probabilities(4).sum() == doctest::Approx(1.0));

    const auto vocab = Vocab::numbered(3);
    CHECK(vocab.symbol(2) == "t2");
    CHECK(vocab.index("t1") == 1);
    CHECK(vocab.bos() == 3);
    CHECK_THROWS_AS(vocab.index("t9"), std::domain_error);
    CHECK_THROWS_AS(Vocab({"a"}), std::invalid_argument);
    CHECK_THROWS_AS(Vocab({"a", "a"}), std::invalid_argument);
    CHECK_THROWS_AS(Vocab({"a", "<bos>"}), std::invalid_argument);
}

TEST_CASE("stable sigmoid helpers") {
    CHECK(log_sigmoid(0.0) == doctest::Approx(-0.693147180559945309).epsilon(1e-15));
    CHECK(log_sigmoid(-800.0) == doctest::Approx(-800.0));
    CHECK(log_sigmoid(800.0) == 0.0);
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(sigmoid(2.0) + sigmoid(-2.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("policy equal to reference gives loss ln 2") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const std::size_t v = 2 + rng() % 5;
        const auto policy = random_policy(rng, v, 1.5);
        const auto inst = random_instance(rng, v);
        const double beta = 0.01 + static_cast<double>(rng() % 1000) / 100.0;
        CHECK(std::abs(dpo_loss(policy, policy, inst, beta) - 0.693147180559945309) <= 1e-12);
    }
}

TEST_CASE("beta zero gives ln 2 and a zero gradient") {
    std::mt19937_64 rng(6);
    const auto theta = random_policy(rng, 4, 1.0);
    const auto ref = random_policy(rng, 4, 1.0);
    const auto inst = random_instance(rng, 4);
    CHECK(dpo_loss(theta, ref, inst, 0.0) == doctest::Approx(0.693147180559945309).epsilon(1e-15));
    CHECK(dpo_grad(theta, ref, inst, 0.0).isZero(0.0));
}

TEST_CASE("margin of one") {
    // ln pi(0) - ln pi(1) from BOS equals the logit gap; the reference is uniform.
    Matrix logits = Matrix::Zero(3, 2);
    logits(2, 0) = 1.0;
    const ToyPolicy theta(logits);
    const ToyPolicy ref(2);
    const PreferenceInstance inst{{}, {0}, {1}};
    CHECK(implicit_reward_margin(theta, ref, inst, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(dpo_loss(theta, ref, inst, 1.0) == doctest::Approx(0.313261687518222834).epsilon(1e-14));
    CHECK(dpo_loss_from_margin(1.0) == doctest::Approx(0.313261687518222834).epsilon(1e-15));
}

TEST_CASE("loss is decreasing in the margin and finite at the extremes") {
    double previous = dpo_loss_from_margin(-50.0);
    for (int k = -499; k <= 500; ++k) {
        const double now = dpo_loss_from_margin(k / 10.0);
        CHECK(now < previous);
        previous = now;
    }
    CHECK(std::isfinite(dpo_loss_from_margin(-1000.0)));
    CHECK(dpo_loss_from_margin(-1000.0) == doctest::Approx(1000.0));
    CHECK(dpo_loss_from_margin(1000.0) >= 0.0);
}

TEST_CASE("swapping chosen and rejected negates the margin") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 200; ++i) {
        const std::size_t v = 2 + rng() % 5;
        const auto theta = random_policy(rng, v, 1.0);
        const auto ref = random_policy(rng, v, 1.0);
        const auto inst = random_instance(rng, v);
        const double m = implicit_reward_margin(theta, ref, inst, 0.5);
        CHECK(implicit_reward_margin(theta, ref, inst.swapped(), 0.5) == doctest::Approx(-m).epsilon(1e-12));
        // ln(1+e^m) - ln(1+e^-m) = m
        CHECK(dpo_loss(theta, ref, inst.swapped(), 0.5) - dpo_loss(theta, ref, inst, 0.5) ==
              doctest::Approx(m).epsilon(1e-9));
    }
}

TEST_CASE("loss matches a naive implementation") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
        const std::size_t v = 2 + rng() % 5;
        const auto theta = random_policy(rng, v, 1.0);
        const auto ref = random_policy(rng, v, 1.0);
        const auto inst = random_instance(rng, v);
        CHECK(dpo_loss(theta, ref, inst, 0.3) ==
              doctest::Approx(naive_loss(theta.logits(), ref.logits(), inst, 0.3)).epsilon(1e-12));
    }
}

TEST_CASE("analytic gradient agrees with central differences") {
    std::mt19937_64 rng(10);
    const double h = 1e-5;
    for (int i = 0; i < 60; ++i) {
        const std::size_t v = 2 + rng() % 4;
        const auto theta = random_policy(rng, v, 1.0);
        const auto ref = random_policy(rng, v, 1.0);
        const auto inst = random_instance(rng, v);
        const double beta = 0.1 + static_cast<double>(rng() % 20) / 10.0;
        const Matrix analytic = dpo_grad(theta, ref, inst, beta);
        Matrix numeric = Matrix::Zero(analytic.rows(), analytic.cols());
        for (Eigen::Index r = 0; r < numeric.rows(); ++r) {
            for (Eigen::Index c = 0; c < numeric.cols(); ++c) {
                Matrix plus = theta.logits();
                Matrix minus = theta.logits();
                plus(r, c) += h;
                minus(r, c) -= h;
                numeric(r, c) = (naive_loss(plus, ref.logits(), inst, beta) - naive_loss(minus, ref.logits(), inst, beta)) /
                                (2 * h);
            }
        }
        const double scale = std::max({analytic.norm(), numeric.norm(), 1e-8});
        CHECK((analytic - numeric).norm() / scale <= 1e-5);
    }
}

TEST_CASE("a small descent step raises the margin") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 100; ++i) {
        const std::size_t v = 2 + rng() % 5;
        const auto ref = random_policy(rng, v, 1.0);
        auto theta = ref;
        const auto inst = random_instance(rng, v);
        const double before = implicit_reward_margin(theta, ref, inst, 0.5);
        const Matrix grad = dpo_grad(theta, ref, inst, 0.5);
        theta.logits() -= 1e-3 * grad;
        const double after = implicit_reward_margin(theta, ref, inst, 0.5);
        // Pairs with the same multiset of transitions have a constant margin.
        if (grad.norm() > 1e-12) {
            CHECK(after > before);
        } else {
            CHECK(after == before);
        }
    }
}

TEST_CASE("instance checks") {
    CHECK_THROWS_AS(check_instance({{}, {0}, {0}}, 3), std::invalid_argument);
    CHECK_THROWS_AS(check_instance({{}, {0}, {3}}, 3), std::domain_error);
    CHECK_NOTHROW(check_instance({{2}, {0}, {1}}, 3));
}

TEST_CASE("pairwise sum") {
    const std::vector<double> values = {1e16, 1.0, -1e16, 1.0};
    CHECK(pairwise_sum(values) == pairwise_sum(values));
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
    std::vector<double> ones(1000, 0.1);
    CHECK(pairwise_sum(ones) == doctest::Approx(100.0).epsilon(1e-13));
}

TEST_CASE("rng is portable") {
    Rng a(7);
    Rng b(7);
    for (int i = 0; i < 100; ++i) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    // The 10000th draw of the default-seeded engine is fixed by the standard.
    std::mt19937_64 standard;
    standard.discard(9999);
    CHECK(standard() == 9981545732273789042ULL);
}

TEST_CASE("training config validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.beta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.learning_rate = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.steps = -1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("zero steps return the initial policy") {
    const auto problem = synthetic_problem(3);
    TrainConfig cfg;
    cfg.steps = 0;
    const auto result = train(problem.theta0, problem.dataset, cfg);
    CHECK(result.policy == problem.theta0);
    CHECK(result.history.empty());
}

TEST_CASE("synthetic problem is reproducible and well formed") {
    const auto a = synthetic_problem(7);
    const auto b = synthetic_problem(7);
    CHECK(a.theta0 == b.theta0);
    CHECK(a.dataset == b.dataset);
    CHECK(a.dataset.size() == 8);
    CHECK(a.vocab.size() == 8);
    for (const auto& inst : a.dataset) {
        CHECK_NOTHROW(check_instance(inst, 8));
        CHECK(inst.prompt.size() >= 1);
        CHECK(inst.chosen.size() >= 2);
    }
    CHECK_FALSE(synthetic_problem(8).dataset == a.dataset);
}

TEST_CASE("seed 7 training run matches frozen values") {
    const auto problem = synthetic_problem(7);
    const auto result = train(problem.theta0, problem.dataset, TrainConfig{});
    REQUIRE(result.history.size() == 200);
    CHECK(result.history.front().step == 1);
    CHECK(result.history.back().step == 200);
    CHECK(result.history.front().mean_loss == doctest::Approx(0.69240384975758873).epsilon(1e-10));
    CHECK(result.history.front().mean_margin == doctest::Approx(0.0014872696235111729).epsilon(1e-10));
    CHECK(result.history.back().mean_loss == doctest::Approx(0.56130158504154726).epsilon(1e-10));
    CHECK(result.history.back().mean_margin == doctest::Approx(0.28594771298974048).epsilon(1e-10));
    CHECK(history_fingerprint(result.history) == 0xbebebb2033c0ae1dULL);

    const ToyPolicy ref = problem.theta0;
    const auto stats = evaluate_dataset(result.policy, ref, problem.dataset, 0.1);
    for (double m : stats.margins) CHECK(m > 0.0);
    for (std::size_t s = 1; s < 50; ++s) CHECK(result.history[s].mean_margin > result.history[s - 1].mean_margin);
    CHECK(stats.mean_loss == doctest::Approx(result.history.back().mean_loss).epsilon(1e-14));
}

TEST_CASE("training is deterministic and the CSV is stable") {
    const auto problem = synthetic_problem(7);
    TrainConfig cfg;
    cfg.steps = 30;
    const auto a = history_csv(train(problem.theta0, problem.dataset, cfg).history);
    const auto b = history_csv(train(problem.theta0, problem.dataset, cfg).history);
    CHECK(a == b);
    CHECK(a.starts_with("step,mean_loss,mean_margin\n1,"));
    CHECK(testing::count_lines_in(a) == 31);
}

TEST_CASE("divergence is reported with the step") {
    const auto problem = synthetic_problem(7);
    TrainConfig cfg;
    cfg.beta = 1000.0;
    cfg.learning_rate = 1e308;
    cfg.steps = 5;
    try {
        (void)train(problem.theta0, problem.dataset, cfg);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.step() >= 1);
    }
}

TEST_CASE("text dataset from DPO triples") {
    std::vector<prefforge::data::DpoTriple> triples(3);
    triples[0] = {"a", "why sky /think", "<think>\nr\n</think>\n\nblue sky", "<think>\nr\n</think>\n\nred sky", {}};
    triples[1] = {"b", "why sea /think", "<think>\nr\n</think>\n\nblue", "<think>\nr\n</think>\n\ngreen", {}};
    triples[2] = {"c", "same /think", "x", "x", {}};
    const auto ds = build_text_dataset(triples);
    CHECK(ds.dropped == 1);
    REQUIRE(ds.instances.size() == 2);
    CHECK(ds.vocab.symbols().at(ds.vocab.size() - 2) == "<unk>");
    CHECK(ds.vocab.symbols().back() == "<eos>");
    CHECK(ds.instances[0].chosen.back() == ds.vocab.index("<eos>"));
    CHECK(ds.instances[0].rejected.back() == ds.vocab.index("<eos>"));
    for (const auto& inst : ds.instances) CHECK_NOTHROW(check_instance(inst, ds.vocab.size()));

    CHECK(split_whitespace("  a\tb\n c ") == std::vector<std::string>{"a", "b", "c"});
    CHECK(encode(ds.vocab, "sky unseen") == TokenSeq{ds.vocab.index("sky"), ds.vocab.index("<unk>")});

    const auto small = build_text_vocab(triples, 4);
    CHECK(small.size() == 4);
    CHECK(small.symbols().back() == "<eos>");
}

TEST_CASE("text vocab orders by frequency then symbol") {
    std::vector<prefforge::data::DpoTriple> triples(1);
    triples[0] = {"a", "b a /think", "c a", "b a", {}};
    const auto vocab = build_text_vocab(triples);
    // a: 3, b: 2, /think: 1, c: 1
    CHECK(vocab.symbols() == std::vector<std::string>{"a", "b", "/think", "c", "<unk>", "<eos>"});
}

}  // TEST_SUITE
