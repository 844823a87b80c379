#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "bknn/model.hpp"

using namespace bknn;
using model::Observation;

namespace {

// Closed-form Beta-Binomial marginal: independent check for log_evidence.
double beta_binomial_log_marginal(double alpha, double beta, int heads, int tails) {
  auto log_beta_fn = [](double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  };
  return log_beta_fn(alpha + heads, beta + tails) - log_beta_fn(alpha, beta);
}

}  // namespace

TEST_CASE("beta prior carries its hyperparameters unchanged") {
  const auto p = model::beta_prior(10.0, 10.0);
  CHECK(p.family == model::Family::BetaBernoulli);
  CHECK(p.theta(0) == 10.0);
  CHECK(p.theta(1) == 10.0);

  const auto even = model::beta_prior(50.0, 50.0);
  CHECK(model::predictive_classes(even)(1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("invalid hyperparameters are rejected") {
  CHECK_THROWS_AS(model::beta_prior(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(model::beta_prior(1.0, -2.0), ConfigError);
  CHECK_THROWS_AS(model::dirichlet_prior(Eigen::Vector3d(1.0, 0.0, 1.0)), ConfigError);
  CHECK_THROWS_AS(model::normal_prior(0.0, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(model::normal_prior(0.0, 1.0, 0.0), ConfigError);
}

TEST_CASE("coin-toss update: Beta(50,50) absorbs tails") {
  auto p = model::beta_prior(50.0, 50.0);
  const auto updated = model::update(p, Observation{0});  // class 0 = tails
  CHECK(updated.theta(0) == 50.0);
  CHECK(updated.theta(1) == 51.0);
  // original untouched
  CHECK(p.theta(1) == 50.0);
  // posterior predictive of heads = 50/101 = 0.49505
  CHECK(std::exp(model::log_predictive(updated, Observation{1})) ==
        doctest::Approx(50.0 / 101.0).epsilon(1e-15));
  CHECK(model::log_predictive(updated, Observation{1}) ==
        doctest::Approx(std::log(0.495049504950495)).epsilon(1e-12));
}

TEST_CASE("five same-class observations move the posterior mean to 0.6") {
  auto p = model::beta_prior(10.0, 10.0);
  for (int i = 0; i < 5; ++i) model::update_in_place(p, Observation{1});
  CHECK(p.theta(0) == 15.0);
  CHECK(p.theta(1) == 10.0);
  CHECK(std::exp(model::log_predictive(p, Observation{1})) ==
        doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("symmetric Dirichlet gives uniform predictives") {
  const auto p = model::dirichlet_prior(Eigen::Vector3d(1.0, 1.0, 1.0));
  for (int c = 0; c < 3; ++c) {
    CHECK(model::log_predictive(p, Observation{c}) ==
          doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-15));
  }
}

TEST_CASE("normal update with known variance") {
  auto p = model::normal_prior(0.0, 1.0, 1.0);
  model::update_in_place(p, Observation{2.0});
  CHECK(p.theta(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.theta(1) == doctest::Approx(0.5).epsilon(1e-15));

  // predictive of N(1, 0.5 + 1) at its own mean
  const auto q = model::normal_prior(1.0, 0.5, 1.0);
  const double expected = -0.5 * std::log(2.0 * M_PI * 1.5);
  CHECK(model::log_predictive(q, Observation{1.0}) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("family/observation mismatch throws") {
  const auto beta = model::beta_prior(1.0, 1.0);
  CHECK_THROWS_AS(model::log_predictive(beta, Observation{0.5}), ModelError);
  CHECK_THROWS_AS(model::update(beta, Observation{3}), ModelError);

  const auto normal = model::normal_prior(0.0, 1.0, 1.0);
  CHECK_THROWS_AS(model::log_predictive(normal, Observation{1}), ModelError);

  const auto dir = model::dirichlet_prior(Eigen::Vector3d(1.0, 1.0, 1.0));
  CHECK_THROWS_AS(model::update(dir, Observation{3}), ModelError);
}

TEST_CASE("log_evidence basics") {
  const auto p = model::beta_prior(1.0, 1.0);
  CHECK(model::log_evidence(p, {}) == 0.0);

  const std::vector<Observation> one_head{Observation{1}};
  CHECK(model::log_evidence(p, one_head) == doctest::Approx(std::log(0.5)).epsilon(1e-15));

  const std::vector<Observation> head_tail{Observation{1}, Observation{0}};
  CHECK(model::log_evidence(p, head_tail) ==
        doctest::Approx(std::log(0.5) + std::log(1.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("log_evidence matches the closed-form Beta-Binomial marginal") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const double alpha = 0.5 + (rng() % 40) * 0.25;
    const double beta = 0.5 + (rng() % 40) * 0.25;
    const int n = 1 + static_cast<int>(rng() % 10);
    std::vector<Observation> xs;
    int heads = 0;
    for (int i = 0; i < n; ++i) {
      const int c = static_cast<int>(rng() % 2);
      heads += c;
      xs.emplace_back(c);
    }
    const auto prior = model::beta_prior(alpha, beta);
    CHECK(model::log_evidence(prior, xs) ==
          doctest::Approx(beta_binomial_log_marginal(alpha, beta, heads, n - heads))
              .epsilon(1e-12));
  }
}

TEST_CASE("log_evidence is exchangeable") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 9);
    std::vector<Observation> xs;
    for (int i = 0; i < n; ++i) xs.emplace_back(static_cast<int>(rng() % 3));
    const auto prior = model::dirichlet_prior(Eigen::Vector3d(0.7, 1.3, 2.0));
    const double reference = model::log_evidence(prior, xs);

    std::vector<Observation> shuffled = xs;
    for (size_t i = shuffled.size() - 1; i > 0; --i) {
      std::swap(shuffled[i], shuffled[rng() % (i + 1)]);
    }
    CHECK(model::log_evidence(prior, shuffled) == doctest::Approx(reference).epsilon(1e-12));
  }

  // continuous family too
  std::vector<Observation> ys{Observation{0.3}, Observation{-1.2}, Observation{2.4},
                              Observation{0.0}, Observation{1.1}};
  const auto prior = model::normal_prior(0.0, 2.0, 1.5);
  const double ref = model::log_evidence(prior, ys);
  std::reverse(ys.begin(), ys.end());
  CHECK(model::log_evidence(prior, ys) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("sequential factorization: evidence = sum of predictives along the chain") {
  std::mt19937 rng(11);
  const auto prior = model::beta_prior(3.0, 2.0);
  std::vector<Observation> xs;
  for (int i = 0; i < 8; ++i) xs.emplace_back(static_cast<int>(rng() % 2));

  double chained = 0.0;
  auto running = prior;
  for (const auto& x : xs) {
    chained += model::log_predictive(running, x);
    running = model::update(running, x);
  }
  CHECK(chained == doctest::Approx(model::log_evidence(prior, xs)).epsilon(1e-12));
}

TEST_CASE("predictive mass functions sum to one on reachable params") {
  std::mt19937 rng(3);
  auto beta = model::beta_prior(2.5, 7.0);
  auto dir = model::dirichlet_prior(Eigen::Vector4d(0.5, 1.0, 2.0, 3.5));
  for (int step = 0; step < 50; ++step) {
    CHECK(model::predictive_classes(beta).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(model::predictive_classes(dir).sum() == doctest::Approx(1.0).epsilon(1e-12));
    model::update_in_place(beta, Observation{static_cast<int>(rng() % 2)});
    model::update_in_place(dir, Observation{static_cast<int>(rng() % 4)});
  }
}

TEST_CASE("normal predictive density integrates to one") {
  const auto p = model::normal_prior(0.8, 0.7, 1.9);
  const double sd = std::sqrt(model::predictive_variance(p));
  const double lo = model::predictive_mean(p) - 10.0 * sd;
  const double hi = model::predictive_mean(p) + 10.0 * sd;
  const int n = 20000;  // Simpson's rule needs an even interval count
  const double h = (hi - lo) / n;
  double integral = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double f = std::exp(model::log_predictive(p, Observation{x}));
    const double w = (i == 0 || i == n) ? 1.0 : ((i % 2 == 1) ? 4.0 : 2.0);
    integral += w * f;
  }
  integral *= h / 3.0;
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("updates are deterministic bit for bit") {
  const auto run = [] {
    auto p = model::normal_prior(0.25, 1.75, 0.6);
    for (int i = 0; i < 40; ++i) {
      model::update_in_place(p, Observation{std::sin(0.37 * i)});
    }
    return std::pair{p.theta(0), p.theta(1)};
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}
