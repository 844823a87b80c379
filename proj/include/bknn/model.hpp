#pragma once

#include <Eigen/Core>
#include <span>
#include <variant>

#include "bknn/errors.hpp"

namespace bknn::model {

enum class Family { BetaBernoulli, DirichletCategorical, NormalKnownVariance };

// One response value: a class label for the discrete families, a real
// value for the continuous one.
using Observation = std::variant<int, double>;

int class_label(const Observation& x);
double real_value(const Observation& x);

// Conjugate parameters of one observation model. Values are immutable in
// spirit: every operation below is a pure function over them, so sharing
// read-only across threads is safe.
//
// theta layout by family:
//   BetaBernoulli:        (alpha, beta); alpha counts class 1, beta class 0
//   DirichletCategorical: (alpha_0, ..., alpha_{C-1})
//   NormalKnownVariance:  (mean, mean_variance); obs_variance kept beside
struct ModelParams {
  Family family = Family::BetaBernoulli;
  Eigen::VectorXd theta;
  double obs_variance = 0.0;  // NormalKnownVariance only

  int num_classes() const;
};

// Prior constructors. Each validates its hyperparameters and throws
// ConfigError on non-positive pseudo-counts or variances.
ModelParams beta_prior(double alpha, double beta);
ModelParams dirichlet_prior(const Eigen::VectorXd& alphas);
ModelParams normal_prior(double mean, double mean_variance, double obs_variance);

// Conjugate posterior update with a single observation. The input is left
// untouched.
ModelParams update(const ModelParams& params, const Observation& x);
void update_in_place(ModelParams& params, const Observation& x);

// Log posterior-predictive mass (discrete) or density (continuous) of x.
double log_predictive(const ModelParams& params, const Observation& x);

// Posterior-predictive distribution over the whole class alphabet.
// Discrete families only.
Eigen::VectorXd predictive_classes(const ModelParams& params);

// Predictive moments, NormalKnownVariance only. The predictive mean equals
// the posterior mean of the unknown mean; the predictive variance is
// mean_variance + obs_variance.
double predictive_mean(const ModelParams& params);
double predictive_variance(const ModelParams& params);

// Log marginal likelihood of a sequence under the prior, computed as the
// chain of sequential predictives. Empty sequence gives 0.
double log_evidence(const ModelParams& prior, std::span<const Observation> xs);

}  // namespace bknn::model
