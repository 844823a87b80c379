#include "bknn/model.hpp"

#include <cmath>

#include "bknn/logsumexp.hpp"

namespace bknn::model {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

[[noreturn]] void throw_family_mismatch(const char* what) {
  throw ModelError(std::string("observation does not match model family: ") + what);
}

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string(name) + " must be strictly positive and finite");
  }
}

}  // namespace

int class_label(const Observation& x) {
  if (const int* c = std::get_if<int>(&x)) return *c;
  throw_family_mismatch("expected a class label, got a real value");
}

double real_value(const Observation& x) {
  if (const double* v = std::get_if<double>(&x)) return *v;
  throw_family_mismatch("expected a real value, got a class label");
}

int ModelParams::num_classes() const {
  switch (family) {
    case Family::BetaBernoulli:
      return 2;
    case Family::DirichletCategorical:
      return static_cast<int>(theta.size());
    case Family::NormalKnownVariance:
      return 0;
  }
  return 0;
}

ModelParams beta_prior(double alpha, double beta) {
  check_positive(alpha, "alpha");
  check_positive(beta, "beta");
  ModelParams p;
  p.family = Family::BetaBernoulli;
  p.theta = Eigen::Vector2d(alpha, beta);
  return p;
}

ModelParams dirichlet_prior(const Eigen::VectorXd& alphas) {
  if (alphas.size() < 2) {
    throw ConfigError("Dirichlet prior needs at least two classes");
  }
  for (Eigen::Index c = 0; c < alphas.size(); ++c) {
    check_positive(alphas(c), "Dirichlet pseudo-count");
  }
  ModelParams p;
  p.family = Family::DirichletCategorical;
  p.theta = alphas;
  return p;
}

ModelParams normal_prior(double mean, double mean_variance, double obs_variance) {
  if (!std::isfinite(mean)) throw ConfigError("prior mean must be finite");
  check_positive(mean_variance, "prior mean variance");
  check_positive(obs_variance, "observation variance");
  ModelParams p;
  p.family = Family::NormalKnownVariance;
  p.theta = Eigen::Vector2d(mean, mean_variance);
  p.obs_variance = obs_variance;
  return p;
}

void update_in_place(ModelParams& params, const Observation& x) {
  switch (params.family) {
    case Family::BetaBernoulli: {
      const int c = class_label(x);
      if (c != 0 && c != 1) throw ModelError("BetaBernoulli label must be 0 or 1");
      // alpha counts class 1.
      params.theta(c == 1 ? 0 : 1) += 1.0;
      return;
    }
    case Family::DirichletCategorical: {
      const int c = class_label(x);
      if (c < 0 || c >= params.theta.size()) {
        throw ModelError("class label outside the declared alphabet");
      }
      params.theta(c) += 1.0;
      return;
    }
    case Family::NormalKnownVariance: {
      const double v = real_value(x);
      const double prior_prec = 1.0 / params.theta(1);
      const double obs_prec = 1.0 / params.obs_variance;
      const double post_var = 1.0 / (prior_prec + obs_prec);
      params.theta(0) = post_var * (params.theta(0) * prior_prec + v * obs_prec);
      params.theta(1) = post_var;
      return;
    }
  }
}

ModelParams update(const ModelParams& params, const Observation& x) {
  ModelParams out = params;
  update_in_place(out, x);
  return out;
}

double log_predictive(const ModelParams& params, const Observation& x) {
  switch (params.family) {
    case Family::BetaBernoulli: {
      const int c = class_label(x);
      if (c != 0 && c != 1) throw ModelError("BetaBernoulli label must be 0 or 1");
      const double count = (c == 1) ? params.theta(0) : params.theta(1);
      return std::log(count) - std::log(params.theta(0) + params.theta(1));
    }
    case Family::DirichletCategorical: {
      const int c = class_label(x);
      if (c < 0 || c >= params.theta.size()) {
        throw ModelError("class label outside the declared alphabet");
      }
      return std::log(params.theta(c)) - std::log(params.theta.sum());
    }
    case Family::NormalKnownVariance: {
      const double v = real_value(x);
      const double pred_var = params.theta(1) + params.obs_variance;
      const double d = v - params.theta(0);
      return -0.5 * (kLog2Pi + std::log(pred_var) + d * d / pred_var);
    }
  }
  return kNegInf;
}

Eigen::VectorXd predictive_classes(const ModelParams& params) {
  switch (params.family) {
    case Family::BetaBernoulli: {
      const double total = params.theta(0) + params.theta(1);
      return Eigen::Vector2d(params.theta(1) / total, params.theta(0) / total);
    }
    case Family::DirichletCategorical:
      return params.theta / params.theta.sum();
    case Family::NormalKnownVariance:
      throw ModelError("predictive_classes is undefined for a continuous family");
  }
  return {};
}

double predictive_mean(const ModelParams& params) {
  if (params.family != Family::NormalKnownVariance) {
    throw ModelError("predictive_mean needs the NormalKnownVariance family");
  }
  return params.theta(0);
}

double predictive_variance(const ModelParams& params) {
  if (params.family != Family::NormalKnownVariance) {
    throw ModelError("predictive_variance needs the NormalKnownVariance family");
  }
  return params.theta(1) + params.obs_variance;
}

double log_evidence(const ModelParams& prior, std::span<const Observation> xs) {
  ModelParams running = prior;
  double total = 0.0;
  for (const Observation& x : xs) {
    total += log_predictive(running, x);
    update_in_place(running, x);
  }
  return total;
}

}  // namespace bknn::model
