#include "bknn/predictor.hpp"

#include <cmath>

#include "bknn/errors.hpp"

namespace bknn::predictor {

namespace {

void check_support(const neighbors::OrderedNeighbors& ordered,
                   const engine::KPosterior& kpost) {
  if (kpost.support() != ordered.size() + 1) {
    throw ConfigError("posterior support (" + std::to_string(kpost.support()) +
                      ") does not match neighbour count + 1 (" +
                      std::to_string(ordered.size() + 1) + ")");
  }
}

}  // namespace

Prediction predict_class(const neighbors::OrderedNeighbors& ordered,
                         const engine::KPosterior& kpost, const model::ModelParams& prior,
                         bool map_k_only) {
  check_support(ordered, kpost);
  const int n_classes = prior.num_classes();
  if (n_classes < 2) throw ConfigError("predict_class needs a discrete model family");

  Prediction out;
  out.k_posterior = kpost;
  out.map_k = kpost.argmax();

  Eigen::VectorXd probs = Eigen::VectorXd::Zero(n_classes);
  model::ModelParams params = prior;  // conditioned on the k nearest as k grows
  for (int k = 0; k <= ordered.size(); ++k) {
    if (k > 0) model::update_in_place(params, ordered.nearest(k));
    if (map_k_only) {
      if (k == out.map_k) {
        probs = model::predictive_classes(params);
        break;
      }
    } else {
      probs += kpost.probs(k) * model::predictive_classes(params);
    }
  }

  out.class_probs = probs;
  Eigen::Index best = 0;
  probs.maxCoeff(&best);
  out.predicted_class = static_cast<int>(best);
  return out;
}

Prediction predict_regression(const neighbors::OrderedNeighbors& ordered,
                              const engine::KPosterior& kpost,
                              const model::ModelParams& prior, bool map_k_only) {
  check_support(ordered, kpost);
  if (prior.family != model::Family::NormalKnownVariance) {
    throw ConfigError("predict_regression needs the NormalKnownVariance family");
  }

  Prediction out;
  out.k_posterior = kpost;
  out.map_k = kpost.argmax();

  double estimate = 0.0;
  double second_moment = 0.0;
  model::ModelParams params = prior;
  for (int k = 0; k <= ordered.size(); ++k) {
    if (k > 0) model::update_in_place(params, ordered.nearest(k));
    const double mean_k = model::predictive_mean(params);
    const double var_k = model::predictive_variance(params);
    if (map_k_only) {
      if (k == out.map_k) {
        estimate = mean_k;
        second_moment = mean_k * mean_k + var_k;
        break;
      }
    } else {
      const double w = kpost.probs(k);
      estimate += w * mean_k;
      second_moment += w * (mean_k * mean_k + var_k);
    }
  }

  out.estimate = estimate;
  out.predictive_variance = second_moment - estimate * estimate;
  return out;
}

OutlierProfile outlier_profile(const neighbors::OrderedNeighbors& ordered,
                               const model::Observation& true_response,
                               const model::ModelParams& prior) {
  OutlierProfile out;
  double best_log = -std::numeric_limits<double>::infinity();
  model::ModelParams params = prior;
  for (int k = 0; k <= ordered.size(); ++k) {
    if (k > 0) model::update_in_place(params, ordered.nearest(k));
    const double lp = model::log_predictive(params, true_response);
    if (lp > best_log) {
      best_log = lp;
      out.argmax_k = k;
    }
  }
  out.max_predictive = std::exp(best_log);
  return out;
}

double outlier_score(const neighbors::OrderedNeighbors& ordered,
                     const model::Observation& true_response,
                     const model::ModelParams& prior) {
  return outlier_profile(ordered, true_response, prior).max_predictive;
}

}  // namespace bknn::predictor
