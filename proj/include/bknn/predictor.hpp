#pragma once

#include <Eigen/Core>
#include <limits>

#include "bknn/engine.hpp"
#include "bknn/model.hpp"
#include "bknn/neighbors.hpp"

namespace bknn::predictor {

// Posterior-weighted prediction for one query point. Classification fills
// class_probs/predicted_class; regression fills estimate/predictive_variance.
struct Prediction {
  Eigen::VectorXd class_probs;
  int predicted_class = -1;  // argmax, ties toward the lower class index
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double predictive_variance = std::numeric_limits<double>::quiet_NaN();
  engine::KPosterior k_posterior;
  int map_k = 0;
  // max-over-k predictive of the observed response; filled by evaluation
  // harnesses when the true response is available
  double outlier_score = std::numeric_limits<double>::quiet_NaN();
};

// class_probs[c] = sum_k p(k) * predictive(c | prior absorbed the k nearest
// responses); the k = 0 term is the untouched prior's predictive. With
// map_k_only the single most probable k is used instead of the mixture.
Prediction predict_class(const neighbors::OrderedNeighbors& ordered,
                         const engine::KPosterior& kpost, const model::ModelParams& prior,
                         bool map_k_only = false);

// estimate = sum_k p(k) * posterior_mean_k; the predictive variance is the
// mixture variance of the per-k predictive normals.
Prediction predict_regression(const neighbors::OrderedNeighbors& ordered,
                              const engine::KPosterior& kpost,
                              const model::ModelParams& prior, bool map_k_only = false);

// Maximum over k = 0..n of the predictive probability/density of the
// observed response, and the k attaining it (smallest on ties). A response
// that fits no neighbourhood peaks at k = 0, the widest distribution.
struct OutlierProfile {
  double max_predictive = 0.0;  // linear scale
  int argmax_k = 0;
};

OutlierProfile outlier_profile(const neighbors::OrderedNeighbors& ordered,
                               const model::Observation& true_response,
                               const model::ModelParams& prior);

double outlier_score(const neighbors::OrderedNeighbors& ordered,
                     const model::Observation& true_response,
                     const model::ModelParams& prior);

}  // namespace bknn::predictor
