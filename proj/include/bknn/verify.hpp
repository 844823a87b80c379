#pragma once

#include <span>
#include <vector>

#include "bknn/data.hpp"
#include "bknn/engine.hpp"
#include "bknn/model.hpp"
#include "bknn/neighbors.hpp"

namespace bknn::verify {

// Exact posterior over the neighbour count by exhaustive enumeration of
// change-point placements: every subset of the n gaps (including the one
// between the nearest point and the target, which carries the k = 0
// hypothesis) is weighted by the marginal evidence of its segments times
// the hazard factors. Shares no aggregation machinery with the engine.
//
// The convention flag mirrors the engine's: PerRun scores each segment by
// its full marginal evidence (the product-partition model); FreshPrior
// scores the first point of every post-change segment under the untouched
// prior without absorbing it, which is what the fresh-prior recursion
// computes. Refuses n > 20 (cost 2^n).
engine::KPosterior exact_k_posterior(
    std::span<const model::Observation> xs, const model::ModelParams& prior,
    double p_gamma,
    engine::ChangePredictive cp = engine::kDefaultChangePredictive);

// Classic fixed-k nearest neighbour over a k range: majority vote for
// classification (ties toward the lower class id), mean for regression.
// metric_by_k[i] is the test metric for k = k_min + i.
struct BaselineResult {
  int k_min = 1;
  std::vector<double> metric_by_k;
  int best_k = 1;
  double best_metric = 0.0;
};

BaselineResult knn_baseline(const data::Dataset& train, const data::Dataset& test,
                            int k_min, int k_max,
                            const neighbors::Metric& metric = neighbors::Metric::euclidean());

double misclassification_rate(std::span<const int> predicted, std::span<const int> truth);
double mean_absolute_error(std::span<const double> predicted, std::span<const double> truth);

// Spearman rank correlation with average ranks for ties.
double spearman_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace bknn::verify
