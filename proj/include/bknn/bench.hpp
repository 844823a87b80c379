#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bknn/data.hpp"
#include "bknn/engine.hpp"
#include "bknn/model.hpp"
#include "bknn/neighbors.hpp"
#include "bknn/predictor.hpp"

namespace bknn::bench {

// Everything one query evaluation needs besides the data.
struct QueryOptions {
  model::ModelParams prior;
  double p_gamma = 0.05;
  double epsilon = 1e-4;  // truncation tail threshold
  bool truncate = false;
  neighbors::Metric metric = neighbors::Metric::euclidean();
  bool standardize = false;
  engine::ChangePredictive change_predictive = engine::kDefaultChangePredictive;
  bool map_k = false;

  engine::Mode mode_for(int train_size) const;
};

struct QueryResult {
  predictor::Prediction prediction;  // honours QueryOptions::map_k
  int map_class = -1;                // MAP-k decision, always filled
  double map_estimate = 0.0;
  int outlier_argmax_k = 0;          // valid when a truth was supplied
  bool has_outlier = false;
  double query_ms = 0.0;  // ordering + recursion + prediction
};

// Evaluates one query point against the training set (already transformed
// if standardization is in effect).
QueryResult evaluate_query(const Eigen::VectorXd& query,
                           const std::optional<model::Observation>& truth,
                           const data::Dataset& train, const QueryOptions& options);

// Parallel map over the test set; results come back in input order and do
// not depend on the thread count. Standardization, when enabled, is fit on
// the training split only and applied to both sides here.
std::vector<QueryResult> evaluate_all(const data::Dataset& train, const data::Dataset& test,
                                      const QueryOptions& options, int threads = 1);

struct BenchmarkSummary {
  double metric_full = 0.0;   // posterior-weighted prediction
  double metric_map_k = 0.0;  // single most probable k
  double mean_query_ms = 0.0;
  int n_test = 0;
};

BenchmarkSummary summarize(const data::Dataset& test,
                           const std::vector<QueryResult>& results);

// Grid search over hyperparameters, scored on an internal split of the
// training data only. Returns the options with the best validation metric.
struct TuneReport {
  QueryOptions options;
  double validation_metric = 0.0;
  std::uint64_t inner_seed = 0;
};

TuneReport tune_classification(const data::Dataset& train, QueryOptions base,
                               std::uint64_t seed, int threads = 1);
TuneReport tune_regression(const data::Dataset& train, QueryOptions base,
                           std::uint64_t seed, int threads = 1);

struct OutlierRow {
  int test_row = 0;
  double absolute_error = 0.0;
  double max_predictive = 0.0;
  int argmax_k = 0;
};

// Error-versus-confidence table: per sampled test point, the regression
// absolute error against the max-over-k predictive density of the realized
// response.
std::vector<OutlierRow> outlier_table(const data::Dataset& train, const data::Dataset& test,
                                      const QueryOptions& options, int n_samples,
                                      std::uint64_t seed, int threads = 1);

}  // namespace bknn::bench
