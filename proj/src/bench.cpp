#include "bknn/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "bknn/errors.hpp"
#include "bknn/verify.hpp"

namespace bknn::bench {

engine::Mode QueryOptions::mode_for(int train_size) const {
  if (!truncate) return engine::Mode::full();
  const int m = neighbors::truncation_index(p_gamma, epsilon, train_size);
  return (m < train_size) ? engine::Mode::truncated(m) : engine::Mode::full();
}

QueryResult evaluate_query(const Eigen::VectorXd& query,
                           const std::optional<model::Observation>& truth,
                           const data::Dataset& train, const QueryOptions& options) {
  QueryResult out;
  const auto t0 = std::chrono::steady_clock::now();

  const auto ordered =
      neighbors::order_by_distance(query, train.features, train.responses, options.metric);
  const auto hazard = engine::Hazard::constant(options.p_gamma);
  const auto kpost = engine::run(ordered, options.prior, hazard,
                                 options.mode_for(ordered.size()),
                                 options.change_predictive);

  // Truncated runs see only the m nearest points; prediction walks the same
  // truncated neighbourhood so posterior support and neighbour count agree.
  neighbors::OrderedNeighbors view = ordered;
  const int fed = kpost.support() - 1;
  if (fed < ordered.size()) {
    view.distances = ordered.distances.tail(fed).eval();
    view.responses.assign(ordered.responses.end() - fed, ordered.responses.end());
    view.source_rows.assign(ordered.source_rows.end() - fed, ordered.source_rows.end());
  }

  if (train.response_kind == data::ResponseKind::ClassLabel) {
    out.prediction = predictor::predict_class(view, kpost, options.prior, options.map_k);
    out.map_class = options.map_k
                        ? out.prediction.predicted_class
                        : predictor::predict_class(view, kpost, options.prior, true).predicted_class;
  } else {
    out.prediction = predictor::predict_regression(view, kpost, options.prior, options.map_k);
    out.map_estimate = options.map_k
                           ? out.prediction.estimate
                           : predictor::predict_regression(view, kpost, options.prior, true).estimate;
  }

  const auto t1 = std::chrono::steady_clock::now();
  out.query_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  if (truth) {
    const auto profile = predictor::outlier_profile(view, *truth, options.prior);
    out.prediction.outlier_score = profile.max_predictive;
    out.outlier_argmax_k = profile.argmax_k;
    out.has_outlier = true;
  }
  return out;
}

std::vector<QueryResult> evaluate_all(const data::Dataset& train, const data::Dataset& test,
                                      const QueryOptions& options, int threads) {
  if (train.dim() != test.dim()) throw DataError("train/test feature dimensions differ");

  data::Dataset train_view = train;
  data::Dataset test_view = test;
  if (options.standardize) {
    const auto transform = data::standardize_fit(train);
    train_view = data::transformed(transform, train);
    test_view = data::transformed(transform, test);
  }

  const int n = test_view.rows();
  std::vector<QueryResult> results(static_cast<size_t>(n));
  const int n_workers = std::max(1, std::min(threads, n));

  auto work = [&](std::atomic<int>& cursor) {
    for (int i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1)) {
      results[static_cast<size_t>(i)] = evaluate_query(
          test_view.features.row(i).transpose(),
          std::optional<model::Observation>(test_view.responses[static_cast<size_t>(i)]),
          train_view, options);
    }
  };

  if (n_workers == 1) {
    std::atomic<int> cursor{0};
    work(cursor);
  } else {
    std::atomic<int> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back([&] { work(cursor); });
    for (auto& t : pool) t.join();
  }
  return results;
}

BenchmarkSummary summarize(const data::Dataset& test,
                           const std::vector<QueryResult>& results) {
  BenchmarkSummary out;
  out.n_test = static_cast<int>(results.size());
  double ms = 0.0;
  if (test.response_kind == data::ResponseKind::ClassLabel) {
    std::vector<int> full, map_k, truth;
    for (size_t i = 0; i < results.size(); ++i) {
      full.push_back(results[i].prediction.predicted_class);
      map_k.push_back(results[i].map_class);
      truth.push_back(model::class_label(test.responses[i]));
      ms += results[i].query_ms;
    }
    out.metric_full = verify::misclassification_rate(full, truth);
    out.metric_map_k = verify::misclassification_rate(map_k, truth);
  } else {
    std::vector<double> full, map_k, truth;
    for (size_t i = 0; i < results.size(); ++i) {
      full.push_back(results[i].prediction.estimate);
      map_k.push_back(results[i].map_estimate);
      truth.push_back(model::real_value(test.responses[i]));
      ms += results[i].query_ms;
    }
    out.metric_full = verify::mean_absolute_error(full, truth);
    out.metric_map_k = verify::mean_absolute_error(map_k, truth);
  }
  out.mean_query_ms = results.empty() ? 0.0 : ms / static_cast<double>(results.size());
  return out;
}

namespace {

double run_benchmark_metric(const data::Dataset& train, const data::Dataset& test,
                            const QueryOptions& options, int threads) {
  const auto results = evaluate_all(train, test, options, threads);
  return summarize(test, results).metric_full;
}

}  // namespace

namespace {

// Deterministic fold assignment from the split machinery: fold f holds out
// every row where a seeded shuffle position lands on f.
std::vector<std::pair<data::Dataset, data::Dataset>> make_folds(const data::Dataset& train,
                                                                int n_folds,
                                                                std::uint64_t seed) {
  std::vector<std::pair<data::Dataset, data::Dataset>> folds;
  const int n = train.rows();
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::uint64_t state = seed;
  auto next_u64 = [&state]() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  for (int i = n - 1; i > 0; --i) {
    std::swap(order[static_cast<size_t>(i)],
              order[static_cast<size_t>(next_u64() % (static_cast<std::uint64_t>(i) + 1))]);
  }
  for (int f = 0; f < n_folds; ++f) {
    std::vector<int> fit_rows, val_rows;
    for (int i = 0; i < n; ++i) {
      (i % n_folds == f ? val_rows : fit_rows).push_back(order[static_cast<size_t>(i)]);
    }
    std::sort(fit_rows.begin(), fit_rows.end());
    std::sort(val_rows.begin(), val_rows.end());
    folds.emplace_back(data::take_rows(train, fit_rows), data::take_rows(train, val_rows));
  }
  return folds;
}

}  // namespace

TuneReport tune_classification(const data::Dataset& train, QueryOptions base,
                               std::uint64_t seed, int threads) {
  if (train.rows() < 8) throw ConfigError("too few training rows to tune on");
  const auto folds = make_folds(train, 4, seed);
  TuneReport best;
  best.inner_seed = seed;
  best.validation_metric = std::numeric_limits<double>::infinity();

  const double pseudo_counts[] = {1.0, 2.0, 5.0, 10.0, 20.0};
  const double gammas[] = {0.02, 0.05, 0.1, 0.2};
  const int n_classes = std::max(train.num_classes(), 2);

  for (double c : pseudo_counts) {
    for (double g : gammas) {
      QueryOptions candidate = base;
      candidate.p_gamma = g;
      if (n_classes == 2) {
        candidate.prior = model::beta_prior(c, c);
      } else {
        candidate.prior = model::dirichlet_prior(
            Eigen::VectorXd::Constant(n_classes, c));
      }
      double metric = 0.0;
      for (const auto& [fit, val] : folds) {
        metric += run_benchmark_metric(fit, val, candidate, threads);
      }
      metric /= static_cast<double>(folds.size());
      if (metric < best.validation_metric) {
        best.validation_metric = metric;
        best.options = candidate;
      }
    }
  }
  return best;
}

TuneReport tune_regression(const data::Dataset& train, QueryOptions base,
                           std::uint64_t seed, int threads) {
  if (train.rows() < 8) throw ConfigError("too few training rows to tune on");
  const auto [inner_train, inner_val] = data::split_train_test(train, 0.25, seed);
  TuneReport best;
  best.inner_seed = seed;
  best.validation_metric = std::numeric_limits<double>::infinity();

  const double mu0 = inner_train.response_mean();
  const double var = inner_train.response_variance();

  const double var_scales[] = {0.01, 0.05, 0.2};
  const double gammas[] = {0.01, 0.02, 0.05};

  for (double s : var_scales) {
    for (double g : gammas) {
      QueryOptions candidate = base;
      candidate.p_gamma = g;
      candidate.prior = model::normal_prior(mu0, var, var * s);
      const double metric = run_benchmark_metric(inner_train, inner_val, candidate, threads);
      if (metric < best.validation_metric) {
        best.validation_metric = metric;
        best.options = candidate;
      }
    }
  }
  return best;
}

std::vector<OutlierRow> outlier_table(const data::Dataset& train, const data::Dataset& test,
                                      const QueryOptions& options, int n_samples,
                                      std::uint64_t seed, int threads) {
  if (test.response_kind != data::ResponseKind::Real) {
    throw DataError("outlier table needs a regression dataset with truths");
  }
  // Seeded sample of test rows (splitmix64-driven, platform stable).
  std::vector<int> rows(static_cast<size_t>(test.rows()));
  for (size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  std::uint64_t state = seed;
  auto next_u64 = [&state]() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  const int take = std::min<int>(n_samples, test.rows());
  for (int i = 0; i < take; ++i) {
    const int j = i + static_cast<int>(next_u64() % static_cast<std::uint64_t>(rows.size() - static_cast<size_t>(i)));
    std::swap(rows[static_cast<size_t>(i)], rows[static_cast<size_t>(j)]);
  }
  rows.resize(static_cast<size_t>(take));

  const data::Dataset sampled = data::take_rows(test, rows);
  const auto results = evaluate_all(train, sampled, options, threads);

  std::vector<OutlierRow> table(static_cast<size_t>(take));
  for (int i = 0; i < take; ++i) {
    const auto& r = results[static_cast<size_t>(i)];
    OutlierRow row;
    row.test_row = rows[static_cast<size_t>(i)];
    row.absolute_error = std::abs(r.prediction.estimate -
                                  model::real_value(sampled.responses[static_cast<size_t>(i)]));
    row.max_predictive = r.prediction.outlier_score;
    row.argmax_k = r.outlier_argmax_k;
    table[static_cast<size_t>(i)] = row;
  }
  return table;
}

}  // namespace bknn::bench
