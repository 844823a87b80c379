// Command-line front end: posterior inspection, prediction, benchmarking,
// probability-grid export and outlier analysis over CSV datasets.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bknn/bench.hpp"
#include "bknn/data.hpp"
#include "bknn/engine.hpp"
#include "bknn/errors.hpp"
#include "bknn/model.hpp"
#include "bknn/neighbors.hpp"
#include "bknn/predictor.hpp"
#include "bknn/verify.hpp"
#include "bknn/version.hpp"

using nlohmann::json;
using namespace bknn;

namespace {

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct CommonOptions {
  std::string train_path;
  std::string test_path;
  std::vector<int> feature_cols;
  int response_col = -1;
  std::string response_kind;  // "", "class", "real"
  std::string delimiter = ",";
  bool no_header = false;

  double alpha = 1.0;
  double beta = 1.0;
  std::vector<double> dirichlet_alpha;
  double mu0 = 0.0;
  double sigma0_sq = 0.0;
  double sigma_sq = 0.0;
  bool mu0_set = false, sigma0_set = false, sigma_set = false;

  double p_gamma = 0.05;
  double epsilon = 1e-4;
  int truncate = -1;  // -1 auto, 0 off, 1 on
  std::string metric = "euclidean";
  int standardize = -1;  // -1 auto (regression on / classification off)
  std::string change_predictive = "per-run";
  bool map_k = false;

  std::string format = "csv";
  std::string output_path;
  int threads = 0;
  std::uint64_t seed = 12345;
  double test_fraction = 0.2;
};

void add_common_options(CLI::App* cmd, CommonOptions& opt, bool needs_test) {
  cmd->add_option("--train", opt.train_path, "training CSV file")->required();
  auto* test = cmd->add_option("--test", opt.test_path, "test CSV file");
  if (needs_test) {
    test->description("test CSV file (omit to carve one out with --test-fraction/--seed)");
  }
  cmd->add_option("--feature-cols", opt.feature_cols,
                  "feature column indices (default: all but the response)");
  cmd->add_option("--response-col", opt.response_col, "response column (default: last)");
  cmd->add_option("--response-kind", opt.response_kind, "class|real (default: inferred)")
      ->check(CLI::IsMember({"class", "real"}));
  cmd->add_option("--delimiter", opt.delimiter, "field delimiter (default ,)");
  cmd->add_flag("--no-header", opt.no_header, "file has no header row");

  cmd->add_option("--alpha", opt.alpha, "Beta prior pseudo-count for class 1");
  cmd->add_option("--beta", opt.beta, "Beta prior pseudo-count for class 0");
  cmd->add_option("--dirichlet-alpha", opt.dirichlet_alpha,
                  "Dirichlet pseudo-counts, one per class");
  cmd->add_option("--mu0", opt.mu0, "Normal prior mean (default: training mean)")
      ->each([&opt](const std::string&) { opt.mu0_set = true; });
  cmd->add_option("--sigma0-sq", opt.sigma0_sq,
                  "Normal prior mean-variance (default: training variance)")
      ->each([&opt](const std::string&) { opt.sigma0_set = true; });
  cmd->add_option("--sigma-sq", opt.sigma_sq,
                  "known observation variance (default: training variance)")
      ->each([&opt](const std::string&) { opt.sigma_set = true; });

  const auto open_unit = CLI::Validator(
      [](std::string& s) -> std::string {
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || !(v > 0.0 && v < 1.0)) {
          return "value must lie in the open interval (0, 1)";
        }
        return {};
      },
      "(0,1)");
  cmd->add_option("--p-gamma", opt.p_gamma, "change-point probability per gap")
      ->check(open_unit);
  cmd->add_option("--epsilon", opt.epsilon, "truncation tail threshold")->check(open_unit);
  cmd->add_flag(
      "--truncate,!--no-truncate",
      [&opt](std::int64_t count) { opt.truncate = count > 0 ? 1 : 0; },
      "process only the m nearest points (default: on above 500 training rows)");
  cmd->add_option("--metric", opt.metric, "euclidean|manhattan")
      ->check(CLI::IsMember({"euclidean", "manhattan"}));
  cmd->add_flag(
      "--standardize,!--no-standardize",
      [&opt](std::int64_t count) { opt.standardize = count > 0 ? 1 : 0; },
      "standardize features on training statistics (default: regression on)");
  cmd->add_option("--change-predictive", opt.change_predictive,
                  "per-run|fresh-prior change-point predictive")
      ->check(CLI::IsMember({"per-run", "fresh-prior"}));
  cmd->add_flag("--map-k", opt.map_k, "predict from the single most probable k");

  cmd->add_option("--format", opt.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--output", opt.output_path, "output file (default: stdout)");
  cmd->add_option("--threads", opt.threads, "worker threads (default: hardware)");
  cmd->add_option("--seed", opt.seed, "seed for splits and sampling");
  cmd->add_option("--test-fraction", opt.test_fraction, "held-out fraction when splitting")
      ->check(open_unit);
}

data::Schema make_schema(const CommonOptions& opt) {
  data::Schema schema;
  schema.feature_cols = opt.feature_cols;
  schema.response_col = opt.response_col;
  if (opt.response_kind == "class") schema.response_kind = data::ResponseKind::ClassLabel;
  if (opt.response_kind == "real") schema.response_kind = data::ResponseKind::Real;
  if (opt.delimiter.size() != 1) throw ConfigError("delimiter must be one character");
  schema.delimiter = opt.delimiter[0];
  schema.has_header = !opt.no_header;
  return schema;
}

model::ModelParams resolve_prior(const CommonOptions& opt, const data::Dataset& train) {
  if (train.response_kind == data::ResponseKind::Real) {
    const double mu0 = opt.mu0_set ? opt.mu0 : train.response_mean();
    const double var = train.response_variance();
    const double sigma0_sq = opt.sigma0_set ? opt.sigma0_sq : var;
    const double sigma_sq = opt.sigma_set ? opt.sigma_sq : var;
    return model::normal_prior(mu0, sigma0_sq, sigma_sq);
  }
  const int n_classes = train.num_classes();
  if (n_classes < 2) throw DataError("classification needs at least two classes");
  if (!opt.dirichlet_alpha.empty()) {
    if (static_cast<int>(opt.dirichlet_alpha.size()) != n_classes) {
      throw ConfigError("--dirichlet-alpha needs one pseudo-count per class");
    }
    Eigen::VectorXd alphas(n_classes);
    for (int c = 0; c < n_classes; ++c) alphas(c) = opt.dirichlet_alpha[static_cast<size_t>(c)];
    return model::dirichlet_prior(alphas);
  }
  if (n_classes == 2) return model::beta_prior(opt.alpha, opt.beta);
  return model::dirichlet_prior(Eigen::VectorXd::Ones(n_classes));
}

bench::QueryOptions resolve_query_options(const CommonOptions& opt,
                                          const data::Dataset& train) {
  bench::QueryOptions q;
  q.prior = resolve_prior(opt, train);
  q.p_gamma = opt.p_gamma;
  q.epsilon = opt.epsilon;
  q.truncate = (opt.truncate == 1) || (opt.truncate == -1 && train.rows() > 500);
  q.metric = (opt.metric == "manhattan") ? neighbors::Metric::manhattan()
                                         : neighbors::Metric::euclidean();
  q.standardize = (opt.standardize == 1) ||
                  (opt.standardize == -1 && train.response_kind == data::ResponseKind::Real);
  q.change_predictive = (opt.change_predictive == "fresh-prior")
                            ? engine::ChangePredictive::FreshPrior
                            : engine::ChangePredictive::PerRun;
  q.map_k = opt.map_k;
  return q;
}

int resolve_threads(const CommonOptions& opt) {
  if (opt.threads > 0) return opt.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

json config_json(const CommonOptions& opt, const bench::QueryOptions& q,
                 const data::Dataset& train) {
  json prior;
  if (q.prior.family == model::Family::BetaBernoulli) {
    prior = {{"family", "beta-bernoulli"}, {"alpha", q.prior.theta(0)}, {"beta", q.prior.theta(1)}};
  } else if (q.prior.family == model::Family::DirichletCategorical) {
    std::vector<double> alphas(q.prior.theta.data(), q.prior.theta.data() + q.prior.theta.size());
    prior = {{"family", "dirichlet-categorical"}, {"alpha", alphas}};
  } else {
    prior = {{"family", "normal-known-variance"},
             {"mu0", q.prior.theta(0)},
             {"sigma0_sq", q.prior.theta(1)},
             {"sigma_sq", q.prior.obs_variance}};
  }
  json cfg{{"version", kVersion},
           {"train", opt.train_path},
           {"train_checksum_fnv1a", fmt(static_cast<double>(0))},  // replaced below
           {"p_gamma", q.p_gamma},
           {"epsilon", q.epsilon},
           {"truncate", q.truncate},
           {"metric", opt.metric},
           {"standardize", q.standardize},
           {"change_predictive",
            q.change_predictive == engine::ChangePredictive::PerRun ? "per-run" : "fresh-prior"},
           {"map_k", q.map_k},
           {"seed", opt.seed},
           {"threads", resolve_threads(opt)},
           {"prior", prior},
           {"n_train", train.rows()}};
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(data::fnv1a_file(opt.train_path)));
  cfg["train_checksum_fnv1a"] = hex;
  if (!opt.test_path.empty()) {
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(data::fnv1a_file(opt.test_path)));
    cfg["test"] = opt.test_path;
    cfg["test_checksum_fnv1a"] = hex;
  }
  return cfg;
}

// Writes the finished output in one shot; a failed write never leaves a
// partial file behind.
void emit(const CommonOptions& opt, const std::string& text) {
  if (opt.output_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opt.output_path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + opt.output_path);
  out << text;
  out.flush();
  if (!out) {
    out.close();
    std::remove(opt.output_path.c_str());
    throw DataError("failed writing output file: " + opt.output_path);
  }
}

std::pair<data::Dataset, data::Dataset> load_train_test(const CommonOptions& opt) {
  const auto schema = make_schema(opt);
  data::Dataset train = data::load_csv(opt.train_path, schema);
  data::Dataset test;
  if (!opt.test_path.empty()) {
    test = data::load_csv(opt.test_path, schema, train.class_names);
  } else {
    auto [tr, te] = data::split_train_test(train, opt.test_fraction, opt.seed);
    train = std::move(tr);
    test = std::move(te);
  }
  if (train.response_kind != test.response_kind) {
    throw DataError("train and test disagree on the response kind");
  }
  return {std::move(train), std::move(test)};
}

std::string class_name(const data::Dataset& ds, int id) {
  if (id >= 0 && id < ds.num_classes()) return ds.class_names[static_cast<size_t>(id)];
  return std::to_string(id);
}

// ---------------------------------------------------------------------------
// posterior: full k table plus the ordered neighbour strip for one query
// ---------------------------------------------------------------------------

int cmd_posterior(const CommonOptions& opt, const std::vector<double>& query_values) {
  const auto schema = make_schema(opt);
  const auto train = data::load_csv(opt.train_path, schema);
  auto q = resolve_query_options(opt, train);

  if (static_cast<int>(query_values.size()) != train.dim()) {
    throw ConfigError("--query needs " + std::to_string(train.dim()) + " coordinates");
  }
  Eigen::VectorXd query(train.dim());
  for (int i = 0; i < train.dim(); ++i) query(i) = query_values[static_cast<size_t>(i)];

  data::Dataset train_view = train;
  if (q.standardize) {
    const auto t = data::standardize_fit(train);
    train_view = data::transformed(t, train);
    query = t.apply(query);
  }

  const auto ordered =
      neighbors::order_by_distance(query, train_view.features, train_view.responses, q.metric);
  const auto kpost = engine::run(ordered, q.prior, engine::Hazard::constant(q.p_gamma),
                                 q.mode_for(ordered.size()), q.change_predictive);

  const int n = ordered.size();

  auto response_text = [&](const model::Observation& r) {
    return train.response_kind == data::ResponseKind::ClassLabel
               ? class_name(train, model::class_label(r))
               : fmt(model::real_value(r));
  };

  std::ostringstream text;
  if (opt.format == "json") {
    json out;
    out["config"] = config_json(opt, q, train);
    out["query"] = query_values;
    json posterior = json::array();
    for (int k = 0; k < kpost.support(); ++k) {
      posterior.push_back({{"k", k}, {"probability", kpost.probs(k)}});
    }
    out["posterior"] = posterior;
    out["map_k"] = kpost.argmax();
    out["entropy_nats"] = kpost.entropy();
    json strip = json::array();
    for (int rank = 1; rank <= n; ++rank) {
      strip.push_back({{"rank", rank},
                       {"distance", ordered.distances(n - rank)},
                       {"response", response_text(ordered.nearest(rank))}});
    }
    out["neighbors_nearest_first"] = strip;
    text << out.dump(2) << '\n';
  } else {
    text << "k,probability,neighbor_rank,neighbor_distance,neighbor_response\n";
    const int rows = std::max(kpost.support(), n);
    for (int i = 0; i < rows; ++i) {
      if (i < kpost.support()) {
        text << i << ',' << fmt(kpost.probs(i));
      } else {
        text << ",";
      }
      if (i < n) {
        const int rank = i + 1;
        text << ',' << rank << ',' << fmt(ordered.distances(n - rank)) << ','
             << response_text(ordered.nearest(rank));
      } else {
        text << ",,,";
      }
      text << '\n';
    }
  }
  emit(opt, text.str());
  return 0;
}

// ---------------------------------------------------------------------------
// predict: one row per test point
// ---------------------------------------------------------------------------

int cmd_predict(const CommonOptions& opt) {
  const auto [train, test] = load_train_test(opt);
  const auto q = resolve_query_options(opt, train);
  const auto results = bench::evaluate_all(train, test, q, resolve_threads(opt));

  const bool classify = train.response_kind == data::ResponseKind::ClassLabel;

  std::ostringstream text;
  if (opt.format == "json") {
    json out;
    out["config"] = config_json(opt, q, train);
    json rows = json::array();
    for (size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      json row{{"row", i},
               {"map_k", r.prediction.map_k},
               {"posterior_entropy_nats", r.prediction.k_posterior.entropy()},
               {"outlier_score", r.prediction.outlier_score}};
      if (classify) {
        row["predicted"] = class_name(train, r.prediction.predicted_class);
        json probs;
        for (int c = 0; c < train.num_classes(); ++c) {
          probs[class_name(train, c)] = r.prediction.class_probs(c);
        }
        row["class_probs"] = probs;
        row["truth"] = class_name(test, model::class_label(test.responses[i]));
      } else {
        row["estimate"] = r.prediction.estimate;
        row["predictive_variance"] = r.prediction.predictive_variance;
        row["truth"] = model::real_value(test.responses[i]);
      }
      rows.push_back(row);
    }
    out["predictions"] = rows;
    text << out.dump(2) << '\n';
  } else {
    text << "row,";
    if (classify) {
      text << "predicted";
      for (int c = 0; c < train.num_classes(); ++c) text << ",p_" << class_name(train, c);
    } else {
      text << "estimate,predictive_variance";
    }
    text << ",map_k,posterior_entropy,outlier_score,truth\n";
    for (size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      text << i << ',';
      if (classify) {
        text << class_name(train, r.prediction.predicted_class);
        for (int c = 0; c < train.num_classes(); ++c) {
          text << ',' << fmt(r.prediction.class_probs(c));
        }
      } else {
        text << fmt(r.prediction.estimate) << ',' << fmt(r.prediction.predictive_variance);
      }
      text << ',' << r.prediction.map_k << ',' << fmt(r.prediction.k_posterior.entropy()) << ','
           << fmt(r.prediction.outlier_score) << ',';
      if (classify) {
        text << class_name(test, model::class_label(test.responses[i]));
      } else {
        text << fmt(model::real_value(test.responses[i]));
      }
      text << '\n';
    }
  }
  emit(opt, text.str());
  return 0;
}

// ---------------------------------------------------------------------------
// benchmark: posterior-weighted k-NN against the best fixed k
// ---------------------------------------------------------------------------

int cmd_benchmark(const CommonOptions& opt, bool tune, int k_min, int k_max) {
  const auto [train, test] = load_train_test(opt);
  auto q = resolve_query_options(opt, train);
  const int threads = resolve_threads(opt);

  double tuned_validation = -1.0;
  if (tune) {
    const auto report =
        (train.response_kind == data::ResponseKind::ClassLabel)
            ? bench::tune_classification(train, q, opt.seed, threads)
            : bench::tune_regression(train, q, opt.seed, threads);
    q = report.options;
    tuned_validation = report.validation_metric;
  }

  const auto results = bench::evaluate_all(train, test, q, threads);
  const auto summary = bench::summarize(test, results);

  const int resolved_k_max = std::min(k_max, train.rows());
  data::Dataset train_view = train;
  data::Dataset test_view = test;
  if (q.standardize) {
    const auto t = data::standardize_fit(train);
    train_view = data::transformed(t, train);
    test_view = data::transformed(t, test);
  }
  const auto baseline = verify::knn_baseline(train_view, test_view, k_min, resolved_k_max, q.metric);

  const bool classify = train.response_kind == data::ResponseKind::ClassLabel;
  const char* metric_name = classify ? "misclassification" : "mean_absolute_error";

  std::ostringstream text;
  if (opt.format == "json") {
    json out;
    out["config"] = config_json(opt, q, train);
    out["metric"] = metric_name;
    out["bayesian"] = {{"full_posterior", summary.metric_full},
                       {"map_k", summary.metric_map_k},
                       {"mean_query_ms", summary.mean_query_ms}};
    json per_k = json::array();
    for (size_t i = 0; i < baseline.metric_by_k.size(); ++i) {
      per_k.push_back({{"k", baseline.k_min + static_cast<int>(i)},
                       {"metric", baseline.metric_by_k[i]}});
    }
    out["baseline"] = {{"best_k", baseline.best_k},
                       {"best_metric", baseline.best_metric},
                       {"per_k", per_k}};
    out["n_test"] = summary.n_test;
    if (tune) out["tuned_validation_metric"] = tuned_validation;
    if (opt.test_path.empty()) {
      out["split"] = {{"test_fraction", opt.test_fraction}, {"seed", opt.seed}};
    }
    text << out.dump(2) << '\n';
  } else {
    text << "quantity,value\n";
    text << "metric," << metric_name << '\n';
    text << "bayesian_full_posterior," << fmt(summary.metric_full) << '\n';
    text << "bayesian_map_k," << fmt(summary.metric_map_k) << '\n';
    text << "baseline_best_k," << baseline.best_k << '\n';
    text << "baseline_best_metric," << fmt(baseline.best_metric) << '\n';
    text << "mean_query_ms," << fmt(summary.mean_query_ms) << '\n';
    text << "n_train," << train.rows() << '\n';
    text << "n_test," << summary.n_test << '\n';
    text << "p_gamma," << fmt(q.p_gamma) << '\n';
    if (classify && q.prior.family == model::Family::BetaBernoulli) {
      text << "alpha," << fmt(q.prior.theta(0)) << '\n';
      text << "beta," << fmt(q.prior.theta(1)) << '\n';
    }
    if (!classify) {
      text << "mu0," << fmt(q.prior.theta(0)) << '\n';
      text << "sigma0_sq," << fmt(q.prior.theta(1)) << '\n';
      text << "sigma_sq," << fmt(q.prior.obs_variance) << '\n';
    }
    text << "standardize," << (q.standardize ? 1 : 0) << '\n';
    text << "truncate," << (q.truncate ? 1 : 0) << '\n';
    text << "change_predictive,"
         << (q.change_predictive == engine::ChangePredictive::PerRun ? "per-run" : "fresh-prior")
         << '\n';
    text << "seed," << opt.seed << '\n';
    if (tune) text << "tuned_validation_metric," << fmt(tuned_validation) << '\n';
  }
  emit(opt, text.str());
  return 0;
}

// ---------------------------------------------------------------------------
// grid: class probability surface over a regular 2-D grid
// ---------------------------------------------------------------------------

int cmd_grid(const CommonOptions& opt, std::vector<double> bounds, int resolution) {
  const auto schema = make_schema(opt);
  const auto train = data::load_csv(opt.train_path, schema);
  if (train.response_kind != data::ResponseKind::ClassLabel) {
    throw DataError("grid export needs a classification dataset");
  }
  if (train.dim() != 2) throw DataError("grid export needs exactly two features");
  if (resolution < 1) throw ConfigError("resolution must be at least 1");
  const auto q = resolve_query_options(opt, train);

  if (bounds.empty()) {
    const double margin = 0.1;
    bounds = {train.features.col(0).minCoeff() - margin,
              train.features.col(0).maxCoeff() + margin,
              train.features.col(1).minCoeff() - margin,
              train.features.col(1).maxCoeff() + margin};
  }
  if (bounds.size() != 4) throw ConfigError("--bounds needs xmin,xmax,ymin,ymax");

  auto axis = [&](double lo, double hi, int i) {
    if (resolution == 1) return 0.5 * (lo + hi);
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(resolution - 1);
  };

  data::Dataset grid_points;
  grid_points.response_kind = data::ResponseKind::ClassLabel;
  grid_points.class_names = train.class_names;
  grid_points.features.resize(static_cast<Eigen::Index>(resolution) * resolution, 2);
  Eigen::Index row = 0;
  for (int iy = 0; iy < resolution; ++iy) {
    for (int ix = 0; ix < resolution; ++ix) {
      grid_points.features(row, 0) = axis(bounds[0], bounds[1], ix);
      grid_points.features(row, 1) = axis(bounds[2], bounds[3], iy);
      ++row;
    }
  }
  grid_points.responses.assign(static_cast<size_t>(grid_points.features.rows()),
                               model::Observation{0});

  data::Dataset train_view = train;
  data::Dataset grid_view = grid_points;
  if (q.standardize) {
    const auto t = data::standardize_fit(train);
    train_view = data::transformed(t, train);
    grid_view = data::transformed(t, grid_points);
  }

  const int threads = resolve_threads(opt);
  std::vector<bench::QueryResult> results(static_cast<size_t>(grid_view.features.rows()));
  {
    // no truths on a grid; evaluate directly
    std::atomic<int> cursor{0};
    auto work = [&] {
      const int total = static_cast<int>(grid_view.features.rows());
      for (int i = cursor.fetch_add(1); i < total; i = cursor.fetch_add(1)) {
        results[static_cast<size_t>(i)] =
            bench::evaluate_query(grid_view.features.row(i).transpose(), std::nullopt,
                                  train_view, q);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::max(1, threads); ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::ostringstream text;
  if (opt.format == "json") {
    json out;
    out["config"] = config_json(opt, q, train);
    out["bounds"] = bounds;
    out["resolution"] = resolution;
    json rows = json::array();
    for (Eigen::Index i = 0; i < grid_points.features.rows(); ++i) {
      const auto& r = results[static_cast<size_t>(i)];
      json jrow{{"x", grid_points.features(i, 0)}, {"y", grid_points.features(i, 1)}};
      for (int c = 0; c < train.num_classes(); ++c) {
        jrow["p_" + class_name(train, c)] = r.prediction.class_probs(c);
      }
      jrow["predicted"] = class_name(train, r.prediction.predicted_class);
      rows.push_back(jrow);
    }
    out["grid"] = rows;
    text << out.dump(2) << '\n';
  } else {
    text << "x,y";
    for (int c = 0; c < train.num_classes(); ++c) text << ",p_" << class_name(train, c);
    text << ",predicted\n";
    for (Eigen::Index i = 0; i < grid_points.features.rows(); ++i) {
      const auto& r = results[static_cast<size_t>(i)];
      text << fmt(grid_points.features(i, 0)) << ',' << fmt(grid_points.features(i, 1));
      for (int c = 0; c < train.num_classes(); ++c) {
        text << ',' << fmt(r.prediction.class_probs(c));
      }
      text << ',' << class_name(train, r.prediction.predicted_class) << '\n';
    }
  }
  emit(opt, text.str());
  return 0;
}

// ---------------------------------------------------------------------------
// outliers: absolute error against the max-over-k predictive density
// ---------------------------------------------------------------------------

int cmd_outliers(const CommonOptions& opt, int samples) {
  const auto [train, test] = load_train_test(opt);
  if (train.response_kind != data::ResponseKind::Real) {
    throw DataError("outlier analysis needs a regression dataset");
  }
  const auto q = resolve_query_options(opt, train);
  const auto table =
      bench::outlier_table(train, test, q, samples, opt.seed, resolve_threads(opt));

  std::ostringstream text;
  if (opt.format == "json") {
    json out;
    out["config"] = config_json(opt, q, train);
    out["samples"] = static_cast<int>(table.size());
    json rows = json::array();
    for (const auto& r : table) {
      rows.push_back({{"test_row", r.test_row},
                      {"absolute_error", r.absolute_error},
                      {"max_predictive", r.max_predictive},
                      {"argmax_k", r.argmax_k}});
    }
    out["outliers"] = rows;
    text << out.dump(2) << '\n';
  } else {
    text << "test_row,absolute_error,max_predictive,argmax_k\n";
    for (const auto& r : table) {
      text << r.test_row << ',' << fmt(r.absolute_error) << ',' << fmt(r.max_predictive) << ','
           << r.argmax_k << '\n';
    }
  }
  emit(opt, text.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian nearest-neighbour engine: exact posterior over the neighbour count"};
  app.require_subcommand(1);

  CommonOptions opt;

  auto* posterior = app.add_subcommand("posterior", "k-posterior for one query point");
  std::vector<double> query_values;
  add_common_options(posterior, opt, false);
  posterior->add_option("--query", query_values, "query coordinates, comma separated")
      ->required()
      ->delimiter(',');

  auto* predict = app.add_subcommand("predict", "predictions for every test point");
  add_common_options(predict, opt, true);

  auto* benchmark = app.add_subcommand("benchmark", "posterior-weighted k-NN vs best fixed k");
  add_common_options(benchmark, opt, true);
  bool tune = false;
  bool no_tune = false;
  int k_min = 1, k_max = 50;
  benchmark->add_flag("--tune", tune, "grid-search hyperparameters on the training split");
  benchmark->add_flag("--no-tune", no_tune)->excludes("--tune");
  benchmark->add_option("--baseline-k-min", k_min);
  benchmark->add_option("--baseline-k-max", k_max);

  auto* grid = app.add_subcommand("grid", "class probability surface on a regular grid");
  add_common_options(grid, opt, false);
  std::vector<double> bounds;
  int resolution = 100;
  grid->add_option("--bounds", bounds, "xmin,xmax,ymin,ymax (default: data hull + margin)")
      ->delimiter(',');
  grid->add_option("--resolution", resolution, "points per axis");

  auto* outliers = app.add_subcommand("outliers", "error vs max-over-k predictive table");
  add_common_options(outliers, opt, true);
  int samples = 200;
  outliers->add_option("--samples", samples, "number of sampled test points");

  CLI11_PARSE(app, argc, argv);

  try {
    if (posterior->parsed()) return cmd_posterior(opt, query_values);
    if (predict->parsed()) return cmd_predict(opt);
    if (benchmark->parsed()) return cmd_benchmark(opt, tune && !no_tune, k_min, k_max);
    if (grid->parsed()) return cmd_grid(opt, bounds, resolution);
    if (outliers->parsed()) return cmd_outliers(opt, samples);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (!opt.output_path.empty()) std::remove(opt.output_path.c_str());
    return 1;
  }
  return 0;
}
