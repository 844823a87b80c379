#include "bknn/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "bknn/errors.hpp"
#include "bknn/logsumexp.hpp"

namespace bknn::verify {

namespace {

// Marginal evidence of one contiguous segment, under the convention in use.
// PerRun: full marginal. FreshPrior (for segments opened by a change-point):
// the first point is scored under the prior but never absorbed.
double segment_log_weight(std::span<const model::Observation> xs, size_t begin, size_t end,
                          const model::ModelParams& prior, bool opened_by_change,
                          engine::ChangePredictive cp) {
  std::span<const model::Observation> seg = xs.subspan(begin, end - begin);
  if (cp == engine::ChangePredictive::FreshPrior && opened_by_change) {
    return model::log_predictive(prior, seg.front()) +
           model::log_evidence(prior, seg.subspan(1));
  }
  return model::log_evidence(prior, seg);
}

}  // namespace

engine::KPosterior exact_k_posterior(std::span<const model::Observation> xs,
                                     const model::ModelParams& prior, double p_gamma,
                                     engine::ChangePredictive cp) {
  const int n = static_cast<int>(xs.size());
  if (n < 1) throw DataError("need at least one observation");
  if (n > 20) throw ConfigError("exact enumeration refuses n > 20");
  if (!(p_gamma > 0.0 && p_gamma < 1.0)) throw ConfigError("p_gamma must lie in (0, 1)");

  const double log_h = std::log(p_gamma);
  const double log_s = std::log1p(-p_gamma);

  // One bucket of log weights per final neighbour count.
  std::vector<std::vector<double>> buckets(static_cast<size_t>(n) + 1);

  const std::uint32_t masks = 1u << n;
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    const int n_changes = std::popcount(mask);
    double logw = n_changes * log_h + (n - n_changes) * log_s;
    int k;

    if (cp == engine::ChangePredictive::PerRun) {
      // Bit j marks a change-point in the gap after x_j (j = n-1 is the gap
      // between the nearest point and the target). Segments split at the
      // internal gaps; a change in the final gap forces k = 0.
      k = n;
      size_t begin = 0;
      for (int j = 0; j + 1 < n; ++j) {
        if (mask & (1u << j)) {
          logw += segment_log_weight(xs, begin, static_cast<size_t>(j) + 1, prior, begin != 0, cp);
          begin = static_cast<size_t>(j) + 1;
          k = n - (j + 1);
        }
      }
      logw += segment_log_weight(xs, begin, static_cast<size_t>(n), prior, begin != 0, cp);
      if (mask & (1u << (n - 1))) k = 0;
    } else {
      // Bit t marks a change-point in the gap before x_t. The final count
      // grows from the last change; no hazard sits in the final gap.
      k = (mask == 0) ? n : n - std::bit_width(mask);
      size_t begin = 0;
      bool opened = (mask & 1u) != 0;
      for (int t = 1; t < n; ++t) {
        if (mask & (1u << t)) {
          logw += segment_log_weight(xs, begin, static_cast<size_t>(t), prior, opened, cp);
          begin = static_cast<size_t>(t);
          opened = true;
        }
      }
      logw += segment_log_weight(xs, begin, static_cast<size_t>(n), prior, opened, cp);
    }

    buckets[static_cast<size_t>(k)].push_back(logw);
  }

  Eigen::VectorXd log_joint(n + 1);
  for (int i = 0; i <= n; ++i) {
    log_joint(i) = log_sum_exp(
        Eigen::Map<const Eigen::VectorXd>(buckets[static_cast<size_t>(i)].data(),
                                          static_cast<Eigen::Index>(buckets[static_cast<size_t>(i)].size())));
  }
  const double total = log_sum_exp(log_joint);
  if (total == kNegInf) throw ModelError("all partitions carry zero probability");

  engine::KPosterior out;
  out.probs = (log_joint.array() - total).exp();
  return out;
}

BaselineResult knn_baseline(const data::Dataset& train, const data::Dataset& test,
                            int k_min, int k_max, const neighbors::Metric& metric) {
  if (k_min < 1 || k_max < k_min || k_max > train.rows()) {
    throw ConfigError("baseline k range must satisfy 1 <= k_min <= k_max <= train size");
  }
  const bool classify = train.response_kind == data::ResponseKind::ClassLabel;
  const int n_k = k_max - k_min + 1;
  const int n_test = test.rows();

  // predictions[i] holds the per-test-point prediction for k = k_min + i
  std::vector<std::vector<double>> estimates;
  std::vector<std::vector<int>> votes;
  if (classify) {
    votes.assign(static_cast<size_t>(n_k), std::vector<int>(static_cast<size_t>(n_test)));
  } else {
    estimates.assign(static_cast<size_t>(n_k), std::vector<double>(static_cast<size_t>(n_test)));
  }

  const int n_classes = classify ? train.num_classes() : 0;
  for (int q = 0; q < n_test; ++q) {
    const auto ordered = neighbors::order_by_distance(
        test.features.row(q).transpose(), train.features, train.responses, metric);
    std::vector<int> counts(static_cast<size_t>(n_classes), 0);
    double running_sum = 0.0;
    for (int k = 1; k <= k_max; ++k) {
      const model::Observation& x = ordered.nearest(k);
      if (classify) {
        counts[static_cast<size_t>(model::class_label(x))] += 1;
      } else {
        running_sum += model::real_value(x);
      }
      if (k >= k_min) {
        const int slot = k - k_min;
        if (classify) {
          // majority vote; ties break toward the lower class index
          int arg = 0;
          for (int c = 1; c < n_classes; ++c) {
            if (counts[static_cast<size_t>(c)] > counts[static_cast<size_t>(arg)]) arg = c;
          }
          votes[static_cast<size_t>(slot)][static_cast<size_t>(q)] = arg;
        } else {
          estimates[static_cast<size_t>(slot)][static_cast<size_t>(q)] =
              running_sum / static_cast<double>(k);
        }
      }
    }
  }

  BaselineResult out;
  out.k_min = k_min;
  out.metric_by_k.resize(static_cast<size_t>(n_k));
  std::vector<int> truth_class;
  std::vector<double> truth_real;
  if (classify) {
    for (const auto& r : test.responses) truth_class.push_back(model::class_label(r));
  } else {
    for (const auto& r : test.responses) truth_real.push_back(model::real_value(r));
  }
  for (int i = 0; i < n_k; ++i) {
    out.metric_by_k[static_cast<size_t>(i)] =
        classify ? misclassification_rate(votes[static_cast<size_t>(i)], truth_class)
                 : mean_absolute_error(estimates[static_cast<size_t>(i)], truth_real);
  }
  const auto best = std::min_element(out.metric_by_k.begin(), out.metric_by_k.end());
  out.best_k = k_min + static_cast<int>(best - out.metric_by_k.begin());
  out.best_metric = *best;
  return out;
}

double misclassification_rate(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw ConfigError("prediction/truth length mismatch");
  if (predicted.empty()) throw ConfigError("cannot score an empty prediction set");
  size_t wrong = 0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] != truth[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

double mean_absolute_error(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size()) throw ConfigError("prediction/truth length mismatch");
  if (predicted.empty()) throw ConfigError("cannot score an empty prediction set");
  double total = 0.0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    total += std::abs(predicted[i] - truth[i]);
  }
  return total / static_cast<double>(predicted.size());
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  const size_t n = v.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("spearman inputs must have equal length");
  if (a.size() < 2) throw ConfigError("spearman needs at least two pairs");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  double mean = (n + 1.0) / 2.0;
  double num = 0.0, da = 0.0, db = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (ra[i] - mean) * (rb[i] - mean);
    da += (ra[i] - mean) * (ra[i] - mean);
    db += (rb[i] - mean) * (rb[i] - mean);
  }
  if (da == 0.0 || db == 0.0) return 0.0;
  return num / std::sqrt(da * db);
}

}  // namespace bknn::verify
