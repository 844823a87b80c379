#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "bknn/model.hpp"
#include "bknn/neighbors.hpp"

namespace bknn::engine {

// Per-gap change-point probability. A custom hazard may depend on the
// current run length and on the distance gap between consecutive ordered
// points; every value it emits must lie in (0, 1).
class Hazard {
 public:
  using Fn = std::function<double(int run_length, double gap)>;

  static Hazard constant(double p_gamma);
  static Hazard custom(Fn fn);

  double operator()(int run_length, double gap) const;
  bool is_constant() const { return !fn_; }
  double rate() const { return rate_; }  // constant hazards only

 private:
  Hazard(double rate, Fn fn) : rate_(rate), fn_(std::move(fn)) {}
  double rate_ = 0.0;
  Fn fn_;
};

// Which predictive weighs the change-point hypothesis at each step.
//
// PerRun evaluates the incoming observation under each run's own posterior
// predictive, which makes the recursion agree exactly with the
// product-partition model (k = length of the segment nearest the target).
// FreshPrior scores it under the untouched prior instead; that variant
// never absorbs the first point after a change, so the same physical
// partition lands one index lower. PerRun is the default.
enum class ChangePredictive { FreshPrior, PerRun };

inline constexpr ChangePredictive kDefaultChangePredictive = ChangePredictive::PerRun;

// Processing mode: full pass over all points, or only the m nearest.
struct Mode {
  static Mode full() { return Mode{0}; }
  static Mode truncated(int m);

  bool is_truncated() const { return m_ > 0; }
  int m() const { return m_; }

 private:
  explicit Mode(int m) : m_(m) {}
  int m_;
};

// State of the recursion after consuming t ordered observations.
// Entry i of log_joint is log p(k_t = i, x_0:t); run_params[i] carries the
// prior conditioned on the most recent i observations, so run_params[0] is
// always the untouched prior.
struct RunLengthState {
  Eigen::VectorXd log_joint;
  std::vector<model::ModelParams> run_params;
  int steps = 0;
  ChangePredictive change_predictive = kDefaultChangePredictive;

  int support() const { return static_cast<int>(log_joint.size()); }
};

// Fresh state: p(k_0 = 0) = 1 and the prior in slot 0.
RunLengthState init(const model::ModelParams& prior,
                    ChangePredictive cp = kDefaultChangePredictive);

// One observation, all in log space:
//   growth  log_joint'[i+1] = log_joint[i] + log pred_i(x) + log(1 - h_i)
//   change  log_joint'[0]   = logsumexp_i(log_joint[i] + log pred*(x) + log h_i)
// with pred* the prior predictive (FreshPrior) or pred_i (PerRun), and the
// parameter slots shifted by one conjugate update. `gap` is the distance
// decrease from the previous ordered point, for distance-aware hazards.
void step(RunLengthState& state, const model::Observation& x, const Hazard& hazard,
          double gap = 0.0);

// Normalized posterior over the neighbour count k = 0..n.
struct KPosterior {
  Eigen::VectorXd probs;

  int support() const { return static_cast<int>(probs.size()); }
  int max_k() const { return support() - 1; }
  int argmax() const;
  double entropy() const;  // nats
};

// probs[i] = exp(log_joint[i] - logsumexp(log_joint)). Throws ModelError
// when every joint entry is -inf (data impossible under the model).
KPosterior posterior(const RunLengthState& state);

// init + step over the ordered responses (farthest to nearest) + posterior.
// Truncated mode feeds only the m nearest points, so the posterior support
// becomes {0..m} with the tail lump at m.
KPosterior run(const neighbors::OrderedNeighbors& ordered,
               const model::ModelParams& prior, const Hazard& hazard,
               Mode mode = Mode::full(),
               ChangePredictive cp = kDefaultChangePredictive);

}  // namespace bknn::engine
