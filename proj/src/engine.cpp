#include "bknn/engine.hpp"

#include <cmath>

#include "bknn/errors.hpp"
#include "bknn/logsumexp.hpp"

namespace bknn::engine {

Hazard Hazard::constant(double p_gamma) {
  if (!(p_gamma > 0.0 && p_gamma < 1.0)) {
    throw ConfigError("constant hazard must lie in (0, 1)");
  }
  return Hazard(p_gamma, nullptr);
}

Hazard Hazard::custom(Fn fn) {
  if (!fn) throw ConfigError("custom hazard must be callable");
  return Hazard(0.0, std::move(fn));
}

double Hazard::operator()(int run_length, double gap) const {
  if (!fn_) return rate_;
  const double h = fn_(run_length, gap);
  if (!(h > 0.0 && h < 1.0)) {
    throw ConfigError("custom hazard emitted a value outside (0, 1)");
  }
  return h;
}

Mode Mode::truncated(int m) {
  if (m < 1) throw ConfigError("truncation index must be at least 1");
  return Mode{m};
}

RunLengthState init(const model::ModelParams& prior, ChangePredictive cp) {
  RunLengthState state;
  state.log_joint = Eigen::VectorXd::Zero(1);
  state.run_params.push_back(prior);
  state.steps = 0;
  state.change_predictive = cp;
  return state;
}

void step(RunLengthState& state, const model::Observation& x, const Hazard& hazard,
          double gap) {
  const int len = state.support();

  Eigen::VectorXd log_pred(len);
  for (int i = 0; i < len; ++i) {
    log_pred(i) = model::log_predictive(state.run_params[static_cast<size_t>(i)], x);
  }

  Eigen::VectorXd grown(len + 1);
  Eigen::VectorXd change_terms(len);
  if (hazard.is_constant()) {
    const double log_stay = std::log1p(-hazard.rate());
    const double log_change = std::log(hazard.rate());
    grown.tail(len) = state.log_joint + log_pred + Eigen::VectorXd::Constant(len, log_stay);
    change_terms = state.log_joint.array() + log_change;
  } else {
    for (int i = 0; i < len; ++i) {
      const double h = hazard(i, gap);
      grown(i + 1) = state.log_joint(i) + log_pred(i) + std::log1p(-h);
      change_terms(i) = state.log_joint(i) + std::log(h);
    }
  }
  if (state.change_predictive == ChangePredictive::FreshPrior) {
    // run_params[0] is always the untouched prior
    change_terms.array() += log_pred(0);
  } else {
    change_terms += log_pred;
  }
  grown(0) = log_sum_exp(change_terms);

  if (log_sum_exp(grown) == kNegInf) {
    throw ModelError("total evidence vanished: data impossible under the model");
  }

  // Shift the parameter slots: run i+1 conditions on what run i saw plus x.
  state.run_params.push_back(state.run_params.back());
  for (int i = len; i >= 1; --i) {
    state.run_params[static_cast<size_t>(i)] = state.run_params[static_cast<size_t>(i - 1)];
    model::update_in_place(state.run_params[static_cast<size_t>(i)], x);
  }
  // run_params[0] keeps the prior.

  state.log_joint = std::move(grown);
  ++state.steps;
}

int KPosterior::argmax() const {
  Eigen::Index best = 0;
  probs.maxCoeff(&best);
  return static_cast<int>(best);
}

double KPosterior::entropy() const {
  double h = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs(i) > 0.0) h -= probs(i) * std::log(probs(i));
  }
  return h;
}

KPosterior posterior(const RunLengthState& state) {
  const double lse = log_sum_exp(state.log_joint);
  if (lse == kNegInf || std::isnan(lse)) {
    throw ModelError("cannot normalize: joint probability is zero everywhere");
  }
  KPosterior out;
  out.probs = (state.log_joint.array() - lse).exp();
  return out;
}

KPosterior run(const neighbors::OrderedNeighbors& ordered,
               const model::ModelParams& prior, const Hazard& hazard, Mode mode,
               ChangePredictive cp) {
  const int n = ordered.size();
  if (n < 1) throw DataError("need at least one ordered neighbour");

  int start = 0;
  if (mode.is_truncated() && mode.m() < n) start = n - mode.m();

  RunLengthState state = init(prior, cp);
  for (int t = start; t < n; ++t) {
    const double gap = (t > start) ? ordered.distances(t - 1) - ordered.distances(t) : 0.0;
    step(state, ordered.responses[static_cast<size_t>(t)], hazard, gap);
  }
  return posterior(state);
}

}  // namespace bknn::engine
