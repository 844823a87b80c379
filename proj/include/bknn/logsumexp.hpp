#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>

namespace bknn {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without leaving log space.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = (a > b) ? a : b;
  const double lo = (a > b) ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

// logsumexp over any Eigen vector expression. Returns -inf for an
// all-(-inf) input instead of NaN.
template <typename Derived>
double log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  if (v.size() == 0) return kNegInf;
  const double hi = v.maxCoeff();
  if (hi == kNegInf || std::isnan(hi)) return hi;
  const double sum = (v.derived().array() - hi).exp().sum();
  return hi + std::log(sum);
}

}  // namespace bknn
