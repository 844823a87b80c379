#include "bknn/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bknn/errors.hpp"

namespace bknn::neighbors {

Metric Metric::custom(Fn fn) {
  if (!fn) throw ConfigError("custom metric must be callable");
  return Metric(Kind::Custom, std::move(fn));
}

double Metric::operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  switch (kind_) {
    case Kind::Euclidean:
      return (a - b).norm();
    case Kind::Manhattan:
      return (a - b).cwiseAbs().sum();
    case Kind::Custom:
      return fn_(a, b);
  }
  return 0.0;
}

OrderedNeighbors order_by_distance(const Eigen::VectorXd& target,
                                   const Eigen::MatrixXd& features,
                                   std::span<const model::Observation> responses,
                                   const Metric& metric) {
  const Eigen::Index n = features.rows();
  if (n == 0) throw DataError("cannot order an empty training set");
  if (features.cols() != target.size()) {
    throw DataError("target dimension does not match the training features");
  }
  if (static_cast<Eigen::Index>(responses.size()) != n) {
    throw DataError("response count does not match the training features");
  }

  Eigen::VectorXd dist(n);
  if (metric.kind() == Metric::Kind::Euclidean) {
    dist = (features.rowwise() - target.transpose()).rowwise().norm();
  } else if (metric.kind() == Metric::Kind::Manhattan) {
    dist = (features.rowwise() - target.transpose()).cwiseAbs().rowwise().sum();
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      dist(i) = metric(features.row(i).transpose(), target);
    }
  }

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (dist(i) != dist(j)) return dist(i) > dist(j);
    return i < j;  // lower original index counts as farther
  });

  OrderedNeighbors out;
  out.target = target;
  out.distances.resize(n);
  out.responses.reserve(static_cast<size_t>(n));
  out.source_rows = order;
  for (Eigen::Index pos = 0; pos < n; ++pos) {
    const int row = order[static_cast<size_t>(pos)];
    out.distances(pos) = dist(row);
    out.responses.push_back(responses[static_cast<size_t>(row)]);
  }
  return out;
}

int truncation_index(double p_gamma, double epsilon, int n) {
  if (!(p_gamma > 0.0 && p_gamma < 1.0)) {
    throw ConfigError("p_gamma must lie in (0, 1)");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ConfigError("epsilon must lie in (0, 1)");
  }
  int m = static_cast<int>(std::ceil(std::log(epsilon) / std::log1p(-p_gamma)));
  if (m < 1) m = 1;
  while (std::pow(1.0 - p_gamma, m) >= epsilon) ++m;
  return std::min(m, n);
}

}  // namespace bknn::neighbors
