#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <vector>

#include "bknn/model.hpp"

namespace bknn::neighbors {

// Distance over feature vectors. A metric must be non-negative and
// symmetric with d(x, x) = 0; that is a documented contract on custom
// functions, not something we can enforce.
class Metric {
 public:
  enum class Kind { Euclidean, Manhattan, Custom };
  using Fn = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

  static Metric euclidean() { return Metric(Kind::Euclidean, nullptr); }
  static Metric manhattan() { return Metric(Kind::Manhattan, nullptr); }
  static Metric custom(Fn fn);

  double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  Kind kind() const { return kind_; }

 private:
  Metric(Kind kind, Fn fn) : kind_(kind), fn_(std::move(fn)) {}
  Kind kind_;
  Fn fn_;
};

// The training set projected onto the distance ordering for one query
// point: farthest first, so walking the sequence moves toward the target.
struct OrderedNeighbors {
  Eigen::VectorXd target;
  Eigen::VectorXd distances;                  // non-increasing
  std::vector<model::Observation> responses;  // aligned with distances
  std::vector<int> source_rows;               // original dataset row indices

  int size() const { return static_cast<int>(responses.size()); }
  // Response of the k-th nearest point, k = 1..size().
  const model::Observation& nearest(int k) const { return responses[responses.size() - k]; }
};

// Sorts all training points by distance to the target, farthest first.
// Ties break on the original row index: the lower index counts as farther.
// Throws DataError on an empty training set or a dimension mismatch.
OrderedNeighbors order_by_distance(const Eigen::VectorXd& target,
                                   const Eigen::MatrixXd& features,
                                   std::span<const model::Observation> responses,
                                   const Metric& metric = Metric::euclidean());

// Smallest m with (1 - p_gamma)^m < epsilon, capped at n: past m nearest
// points, the geometric prior on the neighbour count has tail mass < epsilon.
int truncation_index(double p_gamma, double epsilon, int n);

}  // namespace bknn::neighbors
