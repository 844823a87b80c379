#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <vector>

#include "bknn/neighbors.hpp"
#include "toy_data.hpp"

using namespace bknn;
using model::Observation;

TEST_CASE("toy target (I): the five nearest points are all class 'a'") {
  const auto ordered = neighbors::order_by_distance(toy::target_one(), toy::features(),
                                                    toy::responses());
  REQUIRE(ordered.size() == 29);
  // farthest first, so the nearest five sit at the tail
  for (int k = 1; k <= 5; ++k) {
    CHECK(model::class_label(ordered.nearest(k)) == 0);
  }
  CHECK(model::class_label(ordered.nearest(6)) == 1);
  // every point past the fifth nearest is class 'b'
  for (int k = 6; k <= 29; ++k) {
    CHECK(model::class_label(ordered.nearest(k)) == 1);
  }
}

TEST_CASE("toy target (II): nearest-first labels begin a,a,a,b,b,a") {
  const auto ordered = neighbors::order_by_distance(toy::target_two(), toy::features(),
                                                    toy::responses());
  const int expected[] = {0, 0, 0, 1, 1, 0};
  for (int k = 1; k <= 6; ++k) {
    CHECK(model::class_label(ordered.nearest(k)) == expected[k - 1]);
  }
}

TEST_CASE("distances are non-increasing and reversal sorts ascending") {
  const auto ordered = neighbors::order_by_distance(toy::target_two(), toy::features(),
                                                    toy::responses());
  for (int i = 1; i < ordered.size(); ++i) {
    CHECK(ordered.distances(i) <= ordered.distances(i - 1));
  }
}

TEST_CASE("a single training point at the target itself has distance zero") {
  Eigen::MatrixXd one(1, 2);
  one << 0.25, -0.5;
  const std::vector<Observation> resp{Observation{1}};
  const auto ordered =
      neighbors::order_by_distance(Eigen::Vector2d(0.25, -0.5), one, resp);
  REQUIRE(ordered.size() == 1);
  CHECK(ordered.distances(0) == 0.0);
}

TEST_CASE("ties break toward the lower original index being farther") {
  Eigen::MatrixXd pts(3, 1);
  pts << 1.0, -0.5, 1.0;  // rows 0 and 2 are equidistant from 0
  const std::vector<Observation> resp{Observation{0}, Observation{1}, Observation{2}};
  const auto ordered =
      neighbors::order_by_distance(Eigen::VectorXd::Zero(1), pts, resp);
  CHECK(ordered.source_rows == std::vector<int>{0, 2, 1});
}

TEST_CASE("errors: empty training set and dimension mismatch") {
  const Eigen::MatrixXd none(0, 2);
  const std::vector<Observation> no_resp;
  CHECK_THROWS_AS(neighbors::order_by_distance(Eigen::Vector2d(0, 0), none, no_resp),
                  DataError);

  Eigen::MatrixXd pts(2, 3);
  pts.setZero();
  const std::vector<Observation> resp{Observation{0}, Observation{1}};
  CHECK_THROWS_AS(neighbors::order_by_distance(Eigen::Vector2d(0, 0), pts, resp), DataError);
}

TEST_CASE("manhattan and custom metrics agree") {
  Eigen::MatrixXd pts(4, 2);
  pts << 0, 0, 1, 2, -3, 1, 0.5, -0.5;
  std::vector<Observation> resp;
  for (int i = 0; i < 4; ++i) resp.emplace_back(i);

  const auto manhattan = neighbors::Metric::manhattan();
  const auto custom = neighbors::Metric::custom([](const Eigen::VectorXd& a,
                                                   const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().sum();
  });
  const Eigen::Vector2d target(0.2, 0.3);
  const auto a = neighbors::order_by_distance(target, pts, resp, manhattan);
  const auto b = neighbors::order_by_distance(target, pts, resp, custom);
  CHECK(a.source_rows == b.source_rows);
  CHECK((a.distances - b.distances).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("uniform positive feature scaling leaves the ordering identical") {
  std::mt19937 rng(19);
  auto uniform = [&rng] { return (rng() % 100000) / 100000.0; };
  Eigen::MatrixXd pts(40, 3);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 3; ++j) pts(i, j) = uniform();
  }
  std::vector<Observation> resp;
  for (int i = 0; i < 40; ++i) resp.emplace_back(static_cast<int>(rng() % 2));
  const Eigen::Vector3d target(uniform(), uniform(), uniform());

  const auto base = neighbors::order_by_distance(target, pts, resp);
  for (double lambda : {2.0, 3.7, 1e6, 1e-6}) {
    const auto scaled = neighbors::order_by_distance(
        (lambda * target).eval(), (lambda * pts).eval(), resp);
    CHECK(scaled.source_rows == base.source_rows);
  }
}

TEST_CASE("ordering is a permutation of the training responses") {
  std::mt19937 rng(23);
  Eigen::MatrixXd pts(25, 2);
  for (int i = 0; i < 25; ++i) {
    pts(i, 0) = (rng() % 1000) / 1000.0;
    pts(i, 1) = (rng() % 1000) / 1000.0;
  }
  std::vector<Observation> resp;
  std::vector<int> labels;
  for (int i = 0; i < 25; ++i) {
    const int c = static_cast<int>(rng() % 3);
    labels.push_back(c);
    resp.emplace_back(c);
  }
  const auto ordered =
      neighbors::order_by_distance(Eigen::Vector2d(0.4, 0.6), pts, resp);
  std::vector<int> got;
  for (const auto& r : ordered.responses) got.push_back(model::class_label(r));
  std::sort(labels.begin(), labels.end());
  std::sort(got.begin(), got.end());
  CHECK(got == labels);
}

TEST_CASE("truncation index from the geometric tail bound") {
  CHECK(neighbors::truncation_index(0.05, 1e-4, 100000) == 180);
  CHECK(neighbors::truncation_index(0.5, 0.26, 100000) == 2);
  CHECK(neighbors::truncation_index(0.05, 1e-4, 29) == 29);  // capped at n
  CHECK_THROWS_AS(neighbors::truncation_index(1.0, 0.5, 10), ConfigError);
  CHECK_THROWS_AS(neighbors::truncation_index(0.5, 0.0, 10), ConfigError);
}
