#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bknn/model.hpp"

namespace bknn::data {

enum class ResponseKind { ClassLabel, Real };

// Column layout of a CSV file. Empty feature_cols means "all but the
// response column"; response_col -1 means "last column". A missing
// response_kind is inferred: Real when every response token parses as a
// number, ClassLabel otherwise.
struct Schema {
  std::vector<int> feature_cols;
  int response_col = -1;
  std::optional<ResponseKind> response_kind;
  char delimiter = ',';
  bool has_header = true;
};

struct Dataset {
  Eigen::MatrixXd features;  // one row per point
  std::vector<model::Observation> responses;
  ResponseKind response_kind = ResponseKind::ClassLabel;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;  // discrete responses; id = index

  int rows() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
  int num_classes() const { return static_cast<int>(class_names.size()); }

  Eigen::VectorXd responses_real() const;  // Real responses as a vector
  Eigen::VectorXi responses_class() const;

  double response_mean() const;      // Real only
  double response_variance() const;  // Real only, n-1 denominator
};

// Loads a CSV file under the given schema. Class labels may be arbitrary
// strings and are mapped to integer ids in first-appearance order. When
// `alphabet` is supplied the mapping is fixed and an unseen label is a
// DataError. Errors report 1-based file line numbers.
Dataset load_csv(const std::string& path, const Schema& schema,
                 const std::vector<std::string>& alphabet = {});

// Writes features + response back out; numbers use shortest round-trip
// formatting, so decimal inputs already in that form reproduce exactly.
void write_csv(const Dataset& dataset, const std::string& path, char delimiter = ',');

// Per-feature affine transform fit on a training split only.
struct FeatureTransform {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // 1 for constant features (passed through)

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd inverse(const Eigen::VectorXd& z) const;
};

// Fits standardization (mean 0, std 1 per feature) on `train`. A feature
// with zero variance passes through unscaled; a note is written to `warn`
// when provided.
FeatureTransform standardize_fit(const Dataset& train, std::ostream* warn = nullptr);
Dataset transformed(const FeatureTransform& t, const Dataset& dataset);
std::pair<FeatureTransform, Dataset> standardize(const Dataset& train,
                                                 std::ostream* warn = nullptr);

// Normal prior with data-driven defaults: mu0 = training response mean,
// prior variance = observation variance = training response variance.
// Throws DataError on fewer than two rows or a constant response.
model::ModelParams default_regression_prior(const Dataset& train);

// Seeded shuffle split; the Fisher-Yates permutation uses its own bounded
// draws so a recorded seed reproduces the split on any platform.
std::pair<Dataset, Dataset> split_train_test(const Dataset& all, double test_fraction,
                                             std::uint64_t seed);

Dataset take_rows(const Dataset& all, const std::vector<int>& rows);

// FNV-1a 64-bit digest of a file, for run manifests.
std::uint64_t fnv1a_file(const std::string& path);

}  // namespace bknn::data
