#include "bknn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <system_error>
#include <unordered_map>

#include "bknn/errors.hpp"

namespace bknn::data {

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delimiter)) {
    // trim surrounding whitespace and stray carriage returns
    const auto begin = field.find_first_not_of(" \t\r");
    const auto end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos ? std::string()
                                                : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == delimiter) fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based, matching rows
};

RawTable read_table(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  RawTable table;
  std::string line;
  int line_number = 0;
  bool saw_any = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line == "\r") continue;
    saw_any = true;
    auto fields = split_line(line, schema.delimiter);
    if (schema.has_header && table.header.empty() && table.rows.empty()) {
      table.header = std::move(fields);
      continue;
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_number);
  }
  if (!saw_any) throw DataError("empty file: " + path);
  if (table.rows.empty()) throw DataError("no data rows in file: " + path);
  return table;
}

}  // namespace

Eigen::VectorXd Dataset::responses_real() const {
  if (response_kind != ResponseKind::Real) {
    throw DataError("dataset does not have a real-valued response");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(responses.size()));
  for (size_t i = 0; i < responses.size(); ++i) out(static_cast<Eigen::Index>(i)) = model::real_value(responses[i]);
  return out;
}

Eigen::VectorXi Dataset::responses_class() const {
  if (response_kind != ResponseKind::ClassLabel) {
    throw DataError("dataset does not have a class response");
  }
  Eigen::VectorXi out(static_cast<Eigen::Index>(responses.size()));
  for (size_t i = 0; i < responses.size(); ++i) out(static_cast<Eigen::Index>(i)) = model::class_label(responses[i]);
  return out;
}

double Dataset::response_mean() const { return responses_real().mean(); }

double Dataset::response_variance() const {
  const Eigen::VectorXd y = responses_real();
  if (y.size() < 2) throw DataError("need at least two rows for a response variance");
  const double mean = y.mean();
  return (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
}

Dataset load_csv(const std::string& path, const Schema& schema,
                 const std::vector<std::string>& alphabet) {
  RawTable table = read_table(path, schema);
  const int ncols = static_cast<int>(table.rows.front().size());

  int response_col = schema.response_col;
  if (response_col < 0) response_col = ncols - 1;
  if (response_col >= ncols) throw DataError("response column out of range");

  std::vector<int> feature_cols = schema.feature_cols;
  if (feature_cols.empty()) {
    for (int c = 0; c < ncols; ++c) {
      if (c != response_col) feature_cols.push_back(c);
    }
  }
  for (int c : feature_cols) {
    if (c < 0 || c >= ncols) throw DataError("feature column out of range");
  }
  if (feature_cols.empty()) throw DataError("no feature columns selected");

  const int nrows = static_cast<int>(table.rows.size());
  for (int r = 0; r < nrows; ++r) {
    if (static_cast<int>(table.rows[r].size()) != ncols) {
      throw DataError("malformed row at line " + std::to_string(table.line_numbers[r]) +
                      ": expected " + std::to_string(ncols) + " fields, found " +
                      std::to_string(table.rows[r].size()));
    }
  }

  // Decide the response kind: explicit, or inferred from parseability.
  ResponseKind kind;
  if (schema.response_kind) {
    kind = *schema.response_kind;
  } else {
    kind = ResponseKind::Real;
    for (const auto& row : table.rows) {
      double v;
      if (!parse_double(row[response_col], v)) {
        kind = ResponseKind::ClassLabel;
        break;
      }
    }
  }

  Dataset out;
  out.response_kind = kind;
  out.features.resize(nrows, static_cast<Eigen::Index>(feature_cols.size()));
  out.responses.reserve(static_cast<size_t>(nrows));

  std::unordered_map<std::string, int> label_ids;
  out.class_names = alphabet;
  for (size_t i = 0; i < alphabet.size(); ++i) label_ids[alphabet[i]] = static_cast<int>(i);
  const bool fixed_alphabet = !alphabet.empty();

  for (int r = 0; r < nrows; ++r) {
    const auto& row = table.rows[r];
    for (size_t f = 0; f < feature_cols.size(); ++f) {
      double v;
      if (!parse_double(row[feature_cols[f]], v)) {
        throw DataError("bad numeric field '" + row[feature_cols[f]] + "' at line " +
                        std::to_string(table.line_numbers[r]));
      }
      out.features(r, static_cast<Eigen::Index>(f)) = v;
    }
    if (kind == ResponseKind::Real) {
      double v;
      if (!parse_double(row[response_col], v)) {
        throw DataError("bad numeric response '" + row[response_col] + "' at line " +
                        std::to_string(table.line_numbers[r]));
      }
      out.responses.emplace_back(v);
    } else {
      const std::string& label = row[response_col];
      auto it = label_ids.find(label);
      if (it == label_ids.end()) {
        if (fixed_alphabet) {
          throw DataError("unknown class label '" + label + "' at line " +
                          std::to_string(table.line_numbers[r]));
        }
        const int id = static_cast<int>(out.class_names.size());
        label_ids.emplace(label, id);
        out.class_names.push_back(label);
        out.responses.emplace_back(id);
      } else {
        out.responses.emplace_back(it->second);
      }
    }
  }

  if (static_cast<int>(table.header.size()) == ncols) {
    for (int c : feature_cols) out.feature_names.push_back(table.header[static_cast<size_t>(c)]);
  }
  return out;
}

void write_csv(const Dataset& dataset, const std::string& path, char delimiter) {
  std::ofstream outfile(path);
  if (!outfile) throw DataError("cannot write file: " + path);
  if (!dataset.feature_names.empty()) {
    for (const auto& name : dataset.feature_names) outfile << name << delimiter;
    outfile << "response\n";
  }
  for (int r = 0; r < dataset.rows(); ++r) {
    for (int c = 0; c < dataset.dim(); ++c) {
      outfile << format_double(dataset.features(r, c)) << delimiter;
    }
    if (dataset.response_kind == ResponseKind::Real) {
      outfile << format_double(model::real_value(dataset.responses[static_cast<size_t>(r)]));
    } else {
      outfile << dataset.class_names[static_cast<size_t>(
          model::class_label(dataset.responses[static_cast<size_t>(r)]))];
    }
    outfile << '\n';
  }
  if (!outfile) throw DataError("failed while writing: " + path);
}

Eigen::VectorXd FeatureTransform::apply(const Eigen::VectorXd& x) const {
  return (x - mean).cwiseQuotient(scale);
}

Eigen::MatrixXd FeatureTransform::apply(const Eigen::MatrixXd& x) const {
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::VectorXd FeatureTransform::inverse(const Eigen::VectorXd& z) const {
  return z.cwiseProduct(scale) + mean;
}

FeatureTransform standardize_fit(const Dataset& train, std::ostream* warn) {
  const Eigen::Index d = train.features.cols();
  const Eigen::Index n = train.features.rows();
  FeatureTransform t;
  t.mean = train.features.colwise().mean();
  t.scale.resize(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const double ss = (train.features.col(c).array() - t.mean(c)).square().sum();
    // population standard deviation: a two-point feature {0, 2} maps to -1/+1
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (sd > 0.0) {
      t.scale(c) = sd;
    } else {
      t.scale(c) = 1.0;
      if (warn) {
        *warn << "warning: feature " << c << " is constant on the training split; "
              << "passed through unscaled\n";
      }
    }
  }
  return t;
}

Dataset transformed(const FeatureTransform& t, const Dataset& dataset) {
  Dataset out = dataset;
  out.features = t.apply(dataset.features);
  return out;
}

std::pair<FeatureTransform, Dataset> standardize(const Dataset& train, std::ostream* warn) {
  FeatureTransform t = standardize_fit(train, warn);
  return {t, transformed(t, train)};
}

model::ModelParams default_regression_prior(const Dataset& train) {
  if (train.response_kind != ResponseKind::Real) {
    throw DataError("regression prior needs a real-valued response");
  }
  if (train.rows() < 2) throw DataError("need at least two rows for a regression prior");
  const double mean = train.response_mean();
  const double var = train.response_variance();
  if (!(var > 0.0)) throw DataError("response is constant; cannot derive a prior variance");
  return model::normal_prior(mean, var, var);
}

Dataset take_rows(const Dataset& all, const std::vector<int>& rows) {
  Dataset out;
  out.response_kind = all.response_kind;
  out.feature_names = all.feature_names;
  out.class_names = all.class_names;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), all.features.cols());
  out.responses.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = all.features.row(rows[i]);
    out.responses.push_back(all.responses[static_cast<size_t>(rows[i])]);
  }
  return out;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& all, double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in (0, 1)");
  }
  const int n = all.rows();
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  // splitmix64-driven Fisher-Yates: stable across standard libraries.
  std::uint64_t state = seed;
  auto next_u64 = [&state]() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  for (int i = n - 1; i > 0; --i) {
    const std::uint64_t bound = static_cast<std::uint64_t>(i) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do {
      draw = next_u64();
    } while (draw >= limit);
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(draw % bound)]);
  }

  int n_test = static_cast<int>(std::lround(test_fraction * n));
  n_test = std::clamp(n_test, 1, n - 1);
  std::vector<int> test_rows(order.begin(), order.begin() + n_test);
  std::vector<int> train_rows(order.begin() + n_test, order.end());
  // keep original row order inside each side for reproducible file dumps
  std::sort(test_rows.begin(), test_rows.end());
  std::sort(train_rows.begin(), train_rows.end());
  return {take_rows(all, train_rows), take_rows(all, test_rows)};
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file for checksum: " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

}  // namespace bknn::data
