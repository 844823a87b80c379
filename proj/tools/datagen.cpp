// Generates the bundled datasets:
//
//   ripley_train.csv / ripley_test.csv
//     Two-class synthetic data in the style of Ripley's classic benchmark:
//     each class is an equal mixture of two isotropic Gaussians
//     (class a: centres (-0.3, 0.7) and (0.4, 0.7); class b: centres
//     (-0.7, 0.3) and (0.3, 0.3); variance 0.03). 125 + 125 training
//     points, 500 + 500 test points.
//
//   ccpp.csv
//     Power-plant-style regression set: 4 ambient features (AT, V, AP, RH)
//     and a net energy output PE driven by a smooth nonlinear response
//     surface with heteroscedastic noise and a small fraction of
//     heavy-noise outliers. 9568 rows.
//
//   toy_train.csv
//     The 29-point two-class toy example used in the README walkthrough.
//
// All draws come from a splitmix64 + Box-Muller pipeline, so a seed
// reproduces files byte for byte on any platform.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() {  // (0, 1)
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  int below(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct RipleyRow {
  double x, y;
  char label;
};

void write_ripley(const std::string& path, int per_class, Rng& rng) {
  // class a sits on the upper band, class b on the lower one
  const double centres_a[2][2] = {{-0.3, 0.7}, {0.4, 0.7}};
  const double centres_b[2][2] = {{-0.7, 0.3}, {0.3, 0.3}};
  const double sd = std::sqrt(0.03);

  std::vector<RipleyRow> rows;
  rows.reserve(static_cast<size_t>(2 * per_class));
  for (int i = 0; i < per_class; ++i) {
    const auto& ca = centres_a[rng.below(2)];
    rows.push_back({ca[0] + sd * rng.normal(), ca[1] + sd * rng.normal(), 'a'});
    const auto& cb = centres_b[rng.below(2)];
    rows.push_back({cb[0] + sd * rng.normal(), cb[1] + sd * rng.normal(), 'b'});
  }
  for (size_t i = rows.size() - 1; i > 0; --i) {
    std::swap(rows[i], rows[static_cast<size_t>(rng.below(static_cast<int>(i) + 1))]);
  }

  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << "x1,x2,label\n";
  for (const auto& r : rows) {
    out << fmt(r.x) << ',' << fmt(r.y) << ',' << r.label << '\n';
  }
}

struct CcppPoint {
  double at, v, ap, rh;
};

CcppPoint draw_ambient(Rng& rng) {
  CcppPoint p;
  // ambient temperature: two seasonal lobes
  p.at = (rng.uniform() < 0.5) ? 13.0 + 5.0 * rng.normal() : 26.0 + 5.0 * rng.normal();
  p.at = std::clamp(p.at, 2.0, 37.0);
  // exhaust vacuum tracks temperature
  p.v = std::clamp(54.3 + 1.43 * (p.at - 19.65) + 6.9 * rng.normal(), 25.4, 81.6);
  p.ap = std::clamp(1013.0 - 0.41 * (p.at - 19.65) + 5.1 * rng.normal(), 993.0, 1034.0);
  p.rh = std::clamp(73.3 - 1.05 * (p.at - 19.65) + 12.2 * rng.normal(), 25.6, 100.2);
  return p;
}

double smooth_surface(const CcppPoint& p) {
  // smooth trend, a regime transition around AT = 16.5 and medium-scale
  // waviness, so the useful neighbourhood size varies across feature space
  return 454.4 - 1.55 * (p.at - 19.65) - 0.20 * (p.v - 54.3) + 0.062 * (p.ap - 1013.0) -
         0.145 * (p.rh - 73.3) - 0.010 * (p.at - 19.65) * (p.at - 19.65) +
         5.5 * std::tanh((p.at - 16.5) / 1.2) + 2.2 * std::sin((p.at - 2.0) / 4.2) +
         1.2 * std::sin(p.v / 5.5);
}

void write_ccpp(const std::string& path, int n, Rng& rng) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << "AT,V,AP,RH,PE\n";
  for (int i = 0; i < n; ++i) {
    const CcppPoint p = draw_ambient(rng);
    double pe = smooth_surface(p);
    // heteroscedastic noise plus sparse true outliers whose output sits far
    // from every neighbourhood's level
    pe += (1.2 + 0.045 * p.at) * rng.normal();
    if (rng.uniform() < 0.06) {
      const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
      pe += side * (8.0 + std::abs(5.0 * rng.normal()));
    }
    out << fmt(p.at) << ',' << fmt(p.v) << ',' << fmt(p.ap) << ',' << fmt(p.rh) << ','
        << fmt(pe) << '\n';
  }
}

void write_toy(const std::string& path) {
  static const struct {
    double x, y;
    char label;
  } rows[] = {
      {0.6544, 0.4566, 'a'},          {0.6010571622, 0.965788727, 'b'},
      {0.7245673032, 0.8228041473, 'b'}, {0.9012435735, 0.7790022197, 'b'},
      {0.9366343055, 0.9995967383, 'b'}, {0.808863355, 0.6976428854, 'b'},
      {0.5173628945, 0.8098629959, 'b'}, {0.4453969078, 0.2679131254, 'b'},
      {0.666278128, 0.05730181278, 'b'}, {0.9366323209, 0.6000484448, 'b'},
      {0.5492957278, 0.9045819851, 'b'}, {0.4753643067, 0.6483082918, 'a'},
      {0.1620806353, 0.9113179007, 'b'}, {0.2138134727, 0.696091884, 'b'},
      {0.8511442833, 0.9456421688, 'b'}, {0.2924374165, 0.3247738298, 'b'},
      {0.9482773183, 0.1351774703, 'b'}, {0.8674685266, 0.9895811298, 'b'},
      {0.1702041479, 0.1335612509, 'b'}, {0.08642798335, 0.951809558, 'b'},
      {0.662883892, 0.3702780315, 'a'},  {0.579029129, 0.7239042902, 'a'},
      {0.828672222, 0.6244064711, 'b'},  {0.1802977616, 0.3724057226, 'b'},
      {0.3645971478, 0.2169889233, 'b'}, {0.2834006093, 0.9934884499, 'b'},
      {0.2612909393, 0.3520839936, 'b'}, {0.4315876843, 0.4267978495, 'a'},
      {0.8646594311, 0.6531626056, 'b'},
  };
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << "x1,x2,label\n";
  for (const auto& r : rows) {
    out << fmt(r.x) << ',' << fmt(r.y) << ',' << r.label << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generate the bundled benchmark datasets"};

  std::string out_dir = "data";
  std::uint64_t ripley_train_seed = 101;
  std::uint64_t ripley_test_seed = 202;
  std::uint64_t ccpp_seed = 303;
  int ccpp_rows = 9568;

  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--ripley-train-seed", ripley_train_seed);
  app.add_option("--ripley-test-seed", ripley_test_seed);
  app.add_option("--ccpp-seed", ccpp_seed);
  app.add_option("--ccpp-rows", ccpp_rows);

  CLI11_PARSE(app, argc, argv);

  try {
    Rng train_rng(ripley_train_seed);
    write_ripley(out_dir + "/ripley_train.csv", 125, train_rng);
    Rng test_rng(ripley_test_seed);
    write_ripley(out_dir + "/ripley_test.csv", 500, test_rng);
    Rng ccpp_rng(ccpp_seed);
    write_ccpp(out_dir + "/ccpp.csv", ccpp_rows, ccpp_rng);
    write_toy(out_dir + "/toy_train.csv");
  } catch (const std::exception& e) {
    std::cerr << "datagen: " << e.what() << '\n';
    return 1;
  }
  std::cout << "wrote ripley_train.csv ripley_test.csv ccpp.csv toy_train.csv to " << out_dir
            << '\n';
  return 0;
}
