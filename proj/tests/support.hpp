#pragma once

// Shared helpers for the test programs: a seeded value generator and tolerance comparisons.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

namespace bcsgap::testing {

/// Fixed-seed source of random draws for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

  /// Any finite double, including subnormals and both signs, from random bit patterns.
  double any_finite() {
    while (true) {
      const std::uint64_t bits = engine_();
      double v;
      static_assert(sizeof v == sizeof bits);
      std::memcpy(&v, &bits, sizeof v);
      if (std::isfinite(v)) return v;
    }
  }

 private:
  std::mt19937_64 engine_;
};

inline double sup_relative_error(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  return (got - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff();
}

inline std::filesystem::path config_dir() { return BCSGAP_CONFIG_DIR; }

inline std::vector<std::filesystem::path> shipped_configs() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(config_dir()))
    if (e.path().extension() == ".toml") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace bcsgap::testing
