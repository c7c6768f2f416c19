#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Core>

namespace ttd {

/// Deterministic, platform-independent random stream.
///
/// std::normal_distribution is implementation-defined, so Gaussian draws are
/// produced by Box-Muller on top of mt19937_64 instead. Substreams are derived
/// by splitmix64 so trials and solver stages never share state.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed ^ 0x5851F42D4C957F2DULL)) {}

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  /// Seed for an independent substream identified by a tag (and optional index).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
    return splitmix64(seed ^ splitmix64(tag + 0x9E3779B97F4A7C15ULL * (index + 1)));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Magnitude uniform on [lo, hi], random sign. Keeps coefficients away from 0.
  double signed_uniform(double lo, double hi) {
    const double magnitude = lo + (hi - lo) * uniform01();
    return (engine_() & 1u) ? magnitude : -magnitude;
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ttd
