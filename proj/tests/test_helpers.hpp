#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ttd/linalg.hpp"
#include "ttd/rng.hpp"
#include "ttd/train.hpp"

namespace ttd::testing {

inline Eigen::VectorXd basis_vector(Eigen::Index n, Eigen::Index k) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e[k] = 1.0;
  return e;
}

inline Eigen::VectorXd bounded_coefficients(Eigen::Index count, Rng& rng) {
  Eigen::VectorXd out(count);
  for (Eigen::Index i = 0; i < count; ++i) out[i] = rng.signed_uniform(0.5, 2.0);
  return out;
}

inline SymmetricCarriage random_symmetric_carriage(Eigen::Index n, Eigen::Index rank, Rng& rng) {
  const Eigen::MatrixXd vectors = random_orthonormal(n, rank, rng);
  return SymmetricCarriage{bounded_coefficients(rank, rng), vectors, true};
}

/// Greedy UTPS match: pairs recovered columns with ground-truth columns by the
/// largest absolute inner product and returns max_i || r_i - s_i t_{pi(i)} ||.
inline double utps_match_error(const Eigen::MatrixXd& recovered, const Eigen::MatrixXd& truth) {
  if (recovered.cols() != truth.cols()) return std::numeric_limits<double>::infinity();
  const Eigen::Index r = recovered.cols();
  std::vector<bool> used(static_cast<std::size_t>(r), false);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < r; ++i) {
    Eigen::Index best = -1;
    double best_inner = -1.0;
    for (Eigen::Index j = 0; j < r; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double inner = std::abs(recovered.col(i).dot(truth.col(j)));
      if (inner > best_inner) {
        best_inner = inner;
        best = j;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    const double sign = recovered.col(i).dot(truth.col(best)) >= 0.0 ? 1.0 : -1.0;
    worst = std::max(worst, (recovered.col(i) - sign * truth.col(best)).norm());
  }
  return worst;
}

}  // namespace ttd::testing
