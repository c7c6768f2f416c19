#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace ttd::dodd {

/// Diagonal-orthogonal-diagonal factors of a (0-inflated) matrix:
/// diag(lambda) * Q * diag(mu) reproduces the input when converged.
struct Factors {
  Eigen::VectorXd lambda;  // d entries, trailing zeros outside the row support
  Eigen::VectorXd mu;      // d entries, trailing zeros outside the column support
  Eigen::MatrixXd Q;       // d x d, orthogonal at convergence
  std::size_t d = 0;
  std::size_t m = 0;  // original block rows
  std::size_t n = 0;  // original block columns
  int iterations = 0;
  bool converged = false;

  Eigen::MatrixXd reconstruction() const {
    return lambda.asDiagonal() * Q * mu.asDiagonal();
  }
  /// ||Q Q^T - I||_F / ||I||_F, the success statistic of the solvers.
  double orthogonality_error() const;
};

/// Embeds an m x n matrix as the top-left block of a d x d zero matrix.
Eigen::MatrixXd zero_inflate(const Eigen::MatrixXd& Xbar, std::size_t d);

struct SquareOptions {
  double tol = 1e-28;
  int max_iter = 1000;
  // Stop early when the fit residual has not halved within this many
  // iterations; in double precision the residual floors near n^2 eps^2, which
  // can sit above tol for large n while the factors are fully converged.
  int stall_window = 100;
};

/// Square DODD via alternate row/column balancing of the entrywise square.
/// Requires a zero-free matrix; returns converged = false at the iteration cap.
Factors sinkhorn_square(const Eigen::MatrixXd& X, const SquareOptions& opts = {});

struct TandemOptions {
  double tol = 1e-28;  // stop when the squared-residual change falls below
  int max_iter = 100;
};

struct TandemResult {
  Eigen::MatrixXd V;       // orthonormal columns
  Eigen::VectorXd scales;  // diagonal of D
  double residual = 0.0;   // final ||A - V D B||^2
  int iterations = 0;
  std::vector<double> residual_history;  // one entry per iteration, non-increasing
};

/// Fits A ~ V D B with V orthonormal-columns and D diagonal by alternating
/// the polar factor of A B^T D with the per-column scale update.
TandemResult tandem_procrustes(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const TandemOptions& opts = {});

/// Square DODD by alternating tandem fits of Q^T and Q, absorbing the scale
/// into the diagonals until the latest fit residual drops below tol.
Factors procrustes_square(const Eigen::MatrixXd& X, const SquareOptions& opts = {},
                          const TandemOptions& tandem = {});

struct GeneralOptions {
  double tol = 1e-28;
  int max_iter = 1000;  // tandem pairs
  int learn_rate = 2;   // pairs between unknown-region refreshes
  int stall_window = 100;
  std::uint64_t seed = 0;
  TandemOptions tandem{};
};

/// General DODD of the d x d 0-inflation of an m x n matrix: the unknown
/// region of Q starts from seeded Gaussian values and is repeatedly replaced
/// by entries of the latest orthonormal fit.
Factors general(const Eigen::MatrixXd& Xbar, std::size_t d, const GeneralOptions& opts = {});

}  // namespace ttd::dodd
