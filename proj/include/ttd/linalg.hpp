#pragma once

#include <cstddef>
#include <utility>

#include <Eigen/Core>

#include "ttd/rng.hpp"

namespace ttd {

struct EigRank {
  Eigen::VectorXd eigenvalues;   // ordered by decreasing magnitude
  Eigen::MatrixXd eigenvectors;  // matching columns, sign-normalized
  std::size_t rank = 0;          // count of |sigma_i| > rank_tol * max|sigma|
};

/// Full eigendecomposition of a (nearly) symmetric matrix with numerical rank
/// detection. Symmetrizes as (M + M^T)/2 first; eigenvectors are normalized so
/// the largest-magnitude entry is positive (ties broken by lowest index).
EigRank symmetric_eig_rank(const Eigen::MatrixXd& M, double rank_tol = 1e-8);

/// Best rank-1 factorization R ~ lambda mu^T from the leading singular triple:
/// lambda = sigma_1 * zeta, mu = eta. A zero matrix yields lambda = 0.
std::pair<Eigen::VectorXd, Eigen::VectorXd> rank_one_svd_factor(const Eigen::MatrixXd& R);

/// Orthogonal polar factor U W^T from the SVD A = U S W^T (orthonormal columns).
Eigen::MatrixXd polar_factor(const Eigen::MatrixXd& A);

/// Extends an n x r matrix with orthonormal columns to an n x n orthogonal
/// matrix via modified Gram-Schmidt on fresh Gaussian columns, redrawing on
/// near-dependence.
Eigen::MatrixXd orthonormal_completion(const Eigen::MatrixXd& partial, Rng& rng);

struct NullspaceVector {
  Eigen::VectorXd vector;   // unit right singular vector with smallest singular value
  std::size_t nullity = 0;  // singular values <= null_tol * max singular value
};

NullspaceVector smallest_singular_vector(const Eigen::MatrixXd& A, double null_tol = 1e-8);

/// Largest principal angle (radians) between the column spans of two
/// orthonormal-column matrices; test helper for UTPS subspace comparisons.
double max_principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// Orthonormalizes Gaussian data into an n x r frame (thin QR, deterministic
/// column signs).
Eigen::MatrixXd random_orthonormal(Eigen::Index n, Eigen::Index r, Rng& rng);

}  // namespace ttd
