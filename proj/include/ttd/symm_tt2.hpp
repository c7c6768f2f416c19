#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "ttd/rng.hpp"
#include "ttd/tensor.hpp"
#include "ttd/train.hpp"

namespace ttd::tt2 {

struct Options {
  bool whiten = false;
  int max_psd_attempts = 200;  // draws allowed before PsdSearchFailed
  double rank_tol = 1e-8;
  double psd_tol = 1e-10;    // accept eigenvalues >= -psd_tol * lambda_max
  double eps_denom = 1e-10;  // genericity floor for junction inner products
  int contracted_edges = 1;
  std::uint64_t seed = 0;
};

struct WhiteningMaps {
  Eigen::MatrixXd W_A;     // r_A x n
  Eigen::MatrixXd W_B;     // r_B x n
  Eigen::MatrixXd pinv_A;  // n x r_A, W_A * pinv_A = I
  Eigen::MatrixXd pinv_B;  // n x r_B
  int attempts = 0;        // PSD draws consumed
};

struct WhitenResult {
  std::optional<DenseTensor> whitened;  // empty when a skinny rank is zero
  WhiteningMaps maps;
};

struct MomentWhitening {
  Eigen::MatrixXd W;     // rank x n
  Eigen::MatrixXd pinv;  // n x rank
  std::size_t rank = 0;
};

/// Skinny eigendecomposition of a PSD moment matrix into the whitening map
/// W = D^{-1/2} X^T and its right inverse X D^{1/2}.
MomentWhitening whitening_from_moment(const Eigen::MatrixXd& C, double rank_tol);

/// Draws generic weight matrices until both moment matrices are PSD, then
/// whitens T down to r_A x r_A x r_B x r_B. Throws PsdSearchFailed when the
/// attempt budget is exhausted.
WhitenResult whiten(const DenseTensor& T, int max_attempts, Rng& rng, double rank_tol = 1e-8,
                    double psd_tol = 1e-10);

/// Coefficient matrix R_ij = T(U_i, U_i, V_j, V_j) / <innerU_i, innerV_j>^p.
/// The contraction may run in whitened coordinates while the denominators use
/// original-space vectors.
Eigen::MatrixXd coefficient_matrix(const DenseTensor& T, const Eigen::MatrixXd& U,
                                   const Eigen::MatrixXd& V, const Eigen::MatrixXd& inner_u,
                                   const Eigen::MatrixXd& inner_v, int contracted_edges = 1,
                                   double eps_denom = 1e-10);

struct Info {
  std::uint64_t seed = 0;
  double rank_tol = 1e-8;
  bool whitened = false;
  int psd_attempts = 0;
};

/// Decomposition of a symmetric length-2 train: slice method directly in the
/// orthogonal case, whitening first otherwise.
TrainDecomposition decompose(const DenseTensor& T, const Options& opts = {}, Info* info = nullptr);

}  // namespace ttd::tt2
