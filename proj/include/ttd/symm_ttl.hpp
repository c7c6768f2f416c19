#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ttd/rng.hpp"
#include "ttd/tensor.hpp"
#include "ttd/train.hpp"

namespace ttd::ttl {

struct Options {
  double rank_tol = 1e-8;
  double eps_denom = 1e-10;
  double null_tol = 1e-8;  // nullspace detection for the symmetrizer
  int end_retries = 5;     // fresh generic vectors before DegenerateContraction
  int als_max_sweeps = 50;
  double als_tol = 1e-12;
  std::uint64_t seed = 0;
};

enum class Side { Left, Right };
enum class Direction { LR, RL };

struct VectorSet {
  std::size_t rank = 0;
  Eigen::MatrixXd vectors;  // n x rank, orthonormal columns
};

/// Recovers the orthonormal set at one end of the train from the
/// eigendecomposition of T contracted with a generic vector on all modes but
/// the two end modes.
VectorSet extract_end_vectors(const DenseTensor& T, Side side, Rng& rng, double rank_tol = 1e-8,
                              int retries = 5);

struct Symmetrizer {
  Eigen::VectorXd scaling;  // unit-norm nullspace vector, [1] when r = 1
  std::size_t nullity = 0;  // 1 for generic inputs; larger in degenerate cases
};

/// Scaling that symmetrizes the top-left block: builds the pairwise
/// skew-comparison system (row per unordered pair (i, j): entry i = Tbar_ij,
/// entry j = -Tbar_ji) and returns a unit nullspace vector. Throws
/// NoSymmetrizer when the system has no nullspace within tolerance.
Symmetrizer symmetrizing_scaling(const Eigen::MatrixXd& Tbar, double null_tol = 1e-8);

/// Fills the unknown bottom-right (n-r) x (n-r) block of a symmetric matrix
/// whose first r rows (and columns) are known, so that every completed row
/// lies in the row space of the known rows.
Eigen::MatrixXd kernel_complete(const Eigen::MatrixXd& S, std::size_t r);

struct SweepResult {
  Direction direction = Direction::LR;
  // by_position[j] holds the set recovered for carriage j (1-based); the end
  // position is filled from the input set. Entries at and beyond a rank
  // increase stay empty.
  std::vector<std::optional<VectorSet>> by_position;
  std::optional<std::size_t> terminated_at;
  std::uint64_t seed = 0;
};

/// Sequential kernel completion from one end of the train toward the other.
SweepResult directional_sweep(const DenseTensor& T, std::size_t L, Direction direction,
                              const VectorSet& end_set, Rng& rng, const Options& opts = {});

/// Rank-1 alternating least squares; converges in one sweep on exact rank-1
/// input. A zero tensor yields zero factors.
std::vector<Eigen::VectorXd> rank_one_als(const DenseTensor& R, int max_sweeps = 50,
                                          double tol = 1e-12);

struct PositionInfo {
  Direction direction = Direction::LR;
  std::size_t rank = 0;
};

struct Info {
  std::uint64_t seed = 0;
  std::vector<PositionInfo> positions;  // provenance per carriage
};

/// Full decomposition of a symmetric orthogonal train of length L >= 3 under
/// the decreasing-ranks condition: both sweeps, per-position selection by
/// higher rank (tie -> LR), coefficient tensor, rank-1 ALS.
TrainDecomposition decompose(const DenseTensor& T, std::size_t L, const Options& opts = {},
                             Info* info = nullptr);

}  // namespace ttd::ttl
