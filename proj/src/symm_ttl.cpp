#include "ttd/symm_ttl.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "ttd/errors.hpp"
#include "ttd/linalg.hpp"

namespace ttd::ttl {

namespace {

void require_train_shape(const DenseTensor& T, std::size_t L) {
  if (L < 3) throw Error(ErrorCode::DimensionError, "train length must be >= 3");
  if (T.order() != L + 2)
    throw Error(ErrorCode::DimensionError, "tensor order must equal train length + 2");
  for (std::size_t k = 1; k < T.order(); ++k)
    if (T.dim(k) != T.dim(0))
      throw Error(ErrorCode::DimensionError, "expected equal mode dimensions");
}

// Contract every mode with v except the two free ones; returns the free-mode
// matrix with rows indexed by free_row and columns by free_col.
Eigen::MatrixXd bimode_contraction(const DenseTensor& T, std::size_t free_row,
                                   std::size_t free_col, const Eigen::VectorXd& v) {
  std::vector<ModeOp> ops(T.order());
  for (std::size_t k = 0; k < T.order(); ++k)
    if (k != free_row && k != free_col) ops[k] = v;
  const DenseTensor M = multilinear_contract(T, ops);
  Eigen::MatrixXd out(M.dim(0), M.dim(1));
  for (std::size_t i = 0; i < M.dim(0); ++i)
    for (std::size_t j = 0; j < M.dim(1); ++j) out(i, j) = M[i * M.dim(1) + j];
  return free_row < free_col ? out : Eigen::MatrixXd(out.transpose());
}

}  // namespace

VectorSet extract_end_vectors(const DenseTensor& T, Side side, Rng& rng, double rank_tol,
                              int retries) {
  if (T.order() < 4) throw Error(ErrorCode::DimensionError, "tensor order must be >= 4");
  for (std::size_t k = 1; k < T.order(); ++k)
    if (T.dim(k) != T.dim(0))
      throw Error(ErrorCode::DimensionError, "expected equal mode dimensions");
  const std::size_t order = T.order();
  const std::size_t f1 = side == Side::Left ? 0 : order - 2;
  const std::size_t f2 = side == Side::Left ? 1 : order - 1;
  const double tensor_norm = T.frobenius_norm();

  for (int attempt = 0; attempt < retries; ++attempt) {
    const Eigen::VectorXd v = rng.normal_vector(static_cast<Eigen::Index>(T.dim(0)));
    const Eigen::MatrixXd M = bimode_contraction(T, f1, f2, v);
    if (M.norm() <= 1e-13 * std::max(tensor_norm, 1.0)) continue;
    const EigRank eig = symmetric_eig_rank(M, rank_tol);
    if (eig.rank == 0) continue;
    return VectorSet{eig.rank, eig.eigenvectors.leftCols(static_cast<Eigen::Index>(eig.rank))};
  }
  throw Error(ErrorCode::DegenerateContraction,
              "end contraction numerically zero after " + std::to_string(retries) + " draws");
}

Symmetrizer symmetrizing_scaling(const Eigen::MatrixXd& Tbar, double null_tol) {
  if (Tbar.rows() != Tbar.cols() || Tbar.rows() < 1)
    throw Error(ErrorCode::DimensionError, "expected a square block of size >= 1");
  const Eigen::Index r = Tbar.rows();
  if (r == 1) return Symmetrizer{Eigen::VectorXd::Ones(1), 1};

  const Eigen::Index pairs = r * (r - 1) / 2;
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(pairs, r);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = i + 1; j < r; ++j, ++row) {
      system(row, i) = Tbar(i, j);
      system(row, j) = -Tbar(j, i);
    }

  const NullspaceVector ns = smallest_singular_vector(system, null_tol);
  if (ns.nullity == 0)
    throw Error(ErrorCode::NoSymmetrizer, "symmetrizing system has trivial nullspace");
  return Symmetrizer{ns.vector, ns.nullity};
}

Eigen::MatrixXd kernel_complete(const Eigen::MatrixXd& S, std::size_t r) {
  if (S.rows() != S.cols()) throw Error(ErrorCode::DimensionError, "matrix must be square");
  const Eigen::Index n = S.rows();
  const Eigen::Index rr = static_cast<Eigen::Index>(r);
  if (rr > n) throw Error(ErrorCode::DimensionError, "known row count exceeds matrix size");
  if (rr == n) return S;
  if (rr == 0) {
    if (S.norm() > 0.0)
      throw Error(ErrorCode::CompletionAmbiguous, "no known rows to complete from");
    return S;
  }

  // Row i > r of the completed matrix is a combination c of the known rows;
  // restricting to the first r columns gives c^T K = S(i, 0:r), which pins c
  // down from the known entries.
  const Eigen::MatrixXd K_t = S.topLeftCorner(rr, rr).transpose();
  const Eigen::MatrixXd rhs = S.block(rr, 0, n - rr, rr).transpose();  // r x (n-r)
  if (K_t.norm() == 0.0 && rhs.norm() > 0.0)
    throw Error(ErrorCode::CompletionAmbiguous, "known block is numerically zero");

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(K_t);
  const Eigen::MatrixXd combo = cod.solve(rhs);  // r x (n-r), K^T * combo = rhs

  Eigen::MatrixXd out = S;
  const Eigen::MatrixXd fill = combo.transpose() * S.block(0, rr, rr, n - rr);
  out.block(rr, rr, n - rr, n - rr) = 0.5 * (fill + fill.transpose());
  return out;
}

SweepResult directional_sweep(const DenseTensor& T, std::size_t L, Direction direction,
                              const VectorSet& end_set, Rng& rng, const Options& opts) {
  require_train_shape(T, L);
  const Eigen::Index n = static_cast<Eigen::Index>(T.dim(0));

  SweepResult result;
  result.direction = direction;
  result.by_position.assign(L + 1, std::nullopt);

  const std::size_t end_position = direction == Direction::LR ? 1 : L;
  result.by_position[end_position] = end_set;

  VectorSet previous = end_set;
  const bool left_to_right = direction == Direction::LR;
  for (std::size_t step = 0; step + 2 < L; ++step) {
    const std::size_t j = left_to_right ? 2 + step : L - 1 - step;

    const Eigen::MatrixXd basis = orthonormal_completion(previous.vectors, rng);
    const Eigen::VectorXd v = rng.normal_vector(n);
    // Free modes: the previous carriage's mode next to the junction and the
    // current carriage's mode; rows must live in the previous carriage basis.
    Eigen::MatrixXd M;
    if (left_to_right) {
      M = bimode_contraction(T, j - 1, j, v);
    } else {
      M = bimode_contraction(T, j + 1, j, v);  // transposed orientation
    }

    Eigen::MatrixXd S = basis.transpose() * M * basis;
    const Eigen::Index r_prev = static_cast<Eigen::Index>(previous.rank);

    if (r_prev > 1) {
      const Symmetrizer sym = symmetrizing_scaling(S.topLeftCorner(r_prev, r_prev), opts.null_tol);
      S.topRows(r_prev) = sym.scaling.asDiagonal() * S.topRows(r_prev);
    }
    // Only the first r_prev rows carry information; mirror them into the
    // first columns and leave the unknown block to kernel completion.
    S.block(r_prev, 0, n - r_prev, r_prev) = S.block(0, r_prev, r_prev, n - r_prev).transpose();
    S.block(r_prev, r_prev, n - r_prev, n - r_prev).setZero();

    const Eigen::MatrixXd completed = kernel_complete(S, previous.rank);
    const Eigen::MatrixXd conjugated = basis * completed * basis.transpose();
    const EigRank eig = symmetric_eig_rank(conjugated, opts.rank_tol);

    if (eig.rank > previous.rank) {
      result.terminated_at = j;
      break;
    }
    VectorSet current{eig.rank, eig.eigenvectors.leftCols(static_cast<Eigen::Index>(eig.rank))};
    result.by_position[j] = current;
    previous = std::move(current);
  }
  return result;
}

std::vector<Eigen::VectorXd> rank_one_als(const DenseTensor& R, int max_sweeps, double tol) {
  const std::size_t order = R.order();
  if (order == 0) throw Error(ErrorCode::DimensionError, "scalar input has no factors");
  const double norm = R.frobenius_norm();

  std::vector<Eigen::VectorXd> factors(order);
  for (std::size_t k = 0; k < order; ++k)
    factors[k] = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(R.dim(k)));
  if (norm == 0.0) {
    for (auto& f : factors) f.setZero();
    return factors;
  }

  Rng restart_rng(0x415354ULL);
  double previous_error = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (std::size_t k = 0; k < order; ++k) {
      std::vector<ModeOp> ops(order);
      double denom = 1.0;
      for (std::size_t m = 0; m < order; ++m) {
        if (m == k) continue;
        ops[m] = factors[m];
        denom *= factors[m].squaredNorm();
      }
      if (denom == 0.0) {
        // Degenerate start (an init orthogonal to the true factor); restart.
        for (std::size_t m = 0; m < order; ++m)
          factors[m] = restart_rng.normal_vector(static_cast<Eigen::Index>(R.dim(m)));
        denom = 1.0;
        for (std::size_t m = 0; m < order; ++m)
          if (m != k) denom *= factors[m].squaredNorm();
        ops.assign(order, ModeOp{});
        for (std::size_t m = 0; m < order; ++m)
          if (m != k) ops[m] = factors[m];
      }
      const DenseTensor g = multilinear_contract(R, ops);
      factors[k] = Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()))
                   / denom;
    }

    // Residual of the current outer product.
    DenseTensor recon(R.shape());
    {
      std::vector<const Eigen::VectorXd*> vecs(order);
      for (std::size_t k = 0; k < order; ++k) vecs[k] = &factors[k];
      // reuse the train accumulation pattern: depth-first outer product
      struct Accum {
        static void run(double* dst, double w, const std::vector<const Eigen::VectorXd*>& vs,
                        std::size_t depth, std::size_t block) {
          const Eigen::VectorXd& vec = *vs[depth];
          if (depth + 1 == vs.size()) {
            for (Eigen::Index i = 0; i < vec.size(); ++i) dst[i] += w * vec[i];
            return;
          }
          const std::size_t next = block / static_cast<std::size_t>(vec.size());
          for (Eigen::Index i = 0; i < vec.size(); ++i)
            run(dst + static_cast<std::size_t>(i) * next, w * vec[i], vs, depth + 1, next);
        }
      };
      Accum::run(recon.data(), 1.0, vecs, 0, recon.size());
    }
    const double err = relative_error(recon, R);
    if (err < tol || std::abs(previous_error - err) < tol) break;
    previous_error = err;
  }
  return factors;
}

TrainDecomposition decompose(const DenseTensor& T, std::size_t L, const Options& opts,
                             Info* info) {
  require_train_shape(T, L);

  Rng left_rng(Rng::derive(opts.seed, 0x77544C, 1));
  Rng right_rng(Rng::derive(opts.seed, 0x77544C, 2));
  const VectorSet left_end = extract_end_vectors(T, Side::Left, left_rng, opts.rank_tol,
                                                 opts.end_retries);
  const VectorSet right_end = extract_end_vectors(T, Side::Right, right_rng, opts.rank_tol,
                                                  opts.end_retries);

  Rng lr_rng(Rng::derive(opts.seed, 0x77544C, 3));
  Rng rl_rng(Rng::derive(opts.seed, 0x77544C, 4));
  SweepResult lr = directional_sweep(T, L, Direction::LR, left_end, lr_rng, opts);
  SweepResult rl = directional_sweep(T, L, Direction::RL, right_end, rl_rng, opts);
  lr.seed = Rng::derive(opts.seed, 0x77544C, 3);
  rl.seed = Rng::derive(opts.seed, 0x77544C, 4);

  Info local;
  local.seed = opts.seed;
  local.positions.resize(L + 1);

  std::vector<VectorSet> chosen(L + 1);
  chosen[1] = left_end;
  chosen[L] = right_end;
  local.positions[1] = {Direction::LR, left_end.rank};
  local.positions[L] = {Direction::RL, right_end.rank};
  for (std::size_t j = 2; j <= L - 1; ++j) {
    const auto& a = lr.by_position[j];
    const auto& b = rl.by_position[j];
    if (!a && !b)
      throw Error(ErrorCode::DecompositionFailed,
                  "both sweeps terminated before position " + std::to_string(j));
    if (a && (!b || a->rank >= b->rank)) {
      chosen[j] = *a;
      local.positions[j] = {Direction::LR, a->rank};
    } else {
      chosen[j] = *b;
      local.positions[j] = {Direction::RL, b->rank};
    }
    if (chosen[j].rank == 0)
      throw Error(ErrorCode::DecompositionFailed,
                  "rank 0 recovered at position " + std::to_string(j));
  }

  // Coefficient tensor: full contraction against every tuple of recovered
  // vectors, divided by the chain of junction inner products.
  std::vector<std::size_t> rshape(L);
  for (std::size_t j = 0; j < L; ++j) rshape[j] = chosen[j + 1].rank;
  DenseTensor coeff(rshape);

  // Stage the contraction: peel carriages left to right, reusing prefixes.
  struct Staged {
    const std::vector<VectorSet>& sets;
    std::size_t L;
    double eps_denom;
    DenseTensor* out;
    std::vector<std::size_t> tuple;

    void walk(const DenseTensor& current, std::size_t carriage, double denom,
              const Eigen::VectorXd* prev_vec) {
      const VectorSet& set = sets[carriage];
      for (std::size_t i = 0; i < set.rank; ++i) {
        const Eigen::VectorXd x = set.vectors.col(static_cast<Eigen::Index>(i));
        double new_denom = denom;
        if (prev_vec != nullptr) {
          const double inner = prev_vec->dot(x);
          if (std::abs(inner) <= eps_denom)
            throw Error(ErrorCode::DegenerateInnerProduct,
                        "junction inner product below genericity floor");
          new_denom *= inner;
        }
        tuple[carriage - 1] = i;
        const bool two_modes = carriage == 1 || carriage == L;
        std::vector<ModeOp> ops(current.order());
        ops[0] = x;
        if (two_modes) ops[1] = x;
        const DenseTensor next = multilinear_contract(current, ops);
        if (carriage == L) {
          out->at(tuple) = next[0] / new_denom;
        } else {
          walk(next, carriage + 1, new_denom, &x);
        }
      }
    }
  };

  Staged staged{chosen, L, opts.eps_denom, &coeff, std::vector<std::size_t>(L, 0)};
  staged.walk(T, 1, 1.0, nullptr);

  const std::vector<Eigen::VectorXd> lambdas = rank_one_als(coeff, opts.als_max_sweeps,
                                                            opts.als_tol);

  TrainDecomposition result;
  result.carriages.reserve(L);
  for (std::size_t j = 0; j < L; ++j)
    result.carriages.push_back(Carriage{SymmetricCarriage{lambdas[j], chosen[j + 1].vectors, true}});
  if (info) *info = local;
  return result;
}

}  // namespace ttd::ttl
