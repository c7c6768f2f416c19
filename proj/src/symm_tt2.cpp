#include "ttd/symm_tt2.hpp"

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "ttd/errors.hpp"
#include "ttd/linalg.hpp"

namespace ttd::tt2 {

namespace {

void require_4way_cubic(const DenseTensor& T) {
  if (T.order() != 4) throw Error(ErrorCode::DimensionError, "expected a 4-way tensor");
  const std::size_t n = T.dim(0);
  for (std::size_t k = 1; k < 4; ++k)
    if (T.dim(k) != n) throw Error(ErrorCode::DimensionError, "expected equal mode dimensions");
}

bool is_psd(const EigRank& eig, double psd_tol) {
  if (eig.eigenvalues.size() == 0) return true;
  const double lambda_max = eig.eigenvalues.maxCoeff();
  const double floor = -psd_tol * std::max(lambda_max, 0.0);
  return eig.eigenvalues.minCoeff() >= floor;
}

TrainDecomposition empty_decomposition(std::size_t n) {
  SymmetricCarriage a{Eigen::VectorXd(0), Eigen::MatrixXd(static_cast<Eigen::Index>(n), 0), true};
  SymmetricCarriage b = a;
  return TrainDecomposition{{Carriage{a}, Carriage{b}}, {}};
}

}  // namespace

MomentWhitening whitening_from_moment(const Eigen::MatrixXd& C, double rank_tol) {
  const EigRank eig = symmetric_eig_rank(C, rank_tol);
  MomentWhitening out;
  out.rank = eig.rank;
  const Eigen::Index r = static_cast<Eigen::Index>(eig.rank);
  const Eigen::MatrixXd X = eig.eigenvectors.leftCols(r);
  const Eigen::VectorXd d = eig.eigenvalues.head(r);
  const Eigen::VectorXd d_sqrt = d.array().sqrt();
  out.W = d_sqrt.array().inverse().matrix().asDiagonal() * X.transpose();
  out.pinv = X * d_sqrt.asDiagonal();
  return out;
}

WhitenResult whiten(const DenseTensor& T, int max_attempts, Rng& rng, double rank_tol,
                    double psd_tol) {
  require_4way_cubic(T);
  const std::size_t n = T.dim(0);

  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    const Eigen::MatrixXd rho = rng.normal_matrix(n, n);
    const Eigen::MatrixXd tau = rng.normal_matrix(n, n);
    const Eigen::MatrixXd C_A = weighted_slice_sum(T, {0, 1}, rho);
    const Eigen::MatrixXd C_B = weighted_slice_sum(T, {2, 3}, tau);

    const EigRank eig_a = symmetric_eig_rank(C_A, rank_tol);
    if (!is_psd(eig_a, psd_tol)) continue;
    const EigRank eig_b = symmetric_eig_rank(C_B, rank_tol);
    if (!is_psd(eig_b, psd_tol)) continue;

    WhitenResult result;
    const MomentWhitening wa = whitening_from_moment(C_A, rank_tol);
    const MomentWhitening wb = whitening_from_moment(C_B, rank_tol);
    result.maps = WhiteningMaps{wa.W, wb.W, wa.pinv, wb.pinv, attempt};
    if (wa.rank == 0 || wb.rank == 0) return result;  // degenerate maps, no whitened tensor

    const std::array<ModeOp, 4> ops{ModeOp{wa.W}, ModeOp{wa.W}, ModeOp{wb.W}, ModeOp{wb.W}};
    result.whitened = multilinear_contract(T, ops);
    return result;
  }
  throw Error(ErrorCode::PsdSearchFailed,
              "no PSD moment pair in " + std::to_string(max_attempts) + " attempts");
}

Eigen::MatrixXd coefficient_matrix(const DenseTensor& T, const Eigen::MatrixXd& U,
                                   const Eigen::MatrixXd& V, const Eigen::MatrixXd& inner_u,
                                   const Eigen::MatrixXd& inner_v, int contracted_edges,
                                   double eps_denom) {
  if (T.order() != 4) throw Error(ErrorCode::DimensionError, "expected a 4-way tensor");
  const Eigen::Index r_a = U.cols();
  const Eigen::Index r_b = V.cols();
  if (inner_u.cols() != r_a || inner_v.cols() != r_b)
    throw Error(ErrorCode::DimensionError, "inner vector counts disagree with contraction sets");

  Eigen::MatrixXd R(r_a, r_b);
  for (Eigen::Index i = 0; i < r_a; ++i) {
    const Eigen::VectorXd u = U.col(i);
    // Two leading modes contracted once per i; the rest are cheap quadratic forms.
    const std::array<ModeOp, 4> lead{ModeOp{u}, ModeOp{u}, ModeOp{}, ModeOp{}};
    const DenseTensor G = multilinear_contract(T, lead);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        Gm(G.data(), static_cast<Eigen::Index>(G.dim(0)), static_cast<Eigen::Index>(G.dim(1)));
    for (Eigen::Index j = 0; j < r_b; ++j) {
      double denom = 1.0;
      const double inner = inner_u.col(i).dot(inner_v.col(j));
      if (std::abs(inner) <= eps_denom)
        throw Error(ErrorCode::DegenerateInnerProduct,
                    "junction inner product below genericity floor");
      for (int p = 0; p < contracted_edges; ++p) denom *= inner;
      R(i, j) = V.col(j).dot(Gm * V.col(j)) / denom;
    }
  }
  return R;
}

TrainDecomposition decompose(const DenseTensor& T, const Options& opts, Info* info) {
  require_4way_cubic(T);
  const std::size_t n = T.dim(0);
  Rng rng(Rng::derive(opts.seed, 0x7732));

  Info local;
  local.seed = opts.seed;
  local.rank_tol = opts.rank_tol;
  local.whitened = opts.whiten;

  if (T.frobenius_norm() == 0.0) {
    if (info) *info = local;
    return empty_decomposition(n);
  }

  DenseTensor working = T;
  WhiteningMaps maps;
  if (opts.whiten) {
    WhitenResult wr = whiten(T, opts.max_psd_attempts, rng, opts.rank_tol, opts.psd_tol);
    maps = wr.maps;
    local.psd_attempts = maps.attempts;
    if (!wr.whitened.has_value())
      throw Error(ErrorCode::EmptyDecomposition, "whitening found rank 0 for a nonzero tensor");
    working = std::move(*wr.whitened);
  }

  const Eigen::MatrixXd S_A = weighted_slice_sum(working, {0, 1}, rng);
  const Eigen::MatrixXd S_B = weighted_slice_sum(working, {2, 3}, rng);
  const EigRank eig_a = symmetric_eig_rank(S_A, opts.rank_tol);
  const EigRank eig_b = symmetric_eig_rank(S_B, opts.rank_tol);
  if (eig_a.rank == 0 || eig_b.rank == 0)
    throw Error(ErrorCode::EmptyDecomposition, "slice sums have rank 0 for a nonzero tensor");

  const Eigen::Index r_a = static_cast<Eigen::Index>(eig_a.rank);
  const Eigen::Index r_b = static_cast<Eigen::Index>(eig_b.rank);
  const Eigen::MatrixXd U_bar = eig_a.eigenvectors.leftCols(r_a);
  const Eigen::MatrixXd V_bar = eig_b.eigenvectors.leftCols(r_b);

  Eigen::MatrixXd U = U_bar;
  Eigen::MatrixXd V = V_bar;
  Eigen::VectorXd scale_u = Eigen::VectorXd::Ones(r_a);
  Eigen::VectorXd scale_v = Eigen::VectorXd::Ones(r_b);
  if (opts.whiten) {
    U.resize(static_cast<Eigen::Index>(n), r_a);
    V.resize(static_cast<Eigen::Index>(n), r_b);
    for (Eigen::Index i = 0; i < r_a; ++i) {
      const Eigen::VectorXd pulled = maps.pinv_A * U_bar.col(i);
      scale_u[i] = pulled.norm();
      if (scale_u[i] == 0.0)
        throw Error(ErrorCode::NumericalError, "whitening pullback produced a zero vector");
      U.col(i) = pulled / scale_u[i];
    }
    for (Eigen::Index j = 0; j < r_b; ++j) {
      const Eigen::VectorXd pulled = maps.pinv_B * V_bar.col(j);
      scale_v[j] = pulled.norm();
      if (scale_v[j] == 0.0)
        throw Error(ErrorCode::NumericalError, "whitening pullback produced a zero vector");
      V.col(j) = pulled / scale_v[j];
    }
  }

  const Eigen::MatrixXd R = coefficient_matrix(working, U_bar, V_bar, U, V,
                                               opts.contracted_edges, opts.eps_denom);
  auto [lambda, mu] = rank_one_svd_factor(R);
  // Undo the norm change of the whitening map: lambda_i = ~lambda_i ||W_A^+ u_i||^2.
  for (Eigen::Index i = 0; i < r_a; ++i) lambda[i] *= scale_u[i] * scale_u[i];
  for (Eigen::Index j = 0; j < r_b; ++j) mu[j] *= scale_v[j] * scale_v[j];

  if (info) *info = local;
  SymmetricCarriage carA{lambda, U, !opts.whiten};
  SymmetricCarriage carB{mu, V, !opts.whiten};
  TrainDecomposition result{{Carriage{carA}, Carriage{carB}},
                            std::vector<int>{opts.contracted_edges}};
  return result;
}

}  // namespace ttd::tt2
