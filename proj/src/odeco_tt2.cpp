#include "ttd/odeco_tt2.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/Dense>

#include "ttd/errors.hpp"
#include "ttd/linalg.hpp"
#include "ttd/rng.hpp"

namespace ttd::odeco {

namespace {

// Paired singular structure of a slice sum S = sum_i w_i a_i b_i^T: the left
// set comes from the Gram matrix eigendecomposition, the right set from
// propagating S through it, which keeps the index pairing consistent.
struct PairedSets {
  std::size_t rank = 0;
  Eigen::MatrixXd left;
  Eigen::MatrixXd right;
};

PairedSets paired_from_slice_sum(const Eigen::MatrixXd& S, double rank_tol) {
  const EigRank eig = symmetric_eig_rank(S * S.transpose(), rank_tol);
  PairedSets out;
  out.rank = eig.rank;
  const Eigen::Index r = static_cast<Eigen::Index>(eig.rank);
  out.left = eig.eigenvectors.leftCols(r);
  out.right.resize(S.cols(), r);
  for (Eigen::Index i = 0; i < r; ++i) {
    Eigen::VectorXd propagated = S.transpose() * out.left.col(i);
    const double norm = propagated.norm();
    if (norm == 0.0)
      throw Error(ErrorCode::NumericalError, "rank detection inconsistent with slice sum");
    out.right.col(i) = propagated / norm;
  }
  return out;
}

TrainDecomposition empty_decomposition(const DenseTensor& T) {
  auto empty_carriage = [](std::size_t na, std::size_t nb) {
    return OdecoCarriage{Eigen::VectorXd(0), Eigen::MatrixXd(static_cast<Eigen::Index>(na), 0),
                         Eigen::MatrixXd(static_cast<Eigen::Index>(nb), 0), Eigen::MatrixXd(1, 0)};
  };
  return TrainDecomposition{{Carriage{empty_carriage(T.dim(0), T.dim(1))},
                             Carriage{empty_carriage(T.dim(2), T.dim(3))}},
                            {}};
}

}  // namespace

Method method_from_string(const std::string& name) {
  if (name == "auto") return Method::Auto;
  if (name == "sinkhorn") return Method::Sinkhorn;
  if (name == "procrustes") return Method::Procrustes;
  if (name == "general") return Method::General;
  throw Error(ErrorCode::InvalidConfig, "unknown DODD method: " + name);
}

const char* method_name(Method method) {
  switch (method) {
    case Method::Auto: return "auto";
    case Method::Sinkhorn: return "sinkhorn";
    case Method::Procrustes: return "procrustes";
    case Method::General: return "general";
  }
  return "auto";
}

TrainDecomposition decompose(const DenseTensor& T, const Options& opts, Info* info) {
  if (T.order() != 4) throw Error(ErrorCode::DimensionError, "expected a 4-way tensor");
  if (T.frobenius_norm() == 0.0) {
    if (info) *info = Info{};
    return empty_decomposition(T);
  }

  Rng rng(Rng::derive(opts.seed, 0x0DEC0));
  const Eigen::MatrixXd slice_left = weighted_slice_sum(T, {0, 1}, rng);
  const Eigen::MatrixXd slice_right = weighted_slice_sum(T, {2, 3}, rng);
  const PairedSets left = paired_from_slice_sum(slice_left, opts.rank_tol);
  const PairedSets right = paired_from_slice_sum(slice_right, opts.rank_tol);
  if (left.rank == 0 || right.rank == 0)
    throw Error(ErrorCode::EmptyDecomposition, "slice sums have rank 0 for a nonzero tensor");

  // Coupling matrix: coupling(i, j) = T(a_i, b_i, d_j, e_j) = lambda_i mu_j <c_i, f_j>.
  const Eigen::Index rl = static_cast<Eigen::Index>(left.rank);
  const Eigen::Index rr = static_cast<Eigen::Index>(right.rank);
  Eigen::MatrixXd coupling(rl, rr);
  for (Eigen::Index i = 0; i < rl; ++i) {
    const std::array<ModeOp, 4> lead{ModeOp{Eigen::VectorXd(left.left.col(i))},
                                     ModeOp{Eigen::VectorXd(left.right.col(i))}, ModeOp{},
                                     ModeOp{}};
    const DenseTensor G = multilinear_contract(T, lead);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        Gm(G.data(), static_cast<Eigen::Index>(G.dim(0)), static_cast<Eigen::Index>(G.dim(1)));
    for (Eigen::Index j = 0; j < rr; ++j)
      coupling(i, j) = right.left.col(j).dot(Gm * right.right.col(j));
  }

  std::size_t d = opts.d != 0 ? opts.d : std::max(left.rank, right.rank);
  if (d < std::max(left.rank, right.rank))
    throw Error(ErrorCode::InvalidInflation, "inflation size below max carriage rank");

  Method method = opts.method;
  if (method == Method::Auto) {
    const bool square_full = left.rank == right.rank && d == left.rank &&
                             coupling.array().abs().minCoeff() > 0.0;
    method = square_full ? Method::Sinkhorn : Method::General;
  }

  dodd::Factors factors;
  switch (method) {
    case Method::Sinkhorn:
      factors = dodd::sinkhorn_square(dodd::zero_inflate(coupling, d), opts.square);
      break;
    case Method::Procrustes:
      factors = dodd::procrustes_square(dodd::zero_inflate(coupling, d), opts.square);
      break;
    case Method::General:
    case Method::Auto: {
      dodd::GeneralOptions gopts = opts.general;
      gopts.seed = Rng::derive(opts.seed, 0x0DEC0, 7);
      factors = dodd::general(coupling, d, gopts);
      break;
    }
  }
  const double orth_err = factors.orthogonality_error();
  if (info) {
    info->rank_left = left.rank;
    info->rank_right = right.rank;
    info->d = d;
    info->method = method;
    info->dodd_iterations = factors.iterations;
    info->dodd_orthogonality_error = orth_err;
  }
  // The residual criterion can floor above tol in double precision while the
  // factors are fine; gate on the achieved orthogonality instead.
  if (orth_err >= 1e-10) {
    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "DODD stage stopped after %d iterations with orthogonality error %.3e",
                  factors.iterations, orth_err);
    throw Error(ErrorCode::NotConverged, detail);
  }

  // Bond vectors: rows of Q for the left carriage, standard basis columns for
  // the right; the junction inner products then reproduce the coupling matrix.
  const Eigen::Index dd = static_cast<Eigen::Index>(d);
  OdecoCarriage left_car;
  left_car.coefficients = factors.lambda.head(rl);
  left_car.vectors_a = left.left;
  left_car.vectors_b = left.right;
  left_car.vectors_c = factors.Q.topRows(rl).transpose();

  OdecoCarriage right_car;
  right_car.coefficients = factors.mu.head(rr);
  right_car.vectors_a = right.left;
  right_car.vectors_b = right.right;
  right_car.vectors_c = Eigen::MatrixXd::Identity(dd, dd).leftCols(rr);

  return TrainDecomposition{{Carriage{left_car}, Carriage{right_car}}, {}};
}

}  // namespace ttd::odeco
