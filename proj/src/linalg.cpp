#include "ttd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "ttd/errors.hpp"

namespace ttd {

EigRank symmetric_eig_rank(const Eigen::MatrixXd& M, double rank_tol) {
  if (M.rows() != M.cols()) throw Error(ErrorCode::DimensionError, "matrix must be square");
  if (!M.allFinite()) throw Error(ErrorCode::NumericalError, "non-finite entries");

  const Eigen::MatrixXd sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::NumericalError, "eigendecomposition failed");

  const Eigen::Index n = M.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXd& vals = solver.eigenvalues();
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(vals[a]), mb = std::abs(vals[b]);
    if (ma != mb) return ma > mb;
    if (vals[a] != vals[b]) return vals[a] > vals[b];
    return a < b;
  });

  EigRank out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues[k] = vals[order[static_cast<std::size_t>(k)]];
    Eigen::VectorXd col = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    Eigen::Index lead = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if (std::abs(col[i]) > std::abs(col[lead])) lead = i;
    if (col[lead] < 0.0) col = -col;
    out.eigenvectors.col(k) = col;
  }

  const double max_mag = n > 0 ? std::abs(out.eigenvalues[0]) : 0.0;
  if (max_mag > 0.0) {
    for (Eigen::Index k = 0; k < n; ++k)
      if (std::abs(out.eigenvalues[k]) > rank_tol * max_mag) ++out.rank;
  }
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> rank_one_svd_factor(const Eigen::MatrixXd& R) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double sigma = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(R.rows());
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(R.cols());
  if (svd.matrixV().cols() > 0) mu = svd.matrixV().col(0);
  if (sigma > 0.0 && svd.matrixU().cols() > 0) lambda = sigma * svd.matrixU().col(0);
  return {lambda, mu};
}

#if defined(__x86_64__) || defined(_M_X64)
// Hardware 80-bit floats: the U W^T product otherwise costs ~5 eps per entry,
// which puts the Procrustes fit residual above the 1e-28 convergence
// threshold for d >~ 15 even at the exact solution.
using polar_scalar = long double;
#else
using polar_scalar = double;
#endif

Eigen::MatrixXd polar_factor(const Eigen::MatrixXd& A) {
  using WideMatrix = Eigen::Matrix<polar_scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const WideMatrix wide = A.cast<polar_scalar>();
  Eigen::JacobiSVD<WideMatrix> svd(wide, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const WideMatrix product = svd.matrixU() * svd.matrixV().transpose();
  return product.cast<double>();
}

Eigen::MatrixXd orthonormal_completion(const Eigen::MatrixXd& partial, Rng& rng) {
  const Eigen::Index n = partial.rows();
  const Eigen::Index r = partial.cols();
  Eigen::MatrixXd Q(n, n);
  if (r > 0) Q.leftCols(r) = partial;
  for (Eigen::Index k = r; k < n; ++k) {
    for (int attempt = 0;; ++attempt) {
      Eigen::VectorXd candidate = rng.normal_vector(n);
      for (Eigen::Index j = 0; j < k; ++j) candidate -= Q.col(j).dot(candidate) * Q.col(j);
      // Second pass stabilizes near-orthogonal leftovers.
      for (Eigen::Index j = 0; j < k; ++j) candidate -= Q.col(j).dot(candidate) * Q.col(j);
      const double norm = candidate.norm();
      if (norm > 1e-8) {
        Q.col(k) = candidate / norm;
        break;
      }
      if (attempt > 64)
        throw Error(ErrorCode::NumericalError, "orthonormal completion failed to converge");
    }
  }
  return Q;
}

NullspaceVector smallest_singular_vector(const Eigen::MatrixXd& A, double null_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::Index cols = A.cols();
  NullspaceVector out;
  out.vector = svd.matrixV().col(cols - 1);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double max_sv = sv.size() > 0 ? sv[0] : 0.0;
  std::size_t numeric_rank = 0;
  if (max_sv > 0.0) {
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv[i] > null_tol * max_sv) ++numeric_rank;
  }
  out.nullity = static_cast<std::size_t>(cols) - numeric_rank;
  return out;
}

double max_principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.cols() != B.cols()) return std::numbers::pi / 2.0;
  if (A.cols() == 0) return 0.0;
  // asin of the projection residual stays accurate for tiny angles, where
  // acos of a singular value of A^T B loses half the significant digits.
  const Eigen::MatrixXd residual = B - A * (A.transpose() * B);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
  const double sine = svd.singularValues().maxCoeff();
  return std::asin(std::clamp(sine, 0.0, 1.0));
}

Eigen::MatrixXd random_orthonormal(Eigen::Index n, Eigen::Index r, Rng& rng) {
  if (r > n) throw Error(ErrorCode::InvalidConfig, "rank exceeds dimension");
  if (r == 0) return Eigen::MatrixXd(n, 0);
  const Eigen::MatrixXd G = rng.normal_matrix(n, r);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, r);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < r; ++k)
    if (R(k, k) < 0.0) Q.col(k) = -Q.col(k);
  return Q;
}

}  // namespace ttd
