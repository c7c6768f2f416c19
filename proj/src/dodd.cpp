#include "ttd/dodd.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "ttd/errors.hpp"
#include "ttd/linalg.hpp"
#include "ttd/rng.hpp"

namespace ttd::dodd {

double Factors::orthogonality_error() const {
  const Eigen::Index dd = Q.rows();
  const Eigen::MatrixXd gram = Q * Q.transpose();
  return (gram - Eigen::MatrixXd::Identity(dd, dd)).norm() / std::sqrt(static_cast<double>(dd));
}

Eigen::MatrixXd zero_inflate(const Eigen::MatrixXd& Xbar, std::size_t d) {
  const std::size_t m = static_cast<std::size_t>(Xbar.rows());
  const std::size_t n = static_cast<std::size_t>(Xbar.cols());
  if (d < m || d < n)
    throw Error(ErrorCode::InvalidInflation, "inflation size below max(m, n)");
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                            static_cast<Eigen::Index>(d));
  X.topLeftCorner(Xbar.rows(), Xbar.cols()) = Xbar;
  return X;
}

Factors sinkhorn_square(const Eigen::MatrixXd& X, const SquareOptions& opts) {
  if (X.rows() != X.cols()) throw Error(ErrorCode::DimensionError, "matrix must be square");
  const Eigen::Index d = X.rows();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      if (X(i, j) == 0.0) throw Error(ErrorCode::ZeroEntry, "matrix has a zero entry");

  Eigen::MatrixXd balanced = X.array().square();
  Eigen::VectorXd row_scaling = Eigen::VectorXd::Ones(d);  // accumulated row factors
  Eigen::VectorXd col_scaling = Eigen::VectorXd::Ones(d);

  Factors out;
  out.d = out.m = out.n = static_cast<std::size_t>(d);
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    const Eigen::VectorXd row_sums = balanced.rowwise().sum();
    for (Eigen::Index i = 0; i < d; ++i) {
      const double factor = 1.0 / row_sums[i];
      balanced.row(i) *= factor;
      row_scaling[i] *= factor;
    }
    const Eigen::VectorXd col_sums = balanced.colwise().sum();
    for (Eigen::Index j = 0; j < d; ++j) {
      const double factor = 1.0 / col_sums[j];
      balanced.col(j) *= factor;
      col_scaling[j] *= factor;
    }
    out.iterations = iter;
    const double row_dev = (balanced.rowwise().sum().array() - 1.0).square().sum();
    const double col_dev = (balanced.colwise().sum().array() - 1.0).square().sum();
    if (row_dev + col_dev < opts.tol) {
      out.converged = true;
      break;
    }
  }

  // Q = sign(X) .* sqrt(balanced); diagonals invert the accumulated scalings.
  out.Q = (X.array().sign() * balanced.array().sqrt()).matrix();
  out.lambda = row_scaling.array().sqrt().inverse().matrix();
  out.mu = col_scaling.array().sqrt().inverse().matrix();
  return out;
}

TandemResult tandem_procrustes(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const TandemOptions& opts) {
  if (A.cols() != B.cols())
    throw Error(ErrorCode::DimensionError, "A and B must agree on columns");
  const Eigen::Index p = B.rows();

  Eigen::VectorXd row_energy(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    row_energy[k] = B.row(k).squaredNorm();
    if (row_energy[k] == 0.0)
      throw Error(ErrorCode::DegenerateStart, "starting matrix has a zero row");
  }

  const Eigen::MatrixXd ABt = A * B.transpose();
  TandemResult result;
  result.scales = Eigen::VectorXd::Ones(p);

  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    result.V = polar_factor(ABt * result.scales.asDiagonal());
    for (Eigen::Index k = 0; k < p; ++k)
      result.scales[k] = ABt.col(k).dot(result.V.col(k)) / row_energy[k];
    result.residual = (A - result.V * result.scales.asDiagonal() * B).squaredNorm();
    result.iterations = iter;
    result.residual_history.push_back(result.residual);
    // Stop once the decrease is no longer meaningful: below the absolute
    // threshold, below a relative sliver, or gone entirely (the floor wobble).
    if (iter > 1 && previous - result.residual < opts.tol + 1e-9 * previous) break;
    previous = result.residual;
  }
  return result;
}

namespace {

void check_scales_invertible(const Eigen::VectorXd& scales) {
  for (Eigen::Index k = 0; k < scales.size(); ++k)
    if (scales[k] == 0.0)
      throw Error(ErrorCode::SingularScaling, "tandem fit produced a zero scale");
}

}  // namespace

Factors procrustes_square(const Eigen::MatrixXd& X, const SquareOptions& opts,
                          const TandemOptions& tandem) {
  if (X.rows() != X.cols()) throw Error(ErrorCode::DimensionError, "matrix must be square");
  const Eigen::Index d = X.rows();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);

  Factors out;
  out.d = out.m = out.n = static_cast<std::size_t>(d);
  out.lambda = Eigen::VectorXd::Ones(d);
  out.mu = Eigen::VectorXd::Ones(d);
  out.Q = X;

  double best_residual = std::numeric_limits<double>::infinity();
  int last_improvement = 0;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    TandemResult fit = tandem_procrustes(out.Q.transpose(), identity, tandem);
    check_scales_invertible(fit.scales);
    out.lambda.array() *= fit.scales.array();
    out.Q = fit.scales.array().inverse().matrix().asDiagonal() * out.Q;

    fit = tandem_procrustes(out.Q, identity, tandem);
    check_scales_invertible(fit.scales);
    out.mu.array() *= fit.scales.array();
    out.Q = out.Q * fit.scales.array().inverse().matrix().asDiagonal();

    out.iterations = iter;
    if (fit.residual < opts.tol) {
      out.converged = true;
      break;
    }
    if (fit.residual < 0.5 * best_residual) {
      best_residual = fit.residual;
      last_improvement = iter;
    } else if (iter - last_improvement >= opts.stall_window) {
      break;  // residual floored above tol
    }
  }
  return out;
}

Factors general(const Eigen::MatrixXd& Xbar, std::size_t d, const GeneralOptions& opts) {
  const std::size_t m = static_cast<std::size_t>(Xbar.rows());
  const std::size_t n = static_cast<std::size_t>(Xbar.cols());
  if (d < m || d < n)
    throw Error(ErrorCode::InvalidInflation, "inflation size below max(m, n)");
  if (opts.learn_rate < 1)
    throw Error(ErrorCode::InvalidConfig, "learning rate must be >= 1");

  const Eigen::Index dd = static_cast<Eigen::Index>(d);
  const Eigen::Index mm = static_cast<Eigen::Index>(m);
  const Eigen::Index nn = static_cast<Eigen::Index>(n);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dd, dd);

  Factors out;
  out.d = d;
  out.m = m;
  out.n = n;
  out.lambda = Eigen::VectorXd::Zero(dd);
  out.lambda.head(mm).setOnes();
  out.mu = Eigen::VectorXd::Zero(dd);
  out.mu.head(nn).setOnes();

  Rng rng(Rng::derive(opts.seed, 0xD0DD));
  out.Q = rng.normal_matrix(dd, dd);
  out.Q.topLeftCorner(mm, nn) = Xbar;

  Eigen::MatrixXd last_fit;
  double best_residual = std::numeric_limits<double>::infinity();
  int last_improvement = 0;
  bool stalled = false;
  while (out.iterations < opts.max_iter && !out.converged && !stalled) {
    for (int step = 0; step < opts.learn_rate && out.iterations < opts.max_iter; ++step) {
      TandemResult fit = tandem_procrustes(out.Q.transpose(), identity, opts.tandem);
      check_scales_invertible(fit.scales);
      out.lambda.array() *= fit.scales.array();
      out.Q = fit.scales.array().inverse().matrix().asDiagonal() * out.Q;

      fit = tandem_procrustes(out.Q, identity, opts.tandem);
      check_scales_invertible(fit.scales);
      out.mu.array() *= fit.scales.array();
      out.Q = out.Q * fit.scales.array().inverse().matrix().asDiagonal();

      last_fit = fit.V;
      ++out.iterations;
      if (!out.Q.allFinite())
        throw Error(ErrorCode::NumericalError, "scaling blow-up in the inflated iteration");
      if (fit.residual < opts.tol) {
        out.converged = true;
        break;
      }
      if (fit.residual < 0.5 * best_residual) {
        best_residual = fit.residual;
        last_improvement = out.iterations;
      } else if (out.iterations - last_improvement >= opts.stall_window) {
        stalled = true;
        break;
      }
    }
    if (out.converged || stalled || out.iterations >= opts.max_iter) break;

    // Refresh: unknown region takes the latest orthonormal fit, the known
    // block is reset from the support scalings so lambda * Q * mu stays equal
    // to the 0-inflated input.
    for (Eigen::Index i = 0; i < dd; ++i)
      for (Eigen::Index j = 0; j < dd; ++j)
        if (i >= mm || j >= nn) out.Q(i, j) = last_fit(i, j);
    for (Eigen::Index i = 0; i < mm; ++i) {
      if (out.lambda[i] == 0.0)
        throw Error(ErrorCode::SingularScaling, "zero diagonal inside the row support");
      for (Eigen::Index j = 0; j < nn; ++j) {
        if (out.mu[j] == 0.0)
          throw Error(ErrorCode::SingularScaling, "zero diagonal inside the column support");
        out.Q(i, j) = Xbar(i, j) / (out.lambda[i] * out.mu[j]);
      }
    }
  }
  return out;
}

}  // namespace ttd::dodd
