#include "ttd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <thread>

#include <Eigen/Dense>

#include "ttd/dodd.hpp"
#include "ttd/errors.hpp"
#include "ttd/linalg.hpp"
#include "ttd/rng.hpp"
#include "ttd/symm_tt2.hpp"
#include "ttd/symm_ttl.hpp"

namespace ttd::bench {

namespace {

constexpr std::uint64_t kInstanceTag = 0x11;
constexpr std::uint64_t kNoiseTag = 0x22;
constexpr std::uint64_t kSolverTag = 0x33;
constexpr double kSuccessThreshold = 1e-10;

bool satisfies_drc(const std::vector<std::size_t>& ranks) {
  const std::size_t L = ranks.size();
  for (std::size_t j = 0; j < L; ++j) {
    bool from_left = true;
    for (std::size_t k = 0; k + 1 <= j; ++k)
      if (ranks[k] < ranks[k + 1]) from_left = false;
    bool from_right = true;
    for (std::size_t k = j; k + 1 < L; ++k)
      if (ranks[k] > ranks[k + 1]) from_right = false;
    if (!from_left && !from_right) return false;
  }
  return true;
}

Eigen::VectorXd bounded_coefficients(Eigen::Index count, Rng& rng) {
  Eigen::VectorXd out(count);
  for (Eigen::Index i = 0; i < count; ++i) out[i] = rng.signed_uniform(0.5, 2.0);
  return out;
}

// Unit columns with nonnegative entries. The whitening path needs weighted
// slice sums that can be made PSD: with sign-coherent factors every junction
// inner product is positive and the PSD search succeeds with high
// probability, whereas signed factors leave ~30% of instances with an empty
// feasibility cone on the higher-rank side whenever the ranks differ.
Eigen::MatrixXd positive_unit_columns(Eigen::Index n, Eigen::Index r, Rng& rng) {
  for (;;) {
    Eigen::MatrixXd M = rng.normal_matrix(n, r).cwiseAbs();
    for (Eigen::Index j = 0; j < r; ++j) M.col(j).normalize();
    if (r <= 1) return M;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    if (svd.singularValues().minCoeff() > 1e-6) return M;
  }
}

Eigen::VectorXd positive_coefficients(Eigen::Index count, Rng& rng) {
  Eigen::VectorXd out(count);
  for (Eigen::Index i = 0; i < count; ++i) out[i] = 0.5 + 1.5 * rng.uniform01();
  return out;
}

}  // namespace

Kind kind_from_string(const std::string& name) {
  if (name == "symm-tt2") return Kind::SymmTt2;
  if (name == "symm-ttl") return Kind::SymmTtl;
  if (name == "dodd-square") return Kind::DoddSquare;
  if (name == "dodd-general") return Kind::DoddGeneral;
  if (name == "odeco-tt2") return Kind::OdecoTt2;
  throw Error(ErrorCode::InvalidConfig, "unknown experiment kind: " + name);
}

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::SymmTt2: return "symm-tt2";
    case Kind::SymmTtl: return "symm-ttl";
    case Kind::DoddSquare: return "dodd-square";
    case Kind::DoddGeneral: return "dodd-general";
    case Kind::OdecoTt2: return "odeco-tt2";
  }
  return "symm-tt2";
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw Error(ErrorCode::InvalidConfig, "trials must be >= 1");
  if (noise_sigma < 0.0) throw Error(ErrorCode::InvalidConfig, "noise sigma must be >= 0");
  switch (kind) {
    case Kind::SymmTt2:
      if (rank_a > n || rank_b > n)
        throw Error(ErrorCode::InvalidConfig, "carriage rank exceeds dimension");
      break;
    case Kind::SymmTtl: {
      if (train_length < 3) throw Error(ErrorCode::InvalidConfig, "train length must be >= 3");
      if (ranks.size() != train_length)
        throw Error(ErrorCode::InvalidConfig, "need one rank per carriage");
      for (std::size_t r : ranks)
        if (r < 1 || r > n) throw Error(ErrorCode::InvalidConfig, "carriage rank out of range");
      if (!satisfies_drc(ranks))
        throw Error(ErrorCode::InvalidConfig, "requested ranks violate the DRC");
      break;
    }
    case Kind::DoddSquare:
      if (dodd_d < 1) throw Error(ErrorCode::InvalidConfig, "matrix size must be >= 1");
      break;
    case Kind::DoddGeneral:
      if (dodd_d < std::max(dodd_m, dodd_n))
        throw Error(ErrorCode::InvalidConfig, "inflation size below max(m, n)");
      break;
    case Kind::OdecoTt2:
      if (rank_left > std::min({na, nb, nbond}) || rank_right > std::min({nd, ne, nbond}))
        throw Error(ErrorCode::InvalidConfig, "carriage rank exceeds a mode dimension");
      break;
  }
}

Instance make_instance(const ExperimentConfig& config, std::size_t trial_index) {
  config.validate();
  const std::uint64_t trial_seed = Rng::derive(config.seed, kInstanceTag, trial_index);
  Rng rng(trial_seed);
  Instance out;

  switch (config.kind) {
    case Kind::SymmTt2: {
      const Eigen::Index n = static_cast<Eigen::Index>(config.n);
      Eigen::MatrixXd U, V;
      Eigen::VectorXd cu, cv;
      if (config.orthogonal) {
        U = random_orthonormal(n, static_cast<Eigen::Index>(config.rank_a), rng);
        V = random_orthonormal(n, static_cast<Eigen::Index>(config.rank_b), rng);
        cu = bounded_coefficients(U.cols(), rng);
        cv = bounded_coefficients(V.cols(), rng);
      } else {
        U = positive_unit_columns(n, static_cast<Eigen::Index>(config.rank_a), rng);
        V = positive_unit_columns(n, static_cast<Eigen::Index>(config.rank_b), rng);
        cu = positive_coefficients(U.cols(), rng);
        cv = positive_coefficients(V.cols(), rng);
      }
      SymmetricCarriage a{cu, U, config.orthogonal};
      SymmetricCarriage b{cv, V, config.orthogonal};
      TrainDecomposition truth{{Carriage{a}, Carriage{b}}, {}};
      out.tensor = assemble_train(truth);
      out.ground_truth = std::move(truth);
      break;
    }
    case Kind::SymmTtl: {
      const Eigen::Index n = static_cast<Eigen::Index>(config.n);
      TrainDecomposition truth;
      for (std::size_t j = 0; j < config.train_length; ++j) {
        const Eigen::MatrixXd X =
            random_orthonormal(n, static_cast<Eigen::Index>(config.ranks[j]), rng);
        truth.carriages.push_back(Carriage{SymmetricCarriage{
            bounded_coefficients(X.cols(), rng), X, true}});
      }
      out.tensor = assemble_train(truth);
      out.ground_truth = std::move(truth);
      break;
    }
    case Kind::DoddSquare: {
      const Eigen::Index d = static_cast<Eigen::Index>(config.dodd_d);
      for (;;) {
        const Eigen::MatrixXd Q = random_orthonormal(d, d, rng);
        const Eigen::VectorXd lambda = bounded_coefficients(d, rng);
        const Eigen::VectorXd mu = bounded_coefficients(d, rng);
        const Eigen::MatrixXd X = lambda.asDiagonal() * Q * mu.asDiagonal();
        if (X.array().abs().minCoeff() < 1e-12) continue;  // the solver needs zero-free input
        out.matrix = X;
        out.gt_lambda = lambda;
        out.gt_q = Q;
        out.gt_mu = mu;
        break;
      }
      break;
    }
    case Kind::DoddGeneral: {
      const Eigen::Index m = static_cast<Eigen::Index>(config.dodd_m);
      const Eigen::Index n = static_cast<Eigen::Index>(config.dodd_n);
      const Eigen::Index d = static_cast<Eigen::Index>(config.dodd_d);
      if (config.exact) {
        const Eigen::MatrixXd Q = random_orthonormal(d, d, rng);
        const Eigen::VectorXd lambda = bounded_coefficients(m, rng);
        const Eigen::VectorXd mu = bounded_coefficients(n, rng);
        out.matrix = lambda.asDiagonal() * Q.topLeftCorner(m, n) * mu.asDiagonal();
        out.gt_lambda = lambda;
        out.gt_q = Q;
        out.gt_mu = mu;
      } else {
        out.matrix = 5.0 * rng.normal_matrix(m, n);
      }
      break;
    }
    case Kind::OdecoTt2: {
      for (;;) {
        OdecoCarriage left;
        left.vectors_a = random_orthonormal(static_cast<Eigen::Index>(config.na),
                                            static_cast<Eigen::Index>(config.rank_left), rng);
        left.vectors_b = random_orthonormal(static_cast<Eigen::Index>(config.nb),
                                            static_cast<Eigen::Index>(config.rank_left), rng);
        left.vectors_c = random_orthonormal(static_cast<Eigen::Index>(config.nbond),
                                            static_cast<Eigen::Index>(config.rank_left), rng);
        left.coefficients = bounded_coefficients(left.vectors_a.cols(), rng);
        OdecoCarriage right;
        right.vectors_a = random_orthonormal(static_cast<Eigen::Index>(config.nd),
                                             static_cast<Eigen::Index>(config.rank_right), rng);
        right.vectors_b = random_orthonormal(static_cast<Eigen::Index>(config.ne),
                                             static_cast<Eigen::Index>(config.rank_right), rng);
        right.vectors_c = random_orthonormal(static_cast<Eigen::Index>(config.nbond),
                                             static_cast<Eigen::Index>(config.rank_right), rng);
        right.coefficients = bounded_coefficients(right.vectors_a.cols(), rng);
        const Eigen::MatrixXd junction = left.vectors_c.transpose() * right.vectors_c;
        if (junction.array().abs().minCoeff() < 1e-8) continue;  // genericity floor
        TrainDecomposition truth{{Carriage{left}, Carriage{right}}, {}};
        out.tensor = assemble_train(truth);
        out.ground_truth = std::move(truth);
        break;
      }
      break;
    }
  }
  return out;
}

DenseTensor add_noise(const DenseTensor& clean, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw Error(ErrorCode::InvalidConfig, "noise sigma must be >= 0");
  if (sigma == 0.0) return clean;
  Rng rng(seed);
  DenseTensor noise(clean.shape());
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = rng.normal();
  const double noise_norm = noise.frobenius_norm();
  if (noise_norm == 0.0) return clean;
  const double factor = sigma * clean.frobenius_norm() / noise_norm;
  DenseTensor out = clean;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += factor * noise[i];
  return out;
}

namespace {

TrialRecord run_trial(const ExperimentConfig& config, std::size_t trial_index) {
  TrialRecord record;
  record.trial = trial_index;
  record.seed = Rng::derive(config.seed, kInstanceTag, trial_index);
  const std::uint64_t solver_seed = Rng::derive(config.seed, kSolverTag, trial_index);
  const std::uint64_t noise_seed = Rng::derive(config.seed, kNoiseTag, trial_index);

  const auto start = std::chrono::steady_clock::now();
  try {
    const Instance instance = make_instance(config, trial_index);
    switch (config.kind) {
      case Kind::SymmTt2: {
        const DenseTensor noisy = add_noise(*instance.tensor, config.noise_sigma, noise_seed);
        tt2::Options opts;
        opts.whiten = !config.orthogonal;
        opts.max_psd_attempts = config.psd_attempts;
        opts.rank_tol = config.rank_tol;
        opts.seed = solver_seed;
        tt2::Info info;
        const TrainDecomposition result = tt2::decompose(noisy, opts, &info);
        record.psd_attempts = info.psd_attempts;
        record.rel_err = relative_error(assemble_train(result), noisy);
        record.converged = true;
        break;
      }
      case Kind::SymmTtl: {
        const DenseTensor noisy = add_noise(*instance.tensor, config.noise_sigma, noise_seed);
        ttl::Options opts;
        opts.rank_tol = config.rank_tol;
        opts.seed = solver_seed;
        const TrainDecomposition result = ttl::decompose(noisy, config.train_length, opts);
        record.rel_err = relative_error(assemble_train(result), noisy);
        record.converged = true;
        break;
      }
      case Kind::DoddSquare: {
        dodd::SquareOptions opts{config.tol, config.max_iter};
        dodd::Factors factors;
        if (config.method == "procrustes")
          factors = dodd::procrustes_square(*instance.matrix, opts);
        else
          factors = dodd::sinkhorn_square(*instance.matrix, opts);
        record.iterations = factors.iterations;
        record.converged = factors.converged;
        record.rel_err = factors.orthogonality_error();
        break;
      }
      case Kind::DoddGeneral: {
        dodd::GeneralOptions opts;
        opts.tol = config.tol;
        opts.max_iter = config.max_iter;
        opts.learn_rate = config.learn_rate;
        opts.seed = solver_seed;
        const dodd::Factors factors = dodd::general(*instance.matrix, config.dodd_d, opts);
        record.iterations = factors.iterations;
        record.converged = factors.converged;
        record.rel_err = factors.orthogonality_error();
        break;
      }
      case Kind::OdecoTt2: {
        const DenseTensor noisy = add_noise(*instance.tensor, config.noise_sigma, noise_seed);
        odeco::Options opts;
        opts.rank_tol = config.rank_tol;
        opts.seed = solver_seed;
        opts.d = config.dodd_d;
        opts.method = odeco::method_from_string(config.method);
        opts.general.learn_rate = config.learn_rate;
        opts.general.max_iter = config.max_iter;
        odeco::Info info;
        const TrainDecomposition result = odeco::decompose(noisy, opts, &info);
        record.iterations = info.dodd_iterations;
        record.rel_err = relative_error(assemble_train(result), noisy);
        record.converged = true;
        break;
      }
    }
  } catch (const Error& err) {
    record.error_code = err.code_name();
    if (err.code() == ErrorCode::InvalidConfig) throw;  // config bugs abort the batch
  }
  if (record.rel_err.has_value() && !std::isfinite(*record.rel_err)) {
    record.rel_err.reset();
    if (record.error_code.empty()) record.error_code = "NumericalError";
  }
  record.runtime_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

}  // namespace

void aggregate(TrialStats& stats) {
  double log_sum = 0.0;
  double err_sum = 0.0;
  double runtime_sum = 0.0;
  double iter_sum = 0.0;
  stats.recorded_count = 0;
  stats.success_count = 0;
  stats.error_count = 0;
  for (const TrialRecord& record : stats.per_trial) {
    runtime_sum += record.runtime_sec;
    iter_sum += record.iterations;
    if (!record.rel_err.has_value()) {
      ++stats.error_count;
      continue;
    }
    ++stats.recorded_count;
    const double err = std::max(*record.rel_err, 1e-300);
    log_sum += std::log10(err);
    err_sum += *record.rel_err;
    if (*record.rel_err < kSuccessThreshold) ++stats.success_count;
  }
  const double trials = static_cast<double>(stats.per_trial.size());
  stats.mean_runtime_sec = trials > 0 ? runtime_sum / trials : 0.0;
  stats.mean_iterations = trials > 0 ? iter_sum / trials : 0.0;
  if (stats.recorded_count > 0) {
    stats.geo_mean_rel_err = std::pow(10.0, log_sum / static_cast<double>(stats.recorded_count));
    stats.arith_mean_rel_err = err_sum / static_cast<double>(stats.recorded_count);
  } else {
    stats.geo_mean_rel_err = std::numeric_limits<double>::quiet_NaN();
    stats.arith_mean_rel_err = std::numeric_limits<double>::quiet_NaN();
  }
}

TrialStats run_experiment(const ExperimentConfig& config) {
  config.validate();
  TrialStats stats;
  stats.per_trial.resize(config.trials);

  const int workers = std::max(1, config.threads);
  if (workers == 1) {
    for (std::size_t t = 0; t < config.trials; ++t) stats.per_trial[t] = run_trial(config, t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t t = next.fetch_add(1);
          if (t >= config.trials) return;
          stats.per_trial[t] = run_trial(config, t);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }

  aggregate(stats);
  return stats;
}

std::string to_csv(const TrialStats& stats) {
  std::string out = "trial,seed,relErr,iterations,converged,psdAttempts,runtimeSec\n";
  char buffer[256];
  for (const TrialRecord& record : stats.per_trial) {
    if (record.rel_err.has_value())
      std::snprintf(buffer, sizeof(buffer), "%zu,%llu,%.17g,%d,%d,%d,%.6f\n", record.trial,
                    static_cast<unsigned long long>(record.seed), *record.rel_err,
                    record.iterations, record.converged ? 1 : 0, record.psd_attempts,
                    record.runtime_sec);
    else
      std::snprintf(buffer, sizeof(buffer), "%zu,%llu,,%d,%d,%d,%.6f\n", record.trial,
                    static_cast<unsigned long long>(record.seed), record.iterations,
                    record.converged ? 1 : 0, record.psd_attempts, record.runtime_sec);
    out += buffer;
  }
  return out;
}

std::string iteration_histogram_csv(const TrialStats& stats) {
  std::map<int, int> counts;
  for (const TrialRecord& record : stats.per_trial) ++counts[record.iterations];
  std::string out = "iterations,count\n";
  char buffer[64];
  for (const auto& [iterations, count] : counts) {
    std::snprintf(buffer, sizeof(buffer), "%d,%d\n", iterations, count);
    out += buffer;
  }
  return out;
}

}  // namespace ttd::bench
