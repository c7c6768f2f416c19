#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ttd/odeco_tt2.hpp"
#include "ttd/tensor.hpp"
#include "ttd/train.hpp"

namespace ttd::bench {

enum class Kind { SymmTt2, SymmTtl, DoddSquare, DoddGeneral, OdecoTt2 };

Kind kind_from_string(const std::string& name);
const char* kind_name(Kind kind);

/// Declarative description of one table row: sizes, noise, trial count, base
/// seed and solver knobs.
struct ExperimentConfig {
  Kind kind = Kind::SymmTt2;

  // symm-tt2
  std::size_t n = 5, rank_a = 2, rank_b = 3;
  bool orthogonal = true;

  // symm-ttl
  std::size_t train_length = 3;
  std::vector<std::size_t> ranks;

  // dodd-square / dodd-general
  std::size_t dodd_m = 6, dodd_n = 5, dodd_d = 6;
  bool exact = true;
  std::string method = "auto";  // sinkhorn | procrustes for the square case

  // odeco-tt2
  std::size_t na = 4, nb = 4, nd = 4, ne = 4, nbond = 4;
  std::size_t rank_left = 2, rank_right = 2;

  double noise_sigma = 0.0;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  int threads = 1;

  // solver options
  double rank_tol = 1e-8;
  double tol = 1e-28;
  int max_iter = 1000;
  int psd_attempts = 200;
  int learn_rate = 2;

  void validate() const;
};

/// One generated problem: the noiseless tensor or matrix plus its ground truth.
struct Instance {
  std::optional<DenseTensor> tensor;
  std::optional<Eigen::MatrixXd> matrix;
  std::optional<TrainDecomposition> ground_truth;
  std::optional<Eigen::VectorXd> gt_lambda;
  std::optional<Eigen::MatrixXd> gt_q;
  std::optional<Eigen::VectorXd> gt_mu;
};

Instance make_instance(const ExperimentConfig& config, std::size_t trial_index);

/// T* + sigma (||T*|| / ||N||) N with N iid standard normal; by construction
/// the relative error against T* equals sigma.
DenseTensor add_noise(const DenseTensor& clean, double sigma, std::uint64_t seed);

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::optional<double> rel_err;
  int iterations = 0;
  bool converged = false;
  int psd_attempts = 0;
  double runtime_sec = 0.0;
  std::string error_code;  // empty when the solver produced a result
};

struct TrialStats {
  std::vector<TrialRecord> per_trial;
  double geo_mean_rel_err = 0.0;  // 10^(mean log10 rel err) over recorded errors
  double arith_mean_rel_err = 0.0;
  std::size_t success_count = 0;  // rel err < 1e-10
  std::size_t error_count = 0;    // trials that produced no error value
  std::size_t recorded_count = 0;
  double mean_runtime_sec = 0.0;
  double mean_iterations = 0.0;
};

TrialStats run_experiment(const ExperimentConfig& config);

/// Recomputes the aggregate fields from per_trial (also used by tests).
void aggregate(TrialStats& stats);

std::string to_csv(const TrialStats& stats);
std::string iteration_histogram_csv(const TrialStats& stats);

}  // namespace ttd::bench
