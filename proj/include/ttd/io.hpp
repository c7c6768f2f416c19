#pragma once

#include <string>

#include <json.hpp>

#include "ttd/dodd.hpp"
#include "ttd/harness.hpp"
#include "ttd/symm_tt2.hpp"
#include "ttd/symm_ttl.hpp"
#include "ttd/tensor.hpp"
#include "ttd/train.hpp"

namespace ttd::io {

/// Tensor JSON: one object {"shape": [...], "data": [...]} with data stored
/// row-major; readers reject length mismatches.
DenseTensor tensor_from_json(const nlohmann::json& j);
nlohmann::json tensor_to_json(const DenseTensor& T);
DenseTensor read_tensor(const std::string& path);
void write_tensor(const std::string& path, const DenseTensor& T);

/// 2-way tensor JSON as a matrix (used by the dodd subcommand).
Eigen::MatrixXd matrix_from_tensor_json(const nlohmann::json& j);
nlohmann::json matrix_to_tensor_json(const Eigen::MatrixXd& M);
Eigen::MatrixXd read_matrix(const std::string& path);

struct DecompositionMeta {
  std::uint64_t seed = 0;
  double rank_tol = 1e-8;
  bool whitened = false;
  int psd_attempts = 0;
  std::vector<ttl::PositionInfo> positions;  // per-position provenance (length >= 3 trains)
};

nlohmann::json decomposition_to_json(const TrainDecomposition& decomp,
                                     const DecompositionMeta& meta);
TrainDecomposition decomposition_from_json(const nlohmann::json& j);

nlohmann::json factors_to_json(const dodd::Factors& factors, double reconstruction_error);

bench::ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const bench::ExperimentConfig& config);
bench::ExperimentConfig read_config(const std::string& path);

nlohmann::json summary_to_json(const bench::ExperimentConfig& config,
                               const bench::TrialStats& stats);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);
nlohmann::json parse_json(const std::string& text);

}  // namespace ttd::io
