#include "ttd/io.hpp"

#include <fstream>
#include <sstream>

#include "ttd/errors.hpp"

namespace ttd::io {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << contents;
}

json parse_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ParseError, "malformed JSON");
  return j;
}

DenseTensor tensor_from_json(const json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("data"))
    throw Error(ErrorCode::ParseError, "tensor JSON needs \"shape\" and \"data\"");
  std::vector<std::size_t> shape;
  for (const auto& entry : j.at("shape")) {
    if (!entry.is_number_integer() || entry.get<long long>() < 1)
      throw Error(ErrorCode::ParseError, "shape entries must be positive integers");
    shape.push_back(entry.get<std::size_t>());
  }
  std::vector<double> data;
  data.reserve(j.at("data").size());
  for (const auto& entry : j.at("data")) {
    if (!entry.is_number()) throw Error(ErrorCode::ParseError, "data entries must be numbers");
    data.push_back(entry.get<double>());
  }
  std::size_t expected = 1;
  for (std::size_t d : shape) expected *= d;
  if (expected != data.size())
    throw Error(ErrorCode::ParseError, "data length does not match shape product");
  return DenseTensor(std::move(shape), std::move(data));
}

json tensor_to_json(const DenseTensor& T) {
  json j;
  j["shape"] = T.shape();
  j["data"] = T.values();
  return j;
}

DenseTensor read_tensor(const std::string& path) {
  return tensor_from_json(parse_json(read_file(path)));
}

void write_tensor(const std::string& path, const DenseTensor& T) {
  write_file(path, tensor_to_json(T).dump());
}

Eigen::MatrixXd matrix_from_tensor_json(const json& j) {
  const DenseTensor T = tensor_from_json(j);
  if (T.order() != 2) throw Error(ErrorCode::ParseError, "expected a 2-way tensor");
  Eigen::MatrixXd M(T.dim(0), T.dim(1));
  for (std::size_t i = 0; i < T.dim(0); ++i)
    for (std::size_t k = 0; k < T.dim(1); ++k) M(i, k) = T[i * T.dim(1) + k];
  return M;
}

json matrix_to_tensor_json(const Eigen::MatrixXd& M) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(M.size()));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index k = 0; k < M.cols(); ++k) data.push_back(M(i, k));
  return tensor_to_json(DenseTensor(
      {static_cast<std::size_t>(M.rows()), static_cast<std::size_t>(M.cols())}, std::move(data)));
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  return matrix_from_tensor_json(parse_json(read_file(path)));
}

namespace {

json matrix_column_major(const Eigen::MatrixXd& M) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(M.size()));
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i) flat.push_back(M(i, j));
  json out;
  out["rows"] = M.rows();
  out["cols"] = M.cols();
  out["columnMajor"] = flat;
  return out;
}

Eigen::MatrixXd matrix_from_column_major(const json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto& flat = j.at("columnMajor");
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
    throw Error(ErrorCode::ParseError, "column-major data length mismatch");
  Eigen::MatrixXd M(rows, cols);
  std::size_t pos = 0;
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) M(r, c) = flat.at(pos++).get<double>();
  return M;
}

}  // namespace

json decomposition_to_json(const TrainDecomposition& decomp, const DecompositionMeta& meta) {
  json carriages = json::array();
  for (const Carriage& carriage : decomp.carriages) {
    json entry;
    if (const auto* sym = std::get_if<SymmetricCarriage>(&carriage)) {
      entry["kind"] = "symmetric";
      entry["coefficients"] = std::vector<double>(sym->coefficients.data(),
                                                  sym->coefficients.data() + sym->coefficients.size());
      entry["vectors"] = matrix_column_major(sym->vectors);
      entry["orthonormal"] = sym->orthonormal;
    } else {
      const auto& ode = std::get<OdecoCarriage>(carriage);
      entry["kind"] = "odeco";
      entry["coefficients"] = std::vector<double>(ode.coefficients.data(),
                                                  ode.coefficients.data() + ode.coefficients.size());
      entry["vectorsA"] = matrix_column_major(ode.vectors_a);
      entry["vectorsB"] = matrix_column_major(ode.vectors_b);
      entry["vectorsC"] = matrix_column_major(ode.vectors_c);
    }
    carriages.push_back(std::move(entry));
  }

  json meta_json;
  meta_json["seed"] = meta.seed;
  meta_json["rankTol"] = meta.rank_tol;
  meta_json["whitened"] = meta.whitened;
  meta_json["psdAttempts"] = meta.psd_attempts;
  if (!meta.positions.empty()) {
    json positions = json::array();
    for (const auto& p : meta.positions) {
      if (p.rank == 0) continue;
      positions.push_back({{"direction", p.direction == ttl::Direction::LR ? "LR" : "RL"},
                           {"rank", p.rank}});
    }
    meta_json["positions"] = std::move(positions);
  }

  json out;
  out["carriages"] = std::move(carriages);
  out["contractedEdges"] = decomp.contracted_edges;
  out["meta"] = std::move(meta_json);
  return out;
}

TrainDecomposition decomposition_from_json(const json& j) {
  TrainDecomposition decomp;
  for (const auto& entry : j.at("carriages")) {
    const std::string kind = entry.at("kind").get<std::string>();
    const auto& coeffs = entry.at("coefficients");
    Eigen::VectorXd c(static_cast<Eigen::Index>(coeffs.size()));
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = coeffs.at(static_cast<std::size_t>(i));
    if (kind == "symmetric") {
      SymmetricCarriage sym;
      sym.coefficients = c;
      sym.vectors = matrix_from_column_major(entry.at("vectors"));
      sym.orthonormal = entry.value("orthonormal", true);
      decomp.carriages.push_back(Carriage{std::move(sym)});
    } else if (kind == "odeco") {
      OdecoCarriage ode;
      ode.coefficients = c;
      ode.vectors_a = matrix_from_column_major(entry.at("vectorsA"));
      ode.vectors_b = matrix_from_column_major(entry.at("vectorsB"));
      ode.vectors_c = matrix_from_column_major(entry.at("vectorsC"));
      decomp.carriages.push_back(Carriage{std::move(ode)});
    } else {
      throw Error(ErrorCode::ParseError, "unknown carriage kind: " + kind);
    }
  }
  if (j.contains("contractedEdges"))
    decomp.contracted_edges = j.at("contractedEdges").get<std::vector<int>>();
  return decomp;
}

json factors_to_json(const dodd::Factors& factors, double reconstruction_error) {
  json out;
  out["lambda"] = std::vector<double>(factors.lambda.data(),
                                      factors.lambda.data() + factors.lambda.size());
  out["mu"] = std::vector<double>(factors.mu.data(), factors.mu.data() + factors.mu.size());
  std::vector<double> q_row_major;
  q_row_major.reserve(static_cast<std::size_t>(factors.Q.size()));
  for (Eigen::Index i = 0; i < factors.Q.rows(); ++i)
    for (Eigen::Index k = 0; k < factors.Q.cols(); ++k) q_row_major.push_back(factors.Q(i, k));
  out["Q"] = std::move(q_row_major);
  out["d"] = factors.d;
  out["m"] = factors.m;
  out["n"] = factors.n;
  out["iterations"] = factors.iterations;
  out["converged"] = factors.converged;
  out["reconstructionError"] = reconstruction_error;
  out["orthogonalityError"] = factors.orthogonality_error();
  return out;
}

bench::ExperimentConfig config_from_json(const json& j) {
  bench::ExperimentConfig config;
  config.kind = bench::kind_from_string(j.at("kind").get<std::string>());
  config.n = j.value("n", config.n);
  config.rank_a = j.value("rankA", config.rank_a);
  config.rank_b = j.value("rankB", config.rank_b);
  config.orthogonal = j.value("orthogonal", config.orthogonal);
  config.train_length = j.value("L", config.train_length);
  if (j.contains("ranks")) config.ranks = j.at("ranks").get<std::vector<std::size_t>>();
  config.dodd_m = j.value("m", config.dodd_m);
  config.dodd_n = j.value("doddN", j.value("n", config.dodd_n));
  config.dodd_d = j.value("d", config.dodd_d);
  config.exact = j.value("exact", config.exact);
  config.method = j.value("method", config.method);
  config.na = j.value("na", config.na);
  config.nb = j.value("nb", config.nb);
  config.nd = j.value("nd", config.nd);
  config.ne = j.value("ne", config.ne);
  config.nbond = j.value("nbond", config.nbond);
  config.rank_left = j.value("rankLeft", config.rank_left);
  config.rank_right = j.value("rankRight", config.rank_right);
  config.noise_sigma = j.value("noiseSigma", config.noise_sigma);
  config.trials = j.value("trials", config.trials);
  config.seed = j.value("seed", config.seed);
  config.threads = j.value("threads", config.threads);
  config.rank_tol = j.value("rankTol", config.rank_tol);
  config.tol = j.value("tol", config.tol);
  config.max_iter = j.value("maxIter", config.max_iter);
  config.psd_attempts = j.value("psdAttempts", config.psd_attempts);
  config.learn_rate = j.value("learnRate", config.learn_rate);
  config.validate();
  return config;
}

json config_to_json(const bench::ExperimentConfig& config) {
  json j;
  j["kind"] = bench::kind_name(config.kind);
  j["n"] = config.n;
  j["rankA"] = config.rank_a;
  j["rankB"] = config.rank_b;
  j["orthogonal"] = config.orthogonal;
  j["L"] = config.train_length;
  j["ranks"] = config.ranks;
  j["m"] = config.dodd_m;
  j["doddN"] = config.dodd_n;
  j["d"] = config.dodd_d;
  j["exact"] = config.exact;
  j["method"] = config.method;
  j["na"] = config.na;
  j["nb"] = config.nb;
  j["nd"] = config.nd;
  j["ne"] = config.ne;
  j["nbond"] = config.nbond;
  j["rankLeft"] = config.rank_left;
  j["rankRight"] = config.rank_right;
  j["noiseSigma"] = config.noise_sigma;
  j["trials"] = config.trials;
  j["seed"] = config.seed;
  j["threads"] = config.threads;
  j["rankTol"] = config.rank_tol;
  j["tol"] = config.tol;
  j["maxIter"] = config.max_iter;
  j["psdAttempts"] = config.psd_attempts;
  j["learnRate"] = config.learn_rate;
  return j;
}

bench::ExperimentConfig read_config(const std::string& path) {
  return config_from_json(parse_json(read_file(path)));
}

json summary_to_json(const bench::ExperimentConfig& config, const bench::TrialStats& stats) {
  json j;
  j["config"] = config_to_json(config);
  json agg;
  if (stats.recorded_count > 0) {
    agg["geoMeanRelErr"] = stats.geo_mean_rel_err;
    agg["arithMeanRelErr"] = stats.arith_mean_rel_err;
  } else {
    agg["geoMeanRelErr"] = nullptr;
    agg["arithMeanRelErr"] = nullptr;
  }
  agg["successCount"] = stats.success_count;
  agg["errorCount"] = stats.error_count;
  agg["recordedCount"] = stats.recorded_count;
  agg["meanRuntimeSec"] = stats.mean_runtime_sec;
  agg["meanIterations"] = stats.mean_iterations;
  std::size_t psd_found = 0;
  std::size_t converged = 0;
  for (const auto& record : stats.per_trial) {
    if (record.error_code != "PsdSearchFailed" && record.error_code.empty()) ++psd_found;
    if (record.converged) ++converged;
  }
  agg["psdFoundCount"] = psd_found;
  agg["convergedCount"] = converged;
  j["aggregates"] = std::move(agg);
  j["metadata"] = {{"coefficientDistribution", "uniform magnitude in [0.5, 2], random sign"},
                   {"nonOrthogonalFamily",
                    "positive unit vectors and positive coefficients (keeps the PSD search "
                    "feasible on the higher-rank side)"},
                   {"genericDraws", "iid standard normal, seeded"}};
  return j;
}

}  // namespace ttd::io
