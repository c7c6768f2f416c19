// Command-line front end: generate instances, run the decomposition solvers,
// factor matrices, and reproduce the benchmark tables.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttd/dodd.hpp"
#include "ttd/errors.hpp"
#include "ttd/harness.hpp"
#include "ttd/io.hpp"
#include "ttd/odeco_tt2.hpp"
#include "ttd/symm_tt2.hpp"
#include "ttd/symm_ttl.hpp"
#include "ttd/tensor.hpp"
#include "ttd/train.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitSolver = 1;
constexpr int kExitUsage = 2;

void print_error(const ttd::Error& err) {
  json out;
  out["error"] = err.code_name();
  out["message"] = err.what();
  std::cerr << out.dump() << "\n";
}

int exit_code_for(const ttd::Error& err) {
  switch (err.code()) {
    case ttd::ErrorCode::IoError:
    case ttd::ErrorCode::ParseError:
    case ttd::ErrorCode::InvalidConfig:
      return kExitUsage;
    default:
      return kExitSolver;
  }
}

struct GenerateArgs {
  std::string kind = "symm-tt2";
  std::string out_path = "tensor.json";
  std::string truth_path;
  std::size_t n = 5, rank_a = 2, rank_b = 3, length = 3;
  std::vector<std::size_t> ranks;
  std::size_t m = 6, dodd_n = 5, d = 6;
  std::size_t na = 4, nb = 4, nd = 4, ne = 4, nbond = 4, rank_left = 2, rank_right = 2;
  bool non_orthogonal = false;
  bool non_exact = false;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

int run_generate(const GenerateArgs& args) {
  ttd::bench::ExperimentConfig config;
  config.kind = ttd::bench::kind_from_string(args.kind);
  config.n = args.n;
  config.rank_a = args.rank_a;
  config.rank_b = args.rank_b;
  config.orthogonal = !args.non_orthogonal;
  config.train_length = args.length;
  config.ranks = args.ranks.empty() ? std::vector<std::size_t>(args.length, 2) : args.ranks;
  config.dodd_m = args.m;
  config.dodd_n = args.dodd_n;
  config.dodd_d = args.d;
  config.exact = !args.non_exact;
  config.na = args.na;
  config.nb = args.nb;
  config.nd = args.nd;
  config.ne = args.ne;
  config.nbond = args.nbond;
  config.rank_left = args.rank_left;
  config.rank_right = args.rank_right;
  config.seed = args.seed;
  config.trials = 1;

  const ttd::bench::Instance instance = ttd::bench::make_instance(config, 0);
  if (instance.tensor.has_value()) {
    ttd::DenseTensor out = *instance.tensor;
    if (args.sigma > 0.0)
      out = ttd::bench::add_noise(out, args.sigma, ttd::Rng::derive(args.seed, 0x22, 0));
    ttd::io::write_tensor(args.out_path, out);
  } else {
    ttd::io::write_file(args.out_path, ttd::io::matrix_to_tensor_json(*instance.matrix).dump());
  }
  if (!args.truth_path.empty() && instance.ground_truth.has_value()) {
    ttd::io::DecompositionMeta meta;
    meta.seed = args.seed;
    ttd::io::write_file(args.truth_path,
                        ttd::io::decomposition_to_json(*instance.ground_truth, meta).dump());
  }
  std::printf("wrote %s\n", args.out_path.c_str());
  return kExitOk;
}

struct DecomposeArgs {
  std::string kind = "symm-tt2";
  std::string input;
  std::string out_path;
  std::string method = "auto";
  std::size_t length = 3;
  std::size_t d = 0;
  bool whiten = false;
  double rank_tol = 1e-8;
  int psd_attempts = 200;
  int max_iter = 1000;
  int learn_rate = 2;
  std::uint64_t seed = 0;
};

int run_decompose(const DecomposeArgs& args) {
  const ttd::DenseTensor input = ttd::io::read_tensor(args.input);
  ttd::TrainDecomposition result;
  ttd::io::DecompositionMeta meta;
  meta.seed = args.seed;
  meta.rank_tol = args.rank_tol;

  if (args.kind == "symm-tt2") {
    ttd::tt2::Options opts;
    opts.whiten = args.whiten;
    opts.max_psd_attempts = args.psd_attempts;
    opts.rank_tol = args.rank_tol;
    opts.seed = args.seed;
    ttd::tt2::Info info;
    result = ttd::tt2::decompose(input, opts, &info);
    meta.whitened = info.whitened;
    meta.psd_attempts = info.psd_attempts;
  } else if (args.kind == "symm-ttl") {
    ttd::ttl::Options opts;
    opts.rank_tol = args.rank_tol;
    opts.seed = args.seed;
    ttd::ttl::Info info;
    result = ttd::ttl::decompose(input, args.length, opts, &info);
    meta.positions = info.positions;
  } else if (args.kind == "odeco-tt2") {
    ttd::odeco::Options opts;
    opts.rank_tol = args.rank_tol;
    opts.seed = args.seed;
    opts.d = args.d;
    opts.method = ttd::odeco::method_from_string(args.method);
    opts.general.max_iter = args.max_iter;
    opts.general.learn_rate = args.learn_rate;
    result = ttd::odeco::decompose(input, opts);
  } else {
    throw ttd::Error(ttd::ErrorCode::InvalidConfig, "unknown decomposition kind: " + args.kind);
  }

  const double rel_err = ttd::relative_error(ttd::assemble_train(result), input);
  if (!args.out_path.empty())
    ttd::io::write_file(args.out_path, ttd::io::decomposition_to_json(result, meta).dump());
  std::printf("relative_error=%.17g\n", rel_err);
  return kExitOk;
}

struct DoddArgs {
  std::string input;
  std::string out_path;
  std::string method = "sinkhorn";
  std::size_t d = 0;
  int learn_rate = 2;
  double tol = 1e-28;
  int max_iter = 1000;
  std::uint64_t seed = 0;
};

int run_dodd(const DoddArgs& args) {
  const Eigen::MatrixXd input = ttd::io::read_matrix(args.input);
  const std::size_t d =
      args.d != 0 ? args.d
                  : static_cast<std::size_t>(std::max(input.rows(), input.cols()));

  ttd::dodd::Factors factors;
  if (args.method == "sinkhorn") {
    factors = ttd::dodd::sinkhorn_square(ttd::dodd::zero_inflate(input, d),
                                         {args.tol, args.max_iter});
  } else if (args.method == "procrustes") {
    factors = ttd::dodd::procrustes_square(ttd::dodd::zero_inflate(input, d),
                                           {args.tol, args.max_iter});
  } else if (args.method == "general") {
    ttd::dodd::GeneralOptions opts;
    opts.tol = args.tol;
    opts.max_iter = args.max_iter;
    opts.learn_rate = args.learn_rate;
    opts.seed = args.seed;
    factors = ttd::dodd::general(input, d, opts);
  } else {
    throw ttd::Error(ttd::ErrorCode::InvalidConfig, "unknown DODD method: " + args.method);
  }

  const Eigen::MatrixXd target = ttd::dodd::zero_inflate(input, d);
  const double target_norm = target.norm();
  const double recon_err = target_norm > 0.0
                               ? (factors.reconstruction() - target).norm() / target_norm
                               : factors.reconstruction().norm();
  const json out = ttd::io::factors_to_json(factors, recon_err);
  if (!args.out_path.empty())
    ttd::io::write_file(args.out_path, out.dump());
  else
    std::printf("%s\n", out.dump().c_str());

  if (!factors.converged)
    throw ttd::Error(ttd::ErrorCode::NotConverged,
                     "solver hit the iteration cap at " + std::to_string(factors.iterations));
  return kExitOk;
}

struct BenchArgs {
  std::string config_path;
  std::string csv_path = "bench.csv";
  std::string summary_path = "bench_summary.json";
  std::string hist_path;
  int threads = 0;
};

int run_bench(const BenchArgs& args) {
  ttd::bench::ExperimentConfig config = ttd::io::read_config(args.config_path);
  if (args.threads > 0) config.threads = args.threads;
  const ttd::bench::TrialStats stats = ttd::bench::run_experiment(config);
  ttd::io::write_file(args.csv_path, ttd::bench::to_csv(stats));
  ttd::io::write_file(args.summary_path, ttd::io::summary_to_json(config, stats).dump(2));
  if (!args.hist_path.empty())
    ttd::io::write_file(args.hist_path, ttd::bench::iteration_histogram_csv(stats));
  if (stats.recorded_count > 0)
    std::printf("trials=%zu recorded=%zu success=%zu geoMeanRelErr=%.6g\n",
                stats.per_trial.size(), stats.recorded_count, stats.success_count,
                stats.geo_mean_rel_err);
  else
    std::printf("trials=%zu recorded=0 success=0 geoMeanRelErr=-\n", stats.per_trial.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor-train decomposition toolkit: symmetric and odeco trains, "
               "diagonal-orthogonal-diagonal matrix factorizations, benchmark runner"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "Generate an instance with ground truth");
  generate->add_option("--kind", gen.kind,
                       "symm-tt2 | symm-ttl | dodd-square | dodd-general | odeco-tt2");
  generate->add_option("--out", gen.out_path, "Output tensor JSON path");
  generate->add_option("--truth", gen.truth_path, "Ground-truth decomposition JSON path");
  generate->add_option("-n,--n", gen.n, "Mode dimension");
  generate->add_option("--rank-a", gen.rank_a, "Left carriage rank");
  generate->add_option("--rank-b", gen.rank_b, "Right carriage rank");
  generate->add_option("-L,--length", gen.length, "Train length (symm-ttl)");
  generate->add_option("--ranks", gen.ranks, "Per-carriage ranks (symm-ttl)");
  generate->add_option("-m,--m", gen.m, "Rows (dodd-general)");
  generate->add_option("--dodd-n", gen.dodd_n, "Columns (dodd-general); size (dodd-square)");
  generate->add_option("--d", gen.d, "Inflation size");
  generate->add_option("--na", gen.na, "Odeco mode dimension a");
  generate->add_option("--nb", gen.nb, "Odeco mode dimension b");
  generate->add_option("--nd", gen.nd, "Odeco mode dimension d");
  generate->add_option("--ne", gen.ne, "Odeco mode dimension e");
  generate->add_option("--nbond", gen.nbond, "Odeco bond dimension");
  generate->add_option("--rank-left", gen.rank_left, "Odeco left rank");
  generate->add_option("--rank-right", gen.rank_right, "Odeco right rank");
  generate->add_flag("--non-orthogonal", gen.non_orthogonal, "Unit but non-orthogonal vectors");
  generate->add_flag("--non-exact", gen.non_exact, "Gaussian matrix instead of exact DODD");
  generate->add_option("--sigma", gen.sigma, "Relative Gaussian noise level");
  generate->add_option("--seed", gen.seed, "Base seed");

  DecomposeArgs dec;
  CLI::App* decompose = app.add_subcommand("decompose", "Recover a train decomposition");
  decompose->add_option("--kind", dec.kind, "symm-tt2 | symm-ttl | odeco-tt2");
  decompose->add_option("--input", dec.input, "Tensor JSON path")->required();
  decompose->add_option("--out", dec.out_path, "Decomposition JSON path");
  decompose->add_option("--method", dec.method, "DODD method for odeco-tt2");
  decompose->add_option("-L,--length", dec.length, "Train length (symm-ttl)");
  decompose->add_option("--d", dec.d, "Inflation size (odeco-tt2)");
  decompose->add_flag("--whiten", dec.whiten, "Whiten first (non-orthogonal symmetric case)");
  decompose->add_option("--rank-tol", dec.rank_tol, "Relative rank-detection tolerance");
  decompose->add_option("--psd-attempts", dec.psd_attempts, "PSD search budget");
  decompose->add_option("--max-iter", dec.max_iter, "DODD iteration cap");
  decompose->add_option("--learn-rate", dec.learn_rate, "General DODD learning rate");
  decompose->add_option("--seed", dec.seed, "Seed for generic draws");

  DoddArgs dodd_args;
  CLI::App* dodd_cmd = app.add_subcommand("dodd", "Diagonal-orthogonal-diagonal factorization");
  dodd_cmd->add_option("--input", dodd_args.input, "Matrix as 2-way tensor JSON")->required();
  dodd_cmd->add_option("--out", dodd_args.out_path, "Factors JSON path (default: stdout)");
  dodd_cmd->add_option("--method", dodd_args.method, "sinkhorn | procrustes | general");
  dodd_cmd->add_option("--d", dodd_args.d, "Inflation size (default max(m, n))");
  dodd_cmd->add_option("--learn-rate", dodd_args.learn_rate, "General DODD learning rate");
  dodd_cmd->add_option("--tol", dodd_args.tol, "Convergence tolerance");
  dodd_cmd->add_option("--max-iter", dodd_args.max_iter, "Iteration cap");
  dodd_cmd->add_option("--seed", dodd_args.seed, "Seed for the unknown-region init");

  BenchArgs bench_args;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Run an experiment config");
  bench_cmd->add_option("--config", bench_args.config_path, "Experiment config JSON")->required();
  bench_cmd->add_option("--out-csv", bench_args.csv_path, "Per-trial CSV path");
  bench_cmd->add_option("--out-summary", bench_args.summary_path, "Summary JSON path");
  bench_cmd->add_option("--hist", bench_args.hist_path, "Iteration histogram CSV path");
  bench_cmd->add_option("--threads", bench_args.threads, "Worker threads (0 = config value)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (generate->parsed()) return run_generate(gen);
    if (decompose->parsed()) return run_decompose(dec);
    if (dodd_cmd->parsed()) return run_dodd(dodd_args);
    if (bench_cmd->parsed()) return run_bench(bench_args);
  } catch (const ttd::Error& err) {
    print_error(err);
    return exit_code_for(err);
  } catch (const std::exception& err) {
    json out;
    out["error"] = "Internal";
    out["message"] = err.what();
    std::cerr << out.dump() << "\n";
    return kExitSolver;
  }
  return kExitUsage;
}
