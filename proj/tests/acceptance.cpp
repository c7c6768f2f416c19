// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Budgets, tolerances and trial counts are pinned in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "test_helpers.hpp"
#include "ttd/dodd.hpp"
#include "ttd/errors.hpp"
#include "ttd/harness.hpp"
#include "ttd/linalg.hpp"
#include "ttd/symm_ttl.hpp"

using namespace ttd;
namespace bench = ttd::bench;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& label, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, label.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

bench::ExperimentConfig tt2_config(std::size_t n, std::size_t ra, std::size_t rb, bool orthogonal,
                                   double sigma, std::uint64_t seed) {
  bench::ExperimentConfig config;
  config.kind = bench::Kind::SymmTt2;
  config.n = n;
  config.rank_a = ra;
  config.rank_b = rb;
  config.orthogonal = orthogonal;
  config.noise_sigma = sigma;
  config.trials = 100;
  config.seed = seed;
  config.threads = 2;
  return config;
}

std::string geo_detail(const bench::TrialStats& stats) {
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer), "geoMeanRelErr=%.3e recorded=%zu success=%zu",
                stats.geo_mean_rel_err, stats.recorded_count, stats.success_count);
  return buffer;
}

void criterion_1() {
  const bench::TrialStats a = bench::run_experiment(tt2_config(5, 2, 3, true, 0.0, 1001));
  const bench::TrialStats b = bench::run_experiment(tt2_config(5, 5, 5, true, 0.0, 1002));
  report(1, "symm-tt2 exact orthogonal (5,2,3)", a.geo_mean_rel_err <= 1e-12, geo_detail(a));
  report(1, "symm-tt2 exact orthogonal (5,5,5)", b.geo_mean_rel_err <= 1e-12, geo_detail(b));
}

void criterion_2() {
  const bench::TrialStats a = bench::run_experiment(tt2_config(5, 2, 3, true, 1e-6, 1003));
  const bench::TrialStats b = bench::run_experiment(tt2_config(5, 5, 5, true, 1e-6, 1004));
  report(2, "symm-tt2 noise 1e-6 (5,2,3)", a.geo_mean_rel_err <= 1e-3, geo_detail(a));
  report(2, "symm-tt2 noise 1e-6 (5,5,5)", b.geo_mean_rel_err <= 1e-3, geo_detail(b));
}

void criterion_3() {
  const bench::TrialStats stats = bench::run_experiment(tt2_config(5, 2, 3, false, 0.0, 1005));
  std::size_t psd_found = 0;
  for (const auto& record : stats.per_trial)
    if (record.error_code.empty()) ++psd_found;
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer), "psdFound=%zu geoMeanRelErr=%.3e", psd_found,
                stats.geo_mean_rel_err);
  report(3, "whitening viability (5,2,3) non-orthogonal",
         psd_found >= 90 && stats.geo_mean_rel_err <= 1e-10, buffer);
}

void criterion_4() {
  auto config = [](std::vector<std::size_t> ranks, std::uint64_t seed) {
    bench::ExperimentConfig c;
    c.kind = bench::Kind::SymmTtl;
    c.n = 4;
    c.train_length = 3;
    c.ranks = std::move(ranks);
    c.trials = 100;
    c.seed = seed;
    c.threads = 2;
    return c;
  };
  const auto start = std::chrono::steady_clock::now();
  const bench::TrialStats a = bench::run_experiment(config({2, 2, 2}, 1006));
  const bench::TrialStats b = bench::run_experiment(config({4, 4, 4}, 1007));
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(4, "symm-ttl (4,3,(2,2,2))", a.geo_mean_rel_err <= 1e-10, geo_detail(a));
  report(4, "symm-ttl (4,3,(4,4,4))", b.geo_mean_rel_err <= 1e-10, geo_detail(b));
  char buffer[96];
  std::snprintf(buffer, sizeof(buffer), "two 100-trial batches in %.1f s", elapsed);
  report(4, "symm-ttl runtime budget", elapsed <= 120.0, buffer);
}

void criterion_5() {
  for (const char* method : {"sinkhorn", "procrustes"}) {
    for (std::size_t n : {3u, 10u, 25u}) {
      bench::ExperimentConfig config;
      config.kind = bench::Kind::DoddSquare;
      config.dodd_d = n;
      config.method = method;
      config.trials = 100;
      config.seed = 2000 + n;
      config.threads = 2;
      const bench::TrialStats stats = bench::run_experiment(config);
      std::size_t converged = 0;
      std::size_t successful = 0;
      int max_iterations = 0;
      for (const auto& record : stats.per_trial) {
        if (record.converged) ++converged;
        if (record.rel_err.has_value() && *record.rel_err < 1e-10) ++successful;
        max_iterations = std::max(max_iterations, record.iterations);
      }
      char buffer[160];
      std::snprintf(buffer, sizeof(buffer), "converged=%zu success=%zu maxIter=%d", converged,
                    successful, max_iterations);
      report(5, std::string("square DODD ") + method + " n=" + std::to_string(n),
             converged == 100 && successful == 100 && max_iterations <= 1000, buffer);
    }
  }
}

void criterion_6() {
  auto run_d = [](std::size_t d, std::uint64_t seed) {
    bench::ExperimentConfig config;
    config.kind = bench::Kind::DoddGeneral;
    config.dodd_m = 6;
    config.dodd_n = 5;
    config.dodd_d = d;
    config.exact = true;
    config.learn_rate = 2;
    config.trials = 100;
    config.seed = seed;
    config.threads = 2;
    const bench::TrialStats stats = bench::run_experiment(config);
    return stats.success_count;
  };
  const std::size_t at6 = run_d(6, 3001);
  const std::size_t at7 = run_d(7, 3002);
  const std::size_t at30 = run_d(30, 3003);
  char buffer[120];
  std::snprintf(buffer, sizeof(buffer), "success@d6=%zu (want 58..88)", at6);
  report(6, "general DODD d=6", at6 >= 58 && at6 <= 88, buffer);
  std::snprintf(buffer, sizeof(buffer), "success@d7=%zu (want <10)", at7);
  report(6, "general DODD d=7", at7 < 10, buffer);
  std::snprintf(buffer, sizeof(buffer), "success@d30=%zu (want >=85)", at30);
  report(6, "general DODD d=30", at30 >= 85, buffer);
}

void property_a() {
  Rng rng(4001);
  bool pass = true;
  for (int trial = 0; trial < 20 && pass; ++trial) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.next_u64() % 6);
    Eigen::MatrixXd X;
    for (;;) {
      const Eigen::MatrixXd Q = random_orthonormal(n, n, rng);
      X = testing::bounded_coefficients(n, rng).asDiagonal() * Q *
          testing::bounded_coefficients(n, rng).asDiagonal();
      if (X.array().abs().minCoeff() >= 1e-12) break;
    }
    const dodd::Factors factors = dodd::sinkhorn_square(X);
    if (!factors.converged) {
      pass = false;
      break;
    }
    const Eigen::MatrixXd squared = factors.Q.array().square();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(squared.row(i).sum() - 1.0) > 1e-12) pass = false;
      if (std::abs(squared.col(i).sum() - 1.0) > 1e-12) pass = false;
    }
  }
  report(7, "(a) balanced squares are doubly stochastic within 1e-12", pass, "20 instances");
}

void property_b() {
  Rng rng(4002);
  bool pass = true;
  for (int trial = 0; trial < 50 && pass; ++trial) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.next_u64() % 8);
    const dodd::TandemResult fit =
        dodd::tandem_procrustes(rng.normal_matrix(n, n), Eigen::MatrixXd::Identity(n, n));
    for (std::size_t i = 1; i < fit.residual_history.size(); ++i)
      if (fit.residual_history[i] >
          fit.residual_history[i - 1] + 1e-12 * std::max(1.0, fit.residual_history[i - 1]))
        pass = false;
  }
  report(7, "(b) tandem residual is non-increasing", pass, "50 instances");
}

void property_c() {
  Rng rng(4003);
  bool pass = true;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.next_u64() % 2);
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng.next_u64() % 2);
    const Eigen::Index inner = 1 + static_cast<Eigen::Index>(rng.next_u64() % r);
    const Eigen::MatrixXd Q = random_orthonormal(n, n, rng);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < inner; ++i) m[i] = rng.signed_uniform(0.5, 2.0);
    Eigen::MatrixXd S = Q * m.asDiagonal() * Q.transpose();
    S.block(r, r, n - r, n - r).setZero();
    const Eigen::MatrixXd quick = ttl::kernel_complete(S, static_cast<std::size_t>(r));
    const Eigen::MatrixXd oracle =
        testing::symbolic_elimination_complete(S, static_cast<std::size_t>(r));
    const double gap = (quick - oracle).norm() / std::max(1.0, oracle.norm());
    worst = std::max(worst, gap);
    if (gap > 1e-9) pass = false;
  }
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "worst gap %.2e", worst);
  report(7, "(c) kernel completion equals the elimination oracle", pass, buffer);
}

void property_d() {
  Rng rng(4004);
  bool pass = true;
  for (int trial = 0; trial < 50 && pass; ++trial) {
    const Eigen::Index r = 2 + static_cast<Eigen::Index>(rng.next_u64() % 4);
    Eigen::MatrixXd R(r, r);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = i; j < r; ++j) {
        R(i, j) = rng.signed_uniform(0.3, 2.0);
        R(j, i) = R(i, j);
      }
    const Eigen::VectorXd lambda = testing::bounded_coefficients(r, rng);
    const ttl::Symmetrizer sym = ttl::symmetrizing_scaling(lambda.asDiagonal() * R);
    Eigen::VectorXd expected = lambda.array().inverse();
    expected /= expected.norm();
    if (std::abs(std::abs(sym.scaling.dot(expected)) - 1.0) > 1e-8) pass = false;
  }

  Eigen::MatrixXd degenerate_block = Eigen::MatrixXd::Zero(2, 2);
  degenerate_block(0, 0) = 1.7;
  const bool nullity2 = ttl::symmetrizing_scaling(degenerate_block).nullity == 2;
  const bool nullity3 = ttl::symmetrizing_scaling(Eigen::MatrixXd::Identity(3, 3)).nullity == 3;
  report(7, "(d) symmetrizer parallel to reciprocal coefficients + degenerate nullities",
         pass && nullity2 && nullity3, "50 instances + 2 degenerate examples");
}

void property_e() {
  Rng rng(4005);
  bool pass = true;
  for (int trial = 0; trial < 50 && pass; ++trial) {
    const std::size_t order = 3 + rng.next_u64() % 2;
    std::vector<std::size_t> shape;
    std::vector<Eigen::VectorXd> truth;
    for (std::size_t k = 0; k < order; ++k) {
      const Eigen::Index nk = 2 + static_cast<Eigen::Index>(rng.next_u64() % 3);
      shape.push_back(static_cast<std::size_t>(nk));
      truth.push_back(testing::bounded_coefficients(nk, rng));
    }
    DenseTensor R(shape);
    std::vector<std::size_t> idx(order, 0);
    for (std::size_t flat = 0; flat < R.size(); ++flat) {
      double value = 1.0;
      for (std::size_t k = 0; k < order; ++k) value *= truth[k][static_cast<Eigen::Index>(idx[k])];
      R[flat] = value;
      for (std::size_t k = order; k-- > 0;) {
        if (++idx[k] < shape[k]) break;
        idx[k] = 0;
      }
    }
    const auto factors = ttl::rank_one_als(R, 1);
    DenseTensor recon(shape);
    std::fill(idx.begin(), idx.end(), 0);
    for (std::size_t flat = 0; flat < recon.size(); ++flat) {
      double value = 1.0;
      for (std::size_t k = 0; k < order; ++k)
        value *= factors[k][static_cast<Eigen::Index>(idx[k])];
      recon[flat] = value;
      for (std::size_t k = order; k-- > 0;) {
        if (++idx[k] < shape[k]) break;
        idx[k] = 0;
      }
    }
    if (relative_error(recon, R) > 1e-10) pass = false;
  }
  report(7, "(e) rank-1 ALS reconstructs exactly in one sweep", pass, "50 instances");
}

void property_f() {
  bench::ExperimentConfig config;
  config.kind = bench::Kind::SymmTt2;
  config.seed = 4006;
  const bench::Instance instance = bench::make_instance(config, 0);
  bool pass = true;
  for (double sigma : {1e-8, 1e-6, 1e-2, 0.3}) {
    const DenseTensor noisy = bench::add_noise(*instance.tensor, sigma, 99);
    if (std::abs(relative_error(noisy, *instance.tensor) - sigma) > 1e-12) pass = false;
  }
  report(7, "(f) noise model relative error equals sigma", pass, "4 noise levels");
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  property_a();
  property_b();
  property_c();
  property_d();
  property_e();
  property_f();
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s: %d failing check(s), %.1f s total\n", g_failures == 0 ? "ACCEPTED" : "REJECTED",
              g_failures, elapsed);
  return g_failures == 0 ? 0 : 1;
}
