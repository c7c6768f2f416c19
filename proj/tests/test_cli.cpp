#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "ttd/io.hpp"

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
};

CommandResult run_cli(const std::string& args, const std::string& tag) {
  const std::string out_path = "/tmp/ttd_cli_out_" + tag;
  const std::string err_path = "/tmp/ttd_cli_err_" + tag;
  const std::string command =
      std::string(TTD_CLI_PATH) + " " + args + " >" + out_path + " 2>" + err_path;
  const int status = std::system(command.c_str());

  auto slurp = [](const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  };
  CommandResult result;
  result.exit_code = WEXITSTATUS(status);
  result.stdout_text = slurp(out_path);
  result.stderr_text = slurp(err_path);
  return result;
}

double parse_relative_error(const std::string& stdout_text) {
  const std::string key = "relative_error=";
  const auto pos = stdout_text.find(key);
  REQUIRE(pos != std::string::npos);
  return std::stod(stdout_text.substr(pos + key.size()));
}

}  // namespace

TEST_CASE("generate then decompose reports a tiny relative error") {
  const auto gen = run_cli(
      "generate --kind symm-tt2 -n 5 --rank-a 2 --rank-b 3 --seed 4 "
      "--out /tmp/ttd_t.json --truth /tmp/ttd_truth.json",
      "gen");
  REQUIRE(gen.exit_code == 0);

  const auto dec = run_cli(
      "decompose --kind symm-tt2 --input /tmp/ttd_t.json --seed 1 --out /tmp/ttd_dec.json",
      "dec");
  REQUIRE(dec.exit_code == 0);
  CHECK(parse_relative_error(dec.stdout_text) < 1e-10);

  // The written decomposition parses and reassembles.
  const ttd::TrainDecomposition decomp =
      ttd::io::decomposition_from_json(ttd::io::parse_json(ttd::io::read_file("/tmp/ttd_dec.json")));
  const ttd::DenseTensor input = ttd::io::read_tensor("/tmp/ttd_t.json");
  CHECK(ttd::relative_error(ttd::assemble_train(decomp), input) < 1e-10);
}

TEST_CASE("dodd subcommand factors an exact square instance") {
  const auto gen = run_cli("generate --kind dodd-square --dodd-n 4 --d 4 --seed 7 "
                           "--out /tmp/ttd_x.json",
                           "dodd_gen");
  REQUIRE(gen.exit_code == 0);
  const auto fac = run_cli(
      "dodd --method sinkhorn --input /tmp/ttd_x.json --out /tmp/ttd_factors.json", "dodd_run");
  REQUIRE(fac.exit_code == 0);
  const auto factors = ttd::io::parse_json(ttd::io::read_file("/tmp/ttd_factors.json"));
  CHECK(factors.at("converged").get<bool>());
  CHECK(factors.at("reconstructionError").get<double>() < 1e-10);
}

TEST_CASE("dodd rejects a zero entry with exit code 1 and a machine-readable error") {
  ttd::io::write_file("/tmp/ttd_zero.json",
                      R"({"shape": [2, 2], "data": [1.0, 0.0, 2.0, 3.0]})");
  const auto result = run_cli("dodd --method sinkhorn --input /tmp/ttd_zero.json", "dodd_zero");
  CHECK(result.exit_code == 1);
  const auto err = ttd::io::parse_json(result.stderr_text);
  CHECK(err.at("error") == "ZeroEntry");
}

TEST_CASE("malformed JSON exits with code 2") {
  ttd::io::write_file("/tmp/ttd_bad.json", "{broken");
  const auto result = run_cli("decompose --kind symm-tt2 --input /tmp/ttd_bad.json", "bad_json");
  CHECK(result.exit_code == 2);
  const auto err = ttd::io::parse_json(result.stderr_text);
  CHECK(err.at("error") == "ParseError");
}

TEST_CASE("bench writes deterministic CSV output") {
  ttd::io::write_file("/tmp/ttd_cfg.json",
                      R"({"kind": "symm-tt2", "n": 4, "rankA": 2, "rankB": 2,
                          "trials": 4, "seed": 11})");
  const auto first = run_cli(
      "bench --config /tmp/ttd_cfg.json --out-csv /tmp/ttd_b1.csv --out-summary /tmp/ttd_s1.json",
      "bench1");
  REQUIRE(first.exit_code == 0);
  const auto second = run_cli(
      "bench --config /tmp/ttd_cfg.json --out-csv /tmp/ttd_b2.csv --out-summary /tmp/ttd_s2.json",
      "bench2");
  REQUIRE(second.exit_code == 0);

  auto strip_runtime = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
  };
  const std::string csv1 = ttd::io::read_file("/tmp/ttd_b1.csv");
  const std::string csv2 = ttd::io::read_file("/tmp/ttd_b2.csv");
  CHECK(strip_runtime(csv1) == strip_runtime(csv2));

  std::istringstream in(csv1);
  std::string line;
  int rows = -1;  // header
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("usage errors exit with code 2") {
  const auto result = run_cli("decompose", "usage");
  CHECK(result.exit_code == 2);
}
