#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli/app.hpp"
#include "qsl/dataset_io.hpp"

using nlohmann::json;

namespace {

struct CliOutcome {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the app with both standard streams captured.
CliOutcome run_cli(const std::vector<std::string>& args) {
  std::stringstream out, err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = qsl::cli::run_app(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return json::parse(in);
}

std::string body_without_timestamp(const std::filesystem::path& path) {
  json j = load_json(path);
  j.erase("timestamp");
  return j.dump();
}

}  // namespace

TEST_CASE("gen writes a loadable dataset") {
  const auto path = temp_file("qsl_cli_gen.csv");
  const CliOutcome r = run_cli({"gen", "--seed", "5", "--clusters", "3",
                                "--per-cluster", "8", "--dim", "2", "--out",
                                path.string()});
  CHECK_EQ(r.exit_code, qsl::cli::kExitOk);
  const qsl::Dataset ds = qsl::load_dataset(path.string());
  CHECK_EQ(ds.size(), 24);
  CHECK_EQ(ds.dim(), 2);
  CHECK_EQ(ds.labeled_count(), 3);  // ceil(0.1 * 24)
  std::filesystem::remove(path);
}

TEST_CASE("run on fully labeled data notes the supervised limit") {
  const auto csv = temp_file("qsl_cli_supervised.csv");
  const auto report = temp_file("qsl_cli_supervised.json");
  REQUIRE_EQ(run_cli({"gen", "--seed", "5", "--labeled-fraction", "1.0",
                      "--out", csv.string()})
                 .exit_code,
             qsl::cli::kExitOk);
  const CliOutcome r = run_cli({"run", "--algo", "pnn", "--data", csv.string(),
                                "--out", report.string()});
  CHECK_EQ(r.exit_code, qsl::cli::kExitOk);
  const json j = load_json(report);
  CHECK_EQ(j["dataset"]["u"], 0);
  const std::string note = j["result"]["note"];
  CHECK(note.find("supervised limit") != std::string::npos);
  CHECK(j["result"]["trace"].empty());
  std::filesystem::remove(csv);
  std::filesystem::remove(report);
}

TEST_CASE("identical configs give byte-identical bodies modulo timestamp") {
  const auto a = temp_file("qsl_cli_rerun_a.json");
  const auto b = temp_file("qsl_cli_rerun_b.json");
  const std::vector<std::string> base = {
      "run",    "--algo", "kmeans", "--backend", "quantum-noisy",
      "--seed", "9",      "--max-iter", "4"};
  auto with_out = [&](const std::filesystem::path& p) {
    std::vector<std::string> args = base;
    args.push_back("--out");
    args.push_back(p.string());
    return args;
  };
  REQUIRE_EQ(run_cli(with_out(a)).exit_code, qsl::cli::kExitOk);
  REQUIRE_EQ(run_cli(with_out(b)).exit_code, qsl::cli::kExitOk);
  CHECK_EQ(body_without_timestamp(a), body_without_timestamp(b));
  // The raw bodies differ only inside the timestamp object.
  json ja = load_json(a), jb = load_json(b);
  CHECK(ja.contains("timestamp"));
  ja.erase("timestamp");
  jb.erase("timestamp");
  CHECK_EQ(ja, jb);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("config violations are all reported at once") {
  const CliOutcome r =
      run_cli({"run", "--algo", "bogus", "--backend", "nope", "--epsilon",
               "-1", "--delta", "0.7", "--tie-break", "sometimes"});
  CHECK_EQ(r.exit_code, qsl::cli::kExitConfigError);
  CHECK(r.err.find("--algo") != std::string::npos);
  CHECK(r.err.find("--backend") != std::string::npos);
  CHECK(r.err.find("--epsilon") != std::string::npos);
  CHECK(r.err.find("--delta") != std::string::npos);
  CHECK(r.err.find("--tie-break") != std::string::npos);
}

TEST_CASE("missing data file is a data error, unknown flag a config error") {
  const CliOutcome data_err =
      run_cli({"run", "--data", "/nonexistent/qsl.csv"});
  CHECK_EQ(data_err.exit_code, qsl::cli::kExitDataError);
  const CliOutcome flag_err = run_cli({"run", "--frobnicate", "1"});
  CHECK_EQ(flag_err.exit_code, qsl::cli::kExitConfigError);
  const CliOutcome no_cmd = run_cli({});
  CHECK_EQ(no_cmd.exit_code, qsl::cli::kExitConfigError);
}

TEST_CASE("self-train rejects quantum backends, matmul requires them") {
  CHECK_EQ(run_cli({"run", "--algo", "self-train", "--backend", "quantum-noisy"})
               .exit_code,
           qsl::cli::kExitConfigError);
  CHECK_EQ(run_cli({"run", "--algo", "matmul-bench", "--backend", "classical"})
               .exit_code,
           qsl::cli::kExitConfigError);
}

TEST_CASE("matmul run books the square and cube counts") {
  const auto report = temp_file("qsl_cli_matmul.json");
  const CliOutcome r = run_cli({"run", "--algo", "matmul-bench", "--backend",
                                "quantum-exact", "--matmul-l", "8",
                                "--matmul-u", "8", "--matmul-d", "8", "--out",
                                report.string()});
  CHECK_EQ(r.exit_code, qsl::cli::kExitOk);
  const json j = load_json(report);
  CHECK_EQ(j["result"]["estimate_calls"], 64);
  CHECK_EQ(j["result"]["classical_mac_units"], 512);
  CHECK_EQ(j["result"]["max_abs_error"], 0.0);
  std::filesystem::remove(report);
}

TEST_CASE("bench emits slope fits and a csv table") {
  const auto report = temp_file("qsl_cli_bench.json");
  const CliOutcome r =
      run_cli({"bench", "--algo", "pnn", "--values", "4,8,16,32", "--l", "5",
               "--u", "15", "--out", report.string()});
  CHECK_EQ(r.exit_code, qsl::cli::kExitOk);
  const json j = load_json(report);
  CHECK(j["slopes"]["classical"].contains("slope"));
  CHECK(j["slopes"]["quantum"].contains("slope"));
  CHECK_EQ(j["points"].size(), 4);
  const double classical = j["slopes"]["classical"]["slope"];
  const double quantum = j["slopes"]["quantum"]["slope"];
  CHECK(classical > 0.5);
  CHECK(std::abs(quantum) < 0.2);
  const std::string csv_path = j["csv"];
  std::ifstream csv(csv_path);
  REQUIRE(csv.good());
  std::string header;
  std::getline(csv, header);
  CHECK_EQ(header, "value,classical_charge,quantum_charge");
  std::filesystem::remove(report);
  std::filesystem::remove(csv_path);
}

TEST_CASE("verify-estimator reports a full passing grid") {
  const auto report = temp_file("qsl_cli_verify.json");
  const CliOutcome r = run_cli({"verify-estimator", "--draws", "2000", "--out",
                                report.string()});
  CHECK_EQ(r.exit_code, qsl::cli::kExitOk);
  const json j = load_json(report);
  CHECK_EQ(j["cells"].size(), 12);  // 2 estimators x 2 epsilons x 3 deltas
  CHECK(j["all_pass"].get<bool>());
  for (const json& cell : j["cells"]) CHECK(cell["pass"].get<bool>());
  std::filesystem::remove(report);
}

TEST_CASE("config file supplies defaults that flags override") {
  const auto cfg = temp_file("qsl_cli_config.ini");
  const auto a = temp_file("qsl_cli_cfg_a.json");
  const auto b = temp_file("qsl_cli_cfg_b.json");
  {
    std::ofstream out(cfg);
    out << "[run]\nepsilon=0.25\nseed=77\n";
  }
  REQUIRE_EQ(run_cli({"--config", cfg.string(), "run", "--algo", "pnn",
                      "--backend", "quantum-noisy", "--out", a.string()})
                 .exit_code,
             qsl::cli::kExitOk);
  const json ja = load_json(a);
  CHECK_EQ(ja["config"]["epsilon"], 0.25);
  CHECK_EQ(ja["config"]["seed"], 77);
  REQUIRE_EQ(run_cli({"--config", cfg.string(), "run", "--algo", "pnn",
                      "--backend", "quantum-noisy", "--epsilon", "0.5",
                      "--out", b.string()})
                 .exit_code,
             qsl::cli::kExitOk);
  const json jb = load_json(b);
  CHECK_EQ(jb["config"]["epsilon"], 0.5);
  std::filesystem::remove(cfg);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("report config echo reflects resolved values") {
  const auto report = temp_file("qsl_cli_echo.json");
  const CliOutcome r = run_cli({"run", "--algo", "kmeans", "--backend",
                                "classical", "--seed", "123", "--k", "2",
                                "--out", report.string()});
  CHECK_EQ(r.exit_code, qsl::cli::kExitOk);
  const json j = load_json(report);
  CHECK_EQ(j["schema_version"], 1);
  CHECK_EQ(j["command"], "run");
  CHECK_EQ(j["config"]["seed"], 123);
  CHECK_EQ(j["config"]["k"], 2);
  CHECK_EQ(j["config"]["lambda"], "auto");
  CHECK_EQ(j["dataset"]["n"], 100);
  CHECK(j.contains("ledger"));
  CHECK(j["result"].contains("centroids"));
  std::filesystem::remove(report);
}
