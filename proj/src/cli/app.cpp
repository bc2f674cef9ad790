#include "cli/app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qsl/blobs.hpp"
#include "qsl/cost_ledger.hpp"
#include "qsl/dataset_io.hpp"
#include "qsl/estimators.hpp"
#include "qsl/kmeans.hpp"
#include "qsl/metrics.hpp"
#include "qsl/pnn.hpp"
#include "qsl/qram.hpp"
#include "qsl/rng.hpp"
#include "qsl/self_train.hpp"
#include "qsl/types.hpp"

namespace qsl::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Shared configuration blocks

struct BlobSpec {
  std::uint64_t seed = 0;  // 0 = use the master seed
  int k = 2;
  int per_cluster = 50;
  int dim = 4;
  double spread = 0.1;
  double labeled_fraction = 0.1;
};

struct GenConfig {
  BlobSpec blobs;
  std::string out;
};

struct RunConfig {
  std::string algo = "pnn";
  std::string backend = "classical";
  std::string data_path;
  BlobSpec blobs;
  double epsilon = 0.1;
  double delta = 0.05;
  double lambda = 0;  // 0 = derive from the stores
  int k = 0;          // 0 = infer from the dataset labels
  double tol = 1e-8;
  int max_iter = 100;
  std::string update_mode = "full";
  std::string tie_break = "lowest-index";
  double confidence_threshold = -std::numeric_limits<double>::infinity();
  int matmul_l = 8;
  int matmul_u = 8;
  int matmul_d = 8;
  std::uint64_t seed = 42;
  std::string out;
};

struct BenchConfig {
  std::string algo = "pnn";
  std::string sweep;  // empty = default for the algo
  std::string values_csv;
  double epsilon = 0.1;
  double delta = 0.05;
  double lambda = 8;  // fixed so charges isolate the swept variable
  int l = 10;
  int u = 90;
  int k = 4;
  int n = 400;
  int dim = 16;
  int max_iter = 3;
  std::uint64_t seed = 42;
  std::string out;
};

struct VerifyConfig {
  std::string estimator = "both";
  int draws = 10000;
  std::string epsilons_csv = "0.01,0.1";
  std::string deltas_csv = "0.01,0.05,0.1";
  int dim = 8;
  std::uint64_t seed = 42;
  std::string out;
};

// ---------------------------------------------------------------------------
// Small helpers

std::vector<double> parse_csv_numbers(const std::string& text,
                                      std::vector<std::string>& problems,
                                      const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      out.push_back(v);
    } catch (const std::exception&) {
      problems.push_back(field + ": malformed number '" + token + "'");
      return out;
    }
  }
  if (out.empty()) problems.push_back(field + ": no values given");
  return out;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string hex_digest(const std::vector<LabelId>& values) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const LabelId v : values) {
    std::uint64_t x = static_cast<std::uint64_t>(static_cast<std::int64_t>(v));
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xff;
      h *= 0x100000001b3ull;
    }
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

Json snapshot_json(const CostSnapshot& rows) {
  Json arr = Json::array();
  for (const CostRow& r : rows) {
    Json row;
    row["backend"] = to_string(r.backend);
    row["kind"] = to_string(r.kind);
    row["phase"] = r.phase;
    row["units"] = r.units;
    row["calls"] = r.calls;
    arr.push_back(std::move(row));
  }
  return arr;
}

Json scaling_json(const ScalingReport& report) {
  Json j;
  j["variable"] = report.variable;
  Json pts = Json::array();
  for (const ScalingPoint& p : report.points) {
    Json pt;
    pt["value"] = p.value;
    pt["charge"] = p.charge;
    pts.push_back(std::move(pt));
  }
  j["points"] = std::move(pts);
  j["slope"] = report.slope;
  j["intercept"] = report.intercept;
  j["residual"] = report.residual;
  return j;
}

Json centroids_json(const PointMatrix& centroids) {
  Json arr = Json::array();
  for (Eigen::Index m = 0; m < centroids.rows(); ++m) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < centroids.cols(); ++c)
      row.push_back(centroids(m, c));
    arr.push_back(std::move(row));
  }
  return arr;
}

Json blob_json(const BlobSpec& spec, std::uint64_t resolved_seed) {
  Json j;
  j["seed"] = resolved_seed;
  j["k"] = spec.k;
  j["per_cluster"] = spec.per_cluster;
  j["dim"] = spec.dim;
  j["spread"] = spec.spread;
  j["labeled_fraction"] = spec.labeled_fraction;
  return j;
}

// Reports carry exactly one nondeterministic field; reruns are byte-identical
// once it is dropped.
void finish_report(Json& report, const std::string& out_path,
                   std::chrono::steady_clock::time_point started) {
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                started)
          .count();
  Json ts;
  ts["generated_at"] = iso_timestamp();
  ts["wall_ms"] = wall_ms;
  report["timestamp"] = std::move(ts);
  const std::string body = report.dump(2);
  if (out_path.empty()) {
    std::cout << body << '\n';
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw DataError(out_path + ": cannot open for writing");
  out << body << '\n';
  if (!out) throw DataError(out_path + ": write failed");
}

int print_problems(const std::vector<std::string>& problems) {
  std::cerr << "configuration error:\n";
  for (const std::string& p : problems) std::cerr << "  - " << p << '\n';
  return kExitConfigError;
}

Dataset resolve_dataset(const std::string& data_path, const BlobSpec& blobs,
                        std::uint64_t resolved_blob_seed) {
  if (!data_path.empty()) return load_dataset(data_path);
  return generate_blobs(resolved_blob_seed, blobs.k, blobs.per_cluster,
                        blobs.dim, blobs.spread, blobs.labeled_fraction)
      .dataset;
}

EstimationParams params_for(const RunConfig& cfg) {
  EstimationParams params;
  params.mode = cfg.backend == "quantum-exact" ? OracleMode::exact
                                               : OracleMode::noisy;
  params.epsilon = cfg.epsilon;
  params.delta = cfg.delta;
  if (cfg.lambda > 0) params.lambda = cfg.lambda;
  return params;
}

// ---------------------------------------------------------------------------
// gen

int cmd_gen(const GenConfig& cfg) {
  std::vector<std::string> problems;
  if (cfg.out.empty()) problems.push_back("--out: output path is required");
  if (cfg.blobs.k < 1) problems.push_back("--clusters: must be >= 1");
  if (cfg.blobs.per_cluster < 1) problems.push_back("--per-cluster: must be >= 1");
  if (cfg.blobs.dim < 1) problems.push_back("--dim: must be >= 1");
  if (!(cfg.blobs.spread > 0)) problems.push_back("--spread: must be > 0");
  if (!(cfg.blobs.labeled_fraction >= 0 && cfg.blobs.labeled_fraction <= 1))
    problems.push_back("--labeled-fraction: must lie in [0, 1]");
  if (!problems.empty()) return print_problems(problems);

  const std::uint64_t seed = cfg.blobs.seed;
  const BlobResult blobs =
      generate_blobs(seed, cfg.blobs.k, cfg.blobs.per_cluster, cfg.blobs.dim,
                     cfg.blobs.spread, cfg.blobs.labeled_fraction);
  save_dataset(blobs.dataset, cfg.out);
  std::cout << "wrote " << blobs.dataset.size() << " points ("
            << blobs.dataset.labeled_count() << " labeled) to " << cfg.out
            << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// run

Json pnn_result_json(const PnnResult& result) {
  Json j;
  j["labels"] = result.labels;
  j["iterations"] = result.trace.size();
  Json trace = Json::array();
  for (const PnnStep& s : result.trace) {
    Json step;
    step["t"] = s.iteration;
    step["promoted"] = s.promoted;
    step["source"] = s.source;
    step["label"] = s.label;
    step["distance_sq"] = s.distance_sq;
    step["labeled_before"] = s.labeled_before;
    step["unlabeled_before"] = s.unlabeled_before;
    step["charges"] = snapshot_json(s.charges);
    trace.push_back(std::move(step));
  }
  j["trace"] = std::move(trace);
  return j;
}

Json kmeans_result_json(const KMeansResult& result) {
  Json j;
  j["assignments"] = result.state.assignments;
  j["centroids"] = centroids_json(result.state.centroids);
  j["objective"] = result.state.objective;
  j["iterations"] = result.state.iteration;
  j["converged"] = result.converged;
  Json trace = Json::array();
  for (const KMeansIterRecord& r : result.trace) {
    Json it;
    it["t"] = r.t;
    it["assignments_digest"] = hex_digest(r.assignments);
    it["centroids"] = centroids_json(r.centroids);
    it["objective"] = r.objective;
    it["max_shift_sq"] = r.max_shift_sq;
    if (r.measured_cluster) {
      it["measured_cluster"] = *r.measured_cluster;
      it["uncompute_event"] = r.uncompute_event;
      it["uncompute_cost"] = 0;
    }
    it["charges"] = snapshot_json(r.charges);
    trace.push_back(std::move(it));
  }
  j["trace"] = std::move(trace);
  return j;
}

int cmd_run(const RunConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  std::vector<std::string> problems;
  const bool is_quantum =
      cfg.backend == "quantum-exact" || cfg.backend == "quantum-noisy";
  if (cfg.algo != "pnn" && cfg.algo != "kmeans" && cfg.algo != "self-train" &&
      cfg.algo != "matmul-bench")
    problems.push_back(
        "--algo: expected pnn, kmeans, self-train or matmul-bench, got '" +
        cfg.algo + "'");
  if (cfg.backend != "classical" && !is_quantum)
    problems.push_back(
        "--backend: expected classical, quantum-exact or quantum-noisy, got '" +
        cfg.backend + "'");
  if (!(cfg.epsilon > 0)) problems.push_back("--epsilon: must be > 0");
  if (!(cfg.delta > 0 && cfg.delta < 0.5))
    problems.push_back("--delta: must lie in (0, 1/2)");
  if (cfg.lambda < 0) problems.push_back("--lambda: must be >= 0 (0 = auto)");
  if (cfg.tol < 0) problems.push_back("--tol: must be >= 0");
  if (cfg.max_iter < 1) problems.push_back("--max-iter: must be >= 1");
  if (cfg.update_mode != "full" && cfg.update_mode != "sampled")
    problems.push_back("--update-mode: expected full or sampled, got '" +
                       cfg.update_mode + "'");
  if (cfg.tie_break != "lowest-index" && cfg.tie_break != "seeded-random")
    problems.push_back("--tie-break: expected lowest-index or seeded-random, got '" +
                       cfg.tie_break + "'");
  if (cfg.algo == "self-train" && cfg.backend != "classical")
    problems.push_back(
        "--backend: self-train drives the classical 1-NN base learner; use "
        "backend classical");
  if (cfg.algo == "matmul-bench" && !is_quantum)
    problems.push_back(
        "--backend: matmul-bench compares the estimation oracle with the "
        "classical counter; use quantum-exact or quantum-noisy");
  if (cfg.algo == "matmul-bench" &&
      (cfg.matmul_l < 1 || cfg.matmul_u < 1 || cfg.matmul_d < 1))
    problems.push_back("--matmul-l/u/d: sizes must be >= 1");
  if (!problems.empty()) return print_problems(problems);

  const std::uint64_t blob_seed =
      cfg.blobs.seed != 0 ? cfg.blobs.seed : cfg.seed;

  Json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "run";
  Json config;
  config["algo"] = cfg.algo;
  config["backend"] = cfg.backend;
  if (cfg.data_path.empty()) {
    config["data"] = nullptr;
    config["blobs"] = blob_json(cfg.blobs, blob_seed);
  } else {
    config["data"] = cfg.data_path;
    config["blobs"] = nullptr;
  }
  config["epsilon"] = cfg.epsilon;
  config["delta"] = cfg.delta;
  if (cfg.lambda > 0)
    config["lambda"] = cfg.lambda;
  else
    config["lambda"] = "auto";
  config["k"] = cfg.k;
  config["tol"] = cfg.tol;
  config["max_iter"] = cfg.max_iter;
  config["update_mode"] = cfg.update_mode;
  config["tie_break"] = cfg.tie_break;
  if (std::isfinite(cfg.confidence_threshold))
    config["confidence_threshold"] = cfg.confidence_threshold;
  else
    config["confidence_threshold"] = nullptr;
  Json matmul;
  matmul["l"] = cfg.matmul_l;
  matmul["u"] = cfg.matmul_u;
  matmul["d"] = cfg.matmul_d;
  config["matmul"] = std::move(matmul);
  config["seed"] = cfg.seed;
  report["config"] = std::move(config);

  CostLedger ledger;

  if (cfg.algo == "matmul-bench") {
    // Two seeded stores of gaussian rows; the product demonstrates the
    // estimate-count versus multiply-accumulate comparison.
    SplitMix64 data_rng = derive_stream(cfg.seed, "matmul.data");
    PointMatrix x(cfg.matmul_l, cfg.matmul_d), y(cfg.matmul_u, cfg.matmul_d);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = data_rng.gaussian();
    for (Eigen::Index r = 0; r < y.rows(); ++r)
      for (Eigen::Index c = 0; c < y.cols(); ++c) y(r, c) = data_rng.gaussian();
    const QramStore sx = QramStore::from_points(x, ledger);
    const QramStore sy = QramStore::from_points(y, ledger);
    EstimationParams params;
    params.mode = cfg.backend == "quantum-exact" ? OracleMode::exact
                                                 : OracleMode::noisy;
    params.epsilon = cfg.epsilon;
    params.delta = cfg.delta;
    if (cfg.lambda > 0) params.lambda = cfg.lambda;
    SplitMix64 noise = derive_stream(cfg.seed, "matmul.noise");
    const NoisyMatrix product = estimate_matrix_product(sx, sy, params, noise, ledger);

    double max_abs_error = 0;
    Eigen::Index within = 0;
    for (Eigen::Index i = 0; i < product.values.rows(); ++i) {
      for (Eigen::Index j = 0; j < product.values.cols(); ++j) {
        const double truth = x.row(i).dot(y.row(j));
        const double err = std::abs(product.values(i, j) - truth);
        max_abs_error = std::max(max_abs_error, err);
        if (err <= cfg.epsilon) ++within;
      }
    }
    const double entries =
        static_cast<double>(product.values.rows() * product.values.cols());
    Json result;
    result["l"] = cfg.matmul_l;
    result["u"] = cfg.matmul_u;
    result["d"] = cfg.matmul_d;
    result["estimate_calls"] =
        ledger.calls(Backend::quantum, CostKind::algorithmic, "estimate.inner");
    result["estimate_units"] =
        ledger.units(Backend::quantum, CostKind::algorithmic, "estimate.inner");
    result["classical_mac_units"] = ledger.units(
        Backend::classical, CostKind::algorithmic, "estimate.inner.classical");
    result["total_cost"] = product.total_cost;
    result["max_abs_error"] = max_abs_error;
    result["in_tolerance_fraction"] = static_cast<double>(within) / entries;
    report["result"] = std::move(result);
    report["ledger"] = snapshot_json(ledger.snapshot());
    finish_report(report, cfg.out, started);
    return kExitOk;
  }

  const Dataset ds = resolve_dataset(cfg.data_path, cfg.blobs, blob_seed);
  Json summary;
  summary["n"] = ds.size();
  summary["l"] = ds.labeled_count();
  summary["u"] = ds.unlabeled_count();
  summary["d"] = ds.dim();
  report["dataset"] = std::move(summary);

  const int k = cfg.k > 0 ? cfg.k : ds.max_label();
  if (cfg.algo == "kmeans" && k < 1)
    return print_problems(
        {"--k: dataset has no labels to infer k from; pass --k explicitly"});

  TieBreakPolicy tie;
  tie.kind = cfg.tie_break == "seeded-random" ? TieBreakKind::seeded_random
                                              : TieBreakKind::lowest_index;
  tie.seed = cfg.seed;

  Json result;
  if (ds.unlabeled_count() == 0 &&
      (cfg.algo == "pnn" || cfg.algo == "self-train"))
    result["note"] =
        "dataset has no unlabeled points; supervised limit, nothing to label";

  if (cfg.algo == "pnn") {
    if (cfg.backend == "classical") {
      const PnnResult r = pnn_classical(ds, tie, ledger);
      result.update(pnn_result_json(r));
    } else {
      SplitMix64 noise = derive_stream(cfg.seed, "pnn.noise");
      const PnnResult r = pnn_quantum(ds, params_for(cfg), tie, noise, ledger);
      result.update(pnn_result_json(r));
    }
  } else if (cfg.algo == "self-train") {
    NearestNeighborLearner base(ledger);
    ConfidencePolicy policy;
    policy.min_score = cfg.confidence_threshold;
    const SelfTrainResult r = self_train(ds, base, policy, ledger);
    result["labels"] = r.labels;
    result["stagnated"] = r.stagnated;
    result["iterations"] = r.iterations;
    result["promoted_order"] = r.promoted_order;
  } else {  // kmeans
    KMeansOptions options;
    options.k = k;
    options.init_seed = cfg.seed;
    options.tol = cfg.tol;
    options.max_iter = cfg.max_iter;
    if (cfg.backend == "classical") {
      const KMeansResult r = kmeans_classical(ds, options, ledger);
      result.update(kmeans_result_json(r));
    } else {
      SplitMix64 noise = derive_stream(cfg.seed, "kmeans.noise");
      const CentroidUpdateMode mode = cfg.update_mode == "sampled"
                                          ? CentroidUpdateMode::sampled_cluster
                                          : CentroidUpdateMode::all_clusters;
      const KMeansResult r =
          kmeans_quantum(ds, options, params_for(cfg), mode, noise, ledger);
      result.update(kmeans_result_json(r));
    }
  }

  report["result"] = std::move(result);
  report["ledger"] = snapshot_json(ledger.snapshot());
  finish_report(report, cfg.out, started);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchPoint {
  double value = 0;
  double classical_per_iter = 0;
  double quantum_per_iter = 0;
  double classical_step1_per_iter = 0;
  double quantum_step1_per_iter = 0;
  std::uint64_t estimate_calls = 0;
  std::uint64_t classical_macs = 0;
};

double per_iteration(std::uint64_t total, std::size_t iterations) {
  return iterations == 0 ? 0.0
                         : static_cast<double>(total) /
                               static_cast<double>(iterations);
}

int cmd_bench(const BenchConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  std::vector<std::string> problems;
  if (cfg.algo != "pnn" && cfg.algo != "kmeans" && cfg.algo != "matmul")
    problems.push_back("--algo: expected pnn, kmeans or matmul, got '" +
                       cfg.algo + "'");
  std::string sweep = cfg.sweep;
  if (sweep.empty())
    sweep = cfg.algo == "pnn" ? "d" : (cfg.algo == "kmeans" ? "n" : "size");
  if (cfg.algo == "pnn" && sweep != "d")
    problems.push_back("--sweep: pnn sweeps d");
  if (cfg.algo == "kmeans" && sweep != "n" && sweep != "k")
    problems.push_back("--sweep: kmeans sweeps n or k");
  if (cfg.algo == "matmul" && sweep != "size")
    problems.push_back("--sweep: matmul sweeps size");
  if (!(cfg.epsilon > 0)) problems.push_back("--epsilon: must be > 0");
  if (!(cfg.delta > 0 && cfg.delta < 0.5))
    problems.push_back("--delta: must lie in (0, 1/2)");
  if (!(cfg.lambda > 0))
    problems.push_back("--lambda: bench pins lambda; must be > 0");
  if (cfg.out.empty()) problems.push_back("--out: output path is required");

  std::string values_csv = cfg.values_csv;
  if (values_csv.empty()) {
    if (cfg.algo == "pnn") values_csv = "4,8,16,32,64,128,256";
    else if (cfg.algo == "kmeans" && sweep == "n") values_csv = "100,200,400,800,1600";
    else if (cfg.algo == "kmeans") values_csv = "2,4,8,16";
    else values_csv = "8,16,32,64";
  }
  std::vector<double> values = parse_csv_numbers(values_csv, problems, "--values");
  if (values.size() < 4 && problems.empty())
    problems.push_back("--values: need at least 4 sweep points to fit a slope");
  if (!problems.empty()) return print_problems(problems);

  EstimationParams params =
      EstimationParams::noisy(cfg.epsilon, cfg.delta, cfg.lambda);

  std::vector<BenchPoint> points;
  for (const double value : values) {
    BenchPoint point;
    point.value = value;
    const std::string tag = "bench." + cfg.algo + "." + std::to_string(value);
    const std::uint64_t data_seed = cfg.seed ^ fnv1a64(tag);

    if (cfg.algo == "pnn") {
      const int d = static_cast<int>(value);
      if (d < 1) return print_problems({"--values: d must be >= 1"});
      // l + u points, unit norm so per-pair estimate costs are constant.
      const int per_cluster = (cfg.l + cfg.u + 1) / 2;
      BlobResult blobs = generate_blobs(data_seed, 2, per_cluster, d, 0.05,
                                        static_cast<double>(cfg.l) /
                                            (2.0 * per_cluster));
      Dataset ds = normalize_rows(blobs.dataset);

      CostLedger classical;
      TieBreakPolicy tie;
      const PnnResult rc = pnn_classical(ds, tie, classical);
      CostLedger quantum;
      SplitMix64 noise = derive_stream(cfg.seed, tag + ".noise");
      const PnnResult rq = pnn_quantum(ds, params, tie, noise, quantum);

      point.classical_per_iter = per_iteration(
          classical.total_units(Backend::classical, CostKind::algorithmic),
          rc.trace.size());
      point.quantum_per_iter = per_iteration(
          quantum.total_units(Backend::quantum, CostKind::algorithmic),
          rq.trace.size());
      point.classical_step1_per_iter = per_iteration(
          classical.units(Backend::classical, CostKind::algorithmic,
                          "pnn.step1.distance"),
          rc.trace.size());
      point.quantum_step1_per_iter = per_iteration(
          quantum.units(Backend::quantum, CostKind::algorithmic,
                        "estimate.distance"),
          rq.trace.size());
    } else if (cfg.algo == "kmeans") {
      const int k = sweep == "k" ? static_cast<int>(value) : cfg.k;
      const int n = sweep == "n" ? static_cast<int>(value) : cfg.n;
      if (k < 1 || n < k)
        return print_problems({"--values: need n >= k >= 1 at every point"});
      const int per_cluster = std::max(1, n / k);
      BlobResult blobs = generate_blobs(data_seed, k, per_cluster, cfg.dim,
                                        0.05, 0.1);
      Dataset ds = normalize_rows(blobs.dataset);

      KMeansOptions options;
      options.k = k;
      options.init_seed = data_seed;
      options.tol = 0;  // run all max_iter iterations
      options.max_iter = cfg.max_iter;

      CostLedger classical;
      const KMeansResult rc = kmeans_classical(ds, options, classical);
      CostLedger quantum;
      SplitMix64 noise = derive_stream(cfg.seed, tag + ".noise");
      const KMeansResult rq =
          kmeans_quantum(ds, options, params, CentroidUpdateMode::all_clusters,
                         noise, quantum);

      point.classical_per_iter = per_iteration(
          classical.total_units(Backend::classical, CostKind::algorithmic),
          rc.trace.size());
      point.quantum_per_iter = per_iteration(
          quantum.total_units(Backend::quantum, CostKind::algorithmic),
          rq.trace.size());
      point.classical_step1_per_iter = per_iteration(
          classical.units(Backend::classical, CostKind::algorithmic,
                          "kmeans.step1.distance"),
          rc.trace.size());
      point.quantum_step1_per_iter = per_iteration(
          quantum.units(Backend::quantum, CostKind::algorithmic, "estimate.map"),
          rq.trace.size());
    } else {  // matmul
      const int n = static_cast<int>(value);
      if (n < 1) return print_problems({"--values: size must be >= 1"});
      SplitMix64 data_rng(data_seed);
      PointMatrix x(n, n), y(n, n);
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) x(r, c) = data_rng.gaussian();
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) y(r, c) = data_rng.gaussian();
      CostLedger ledger;
      const QramStore sx = QramStore::from_points(x, ledger);
      const QramStore sy = QramStore::from_points(y, ledger);
      SplitMix64 noise = derive_stream(cfg.seed, tag + ".noise");
      estimate_matrix_product(sx, sy, params, noise, ledger);
      point.estimate_calls =
          ledger.calls(Backend::quantum, CostKind::algorithmic, "estimate.inner");
      point.classical_macs = ledger.units(Backend::classical, CostKind::algorithmic,
                                          "estimate.inner.classical");
      point.quantum_per_iter = static_cast<double>(point.estimate_calls);
      point.classical_per_iter = static_cast<double>(point.classical_macs);
    }
    points.push_back(point);
  }

  // Slopes: pnn fits total per-iteration charges, kmeans fits the Step-1
  // series, matmul fits estimate calls vs multiply-accumulates.
  std::vector<ScalingPoint> classical_series, quantum_series;
  for (const BenchPoint& p : points) {
    if (cfg.algo == "kmeans") {
      classical_series.push_back({p.value, p.classical_step1_per_iter});
      quantum_series.push_back({p.value, p.quantum_step1_per_iter});
    } else {
      classical_series.push_back({p.value, p.classical_per_iter});
      quantum_series.push_back({p.value, p.quantum_per_iter});
    }
  }
  const ScalingReport classical_fit = fit_scaling(sweep, classical_series);
  const ScalingReport quantum_fit = fit_scaling(sweep, quantum_series);

  Json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "bench";
  Json config;
  config["algo"] = cfg.algo;
  config["sweep"] = sweep;
  config["values"] = values;
  config["epsilon"] = cfg.epsilon;
  config["delta"] = cfg.delta;
  config["lambda"] = cfg.lambda;
  config["l"] = cfg.l;
  config["u"] = cfg.u;
  config["k"] = cfg.k;
  config["n"] = cfg.n;
  config["dim"] = cfg.dim;
  config["max_iter"] = cfg.max_iter;
  config["seed"] = cfg.seed;
  config["unit_norm_data"] = cfg.algo != "matmul";
  report["config"] = std::move(config);

  Json rows = Json::array();
  for (const BenchPoint& p : points) {
    Json row;
    row["value"] = p.value;
    if (cfg.algo == "matmul") {
      row["estimate_calls"] = p.estimate_calls;
      row["classical_mac_units"] = p.classical_macs;
    } else {
      row["classical_units_per_iteration"] = p.classical_per_iter;
      row["quantum_units_per_iteration"] = p.quantum_per_iter;
      row["classical_step1_per_iteration"] = p.classical_step1_per_iter;
      row["quantum_step1_per_iteration"] = p.quantum_step1_per_iter;
    }
    rows.push_back(std::move(row));
  }
  report["points"] = std::move(rows);
  Json slopes;
  slopes["classical"] = scaling_json(classical_fit);
  slopes["quantum"] = scaling_json(quantum_fit);
  report["slopes"] = std::move(slopes);

  // CSV table alongside the JSON report for external plotting.
  std::string csv_path = cfg.out;
  const std::size_t dot = csv_path.find_last_of('.');
  if (dot != std::string::npos) csv_path.resize(dot);
  csv_path += ".csv";
  {
    std::ofstream csv(csv_path);
    if (!csv) throw DataError(csv_path + ": cannot open for writing");
    csv << "value,classical_charge,quantum_charge\n";
    char buf[96];
    for (const BenchPoint& p : points) {
      const double c = cfg.algo == "kmeans" ? p.classical_step1_per_iter
                                            : p.classical_per_iter;
      const double q = cfg.algo == "kmeans" ? p.quantum_step1_per_iter
                                            : p.quantum_per_iter;
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.value, c, q);
      csv << buf;
    }
  }
  report["csv"] = csv_path;
  finish_report(report, cfg.out, started);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify-estimator

int cmd_verify(const VerifyConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  std::vector<std::string> problems;
  if (cfg.estimator != "distance" && cfg.estimator != "inner" &&
      cfg.estimator != "both")
    problems.push_back("--estimator: expected distance, inner or both, got '" +
                       cfg.estimator + "'");
  if (cfg.draws < 100) problems.push_back("--draws: must be >= 100");
  if (cfg.dim < 1) problems.push_back("--dim: must be >= 1");
  std::vector<double> epsilons =
      parse_csv_numbers(cfg.epsilons_csv, problems, "--epsilons");
  std::vector<double> deltas =
      parse_csv_numbers(cfg.deltas_csv, problems, "--deltas");
  for (const double e : epsilons)
    if (!(e > 0)) problems.push_back("--epsilons: every epsilon must be > 0");
  for (const double d : deltas)
    if (!(d > 0 && d < 0.5))
      problems.push_back("--deltas: every delta must lie in (0, 1/2)");
  if (!problems.empty()) return print_problems(problems);

  CostLedger ledger;
  SplitMix64 data_rng = derive_stream(cfg.seed, "verify.data");
  PointMatrix pts(2, cfg.dim);
  for (Eigen::Index r = 0; r < 2; ++r)
    for (Eigen::Index c = 0; c < cfg.dim; ++c) pts(r, c) = data_rng.gaussian();
  const QramStore store = QramStore::from_points(pts, ledger);
  const double truth_distance =
      squared_euclidean(store.row_values(0), store.row_values(1));
  const double truth_inner =
      inner_product(store.row_values(0), store.row_values(1));

  std::vector<std::string> estimators;
  if (cfg.estimator == "both") {
    estimators = {"distance", "inner"};
  } else {
    estimators = {cfg.estimator};
  }

  Json cells = Json::array();
  bool all_pass = true;
  for (const std::string& est : estimators) {
    for (const double eps : epsilons) {
      for (const double delta : deltas) {
        EstimationParams params = EstimationParams::noisy(eps, delta);
        const std::string tag = "verify." + est + "." + std::to_string(eps) +
                                "." + std::to_string(delta);
        SplitMix64 noise = derive_stream(cfg.seed, tag);
        Eigen::Index within = 0;
        for (int n = 0; n < cfg.draws; ++n) {
          const NoisyEstimate e =
              est == "distance"
                  ? estimate_distance_sq(store, 0, store, 1, params, noise, ledger)
                  : estimate_inner_product(store, 0, store, 1, params, noise,
                                           ledger);
          const double truth =
              est == "distance" ? truth_distance : truth_inner;
          if (std::abs(e.value - truth) <= eps) ++within;
        }
        const double fraction =
            static_cast<double>(within) / static_cast<double>(cfg.draws);
        const double p_success = 1.0 - 2.0 * delta;
        const double margin =
            3.0 * std::sqrt(2.0 * delta * p_success /
                            static_cast<double>(cfg.draws));
        const double bound = p_success - margin;
        const bool pass = fraction >= bound;
        all_pass = all_pass && pass;
        Json cell;
        cell["estimator"] = est;
        cell["epsilon"] = eps;
        cell["delta"] = delta;
        cell["draws"] = cfg.draws;
        cell["in_tolerance_fraction"] = fraction;
        cell["bound"] = bound;
        cell["pass"] = pass;
        cells.push_back(std::move(cell));
      }
    }
  }

  Json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "verify-estimator";
  Json config;
  config["estimator"] = cfg.estimator;
  config["draws"] = cfg.draws;
  config["epsilons"] = epsilons;
  config["deltas"] = deltas;
  config["dim"] = cfg.dim;
  config["seed"] = cfg.seed;
  report["config"] = std::move(config);
  report["cells"] = std::move(cells);
  report["all_pass"] = all_pass;
  finish_report(report, cfg.out, started);
  return all_pass ? kExitOk : kExitRuntimeError;
}

// ---------------------------------------------------------------------------
// wiring

void add_blob_options(CLI::App* cmd, BlobSpec& spec, bool seed_is_master) {
  cmd->add_option(seed_is_master ? "--blob-seed" : "--seed", spec.seed,
                  seed_is_master ? "Generator seed (default: master seed)"
                                 : "Generator seed");
  cmd->add_option(seed_is_master ? "--blob-k" : "--clusters,-k", spec.k,
                  "Number of clusters");
  cmd->add_option(seed_is_master ? "--blob-per-cluster" : "--per-cluster",
                  spec.per_cluster, "Points per cluster");
  cmd->add_option(seed_is_master ? "--blob-dim" : "--dim,-d", spec.dim,
                  "Feature dimension");
  cmd->add_option(seed_is_master ? "--blob-spread" : "--spread", spec.spread,
                  "Gaussian spread around each center");
  cmd->add_option(
      seed_is_master ? "--blob-labeled-fraction" : "--labeled-fraction",
      spec.labeled_fraction, "Fraction of points that keep their label");
}

}  // namespace

int run_app(int argc, const char* const* argv) {
  CLI::App app{
      "Semi-supervised learning under simulated quantum estimation oracles "
      "with cost accounting"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI/TOML file");

  GenConfig gen_cfg;
  CLI::App* gen = app.add_subcommand("gen", "Generate a blob dataset CSV");
  add_blob_options(gen, gen_cfg.blobs, false);
  gen->add_option("--out,-o", gen_cfg.out, "Output CSV path");

  RunConfig run_cfg;
  CLI::App* run = app.add_subcommand("run", "Run one learner on one dataset");
  run->add_option("--algo", run_cfg.algo,
                  "pnn | kmeans | self-train | matmul-bench");
  run->add_option("--backend", run_cfg.backend,
                  "classical | quantum-exact | quantum-noisy");
  run->add_option("--data", run_cfg.data_path, "Dataset CSV path");
  add_blob_options(run, run_cfg.blobs, true);
  run->add_option("--epsilon", run_cfg.epsilon, "Oracle accuracy epsilon");
  run->add_option("--delta", run_cfg.delta, "Oracle failure parameter delta");
  run->add_option("--lambda", run_cfg.lambda,
                  "State-preparation cost (0 = derive from the stores)");
  run->add_option("--k", run_cfg.k, "Cluster count (0 = infer from labels)");
  run->add_option("--tol", run_cfg.tol, "Convergence tolerance (squared shift)");
  run->add_option("--max-iter", run_cfg.max_iter, "Iteration cap");
  run->add_option("--update-mode", run_cfg.update_mode, "full | sampled");
  run->add_option("--tie-break", run_cfg.tie_break,
                  "lowest-index | seeded-random");
  run->add_option("--confidence-threshold", run_cfg.confidence_threshold,
                  "Minimum score for self-train promotion");
  run->add_option("--matmul-l", run_cfg.matmul_l, "Matrix rows (left)");
  run->add_option("--matmul-u", run_cfg.matmul_u, "Matrix rows (right)");
  run->add_option("--matmul-d", run_cfg.matmul_d, "Matrix inner dimension");
  run->add_option("--seed", run_cfg.seed, "Master seed");
  run->add_option("--out,-o", run_cfg.out, "Report JSON path (default stdout)");

  BenchConfig bench_cfg;
  CLI::App* bench =
      app.add_subcommand("bench", "Charge-scaling sweeps with slope fits");
  bench->add_option("--algo", bench_cfg.algo, "pnn | kmeans | matmul");
  bench->add_option("--sweep", bench_cfg.sweep,
                    "Swept variable: d (pnn), n or k (kmeans), size (matmul)");
  bench->add_option("--values", bench_cfg.values_csv,
                    "Comma-separated sweep values");
  bench->add_option("--epsilon", bench_cfg.epsilon, "Oracle epsilon");
  bench->add_option("--delta", bench_cfg.delta, "Oracle delta");
  bench->add_option("--lambda", bench_cfg.lambda,
                    "Pinned state-preparation cost");
  bench->add_option("--l", bench_cfg.l, "Labeled count (pnn)");
  bench->add_option("--u", bench_cfg.u, "Unlabeled count (pnn)");
  bench->add_option("--k", bench_cfg.k, "Cluster count (kmeans n-sweep)");
  bench->add_option("--n", bench_cfg.n, "Point count (kmeans k-sweep)");
  bench->add_option("--dim", bench_cfg.dim, "Feature dimension (kmeans)");
  bench->add_option("--max-iter", bench_cfg.max_iter, "Iterations per point");
  bench->add_option("--seed", bench_cfg.seed, "Master seed");
  bench->add_option("--out,-o", bench_cfg.out, "Report JSON path");

  VerifyConfig verify_cfg;
  CLI::App* verify = app.add_subcommand(
      "verify-estimator", "Empirical coverage of the noisy estimators");
  verify->add_option("--estimator", verify_cfg.estimator,
                     "distance | inner | both");
  verify->add_option("--draws", verify_cfg.draws, "Draws per grid cell");
  verify->add_option("--epsilons", verify_cfg.epsilons_csv,
                     "Comma-separated epsilon grid");
  verify->add_option("--deltas", verify_cfg.deltas_csv,
                     "Comma-separated delta grid");
  verify->add_option("--dim", verify_cfg.dim, "Test vector dimension");
  verify->add_option("--seed", verify_cfg.seed, "Master seed");
  verify->add_option("--out,-o", verify_cfg.out,
                     "Report JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "configuration error:\n  - " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_cfg);
    if (run->parsed()) return cmd_run(run_cfg);
    if (bench->parsed()) return cmd_bench(bench_cfg);
    if (verify->parsed()) return cmd_verify(verify_cfg);
    std::cerr << "configuration error:\n  - no subcommand given\n";
    return kExitConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}

int run_app(const std::vector<std::string>& args) {
  std::vector<std::string> owned = args;
  std::vector<const char*> argv;
  argv.push_back("qsl");
  for (const std::string& a : owned) argv.push_back(a.c_str());
  return run_app(static_cast<int>(argv.size()), argv.data());
}

}  // namespace qsl::cli
