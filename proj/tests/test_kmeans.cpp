#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "qsl/blobs.hpp"
#include "qsl/cost_ledger.hpp"
#include "qsl/kmeans.hpp"
#include "qsl/metrics.hpp"
#include "qsl/rng.hpp"
#include "qsl/types.hpp"

using namespace qsl;

namespace {

// Independent reference: plain Lloyd iterations with labeled points pinned,
// written with naive per-component loops and no shared helpers.
struct NaiveResult {
  std::vector<LabelId> assignments;
  std::vector<std::vector<double>> centroids;
  int iterations = 0;
};

NaiveResult naive_pinned_lloyd(const Dataset& ds, int k, double tol,
                               int max_iter) {
  const std::size_t n = static_cast<std::size_t>(ds.size());
  const std::size_t d = static_cast<std::size_t>(ds.dim());
  std::vector<std::vector<double>> centroids(
      static_cast<std::size_t>(k), std::vector<double>(d, 0.0));
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < ds.labeled_count(); ++i) {
    const std::size_t m = static_cast<std::size_t>(ds.label(i) - 1);
    for (std::size_t t = 0; t < d; ++t) centroids[m][t] += ds.point(i)(static_cast<Eigen::Index>(t));
    counts[m]++;
  }
  for (std::size_t m = 0; m < static_cast<std::size_t>(k); ++m) {
    REQUIRE(counts[m] > 0);  // callers choose data where labels cover clusters
    for (std::size_t t = 0; t < d; ++t) centroids[m][t] /= counts[m];
  }

  std::vector<LabelId> assign(n, 0);
  int it = 0;
  for (; it < max_iter; ++it) {
    for (std::size_t j = 0; j < n; ++j) {
      if (static_cast<Eigen::Index>(j) < ds.labeled_count()) {
        assign[j] = ds.label(static_cast<Eigen::Index>(j));
        continue;
      }
      double best = 0;
      int best_m = -1;
      for (int m = 0; m < k; ++m) {
        double dist = 0;
        for (std::size_t t = 0; t < d; ++t) {
          const double diff = ds.point(static_cast<Eigen::Index>(j))(
                                  static_cast<Eigen::Index>(t)) -
                              centroids[static_cast<std::size_t>(m)][t];
          dist += diff * diff;
        }
        if (best_m < 0 || dist < best) {
          best = dist;
          best_m = m;
        }
      }
      assign[j] = best_m + 1;
    }
    std::vector<std::vector<double>> next(
        static_cast<std::size_t>(k), std::vector<double>(d, 0.0));
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t m = static_cast<std::size_t>(assign[j] - 1);
      for (std::size_t t = 0; t < d; ++t)
        next[m][t] += ds.point(static_cast<Eigen::Index>(j))(
            static_cast<Eigen::Index>(t));
      sizes[m]++;
    }
    double max_shift = 0;
    for (std::size_t m = 0; m < static_cast<std::size_t>(k); ++m) {
      if (sizes[m] == 0) {
        next[m] = centroids[m];
      } else {
        for (std::size_t t = 0; t < d; ++t) next[m][t] /= sizes[m];
      }
      double shift = 0;
      for (std::size_t t = 0; t < d; ++t) {
        const double diff = next[m][t] - centroids[m][t];
        shift += diff * diff;
      }
      max_shift = std::max(max_shift, shift);
    }
    centroids = next;
    if (max_shift <= tol) {
      ++it;
      break;
    }
  }
  return {assign, centroids, it};
}

}  // namespace

TEST_CASE("fully labeled singletons converge immediately") {
  PointMatrix pts(3, 2);
  pts << 0, 0, 5, 5, -4, 2;
  const Dataset ds(pts, {1, 2, 3}, 3);
  KMeansOptions options;
  options.k = 3;
  CostLedger ledger;
  const KMeansResult r = kmeans_classical(ds, options, ledger);
  CHECK(r.converged);
  CHECK_EQ(r.state.iteration, 1);
  CHECK(r.state.centroids == pts);
  CHECK_EQ(r.state.objective, 0.0);
}

TEST_CASE("two labeled pairs give their means as centroids") {
  PointMatrix pts(4, 1);
  pts << 0, 1, 9, 10;
  const Dataset ds(pts, {1, 1, 2, 2}, 4);
  KMeansOptions options;
  options.k = 2;
  CostLedger ledger;
  const KMeansResult r = kmeans_classical(ds, options, ledger);
  CHECK_EQ(r.state.centroids(0, 0), 0.5);
  CHECK_EQ(r.state.centroids(1, 0), 9.5);
  CHECK(r.converged);
  CHECK_EQ(r.state.assignments, std::vector<LabelId>({1, 1, 2, 2}));
}

TEST_CASE("library run matches the naive pinned Lloyd reference") {
  const BlobResult blobs = generate_blobs(41, 3, 20, 4, 0.5, 0.1);
  REQUIRE_EQ(blobs.dataset.size(), 60);
  KMeansOptions options;
  options.k = 3;
  options.tol = 1e-8;
  options.max_iter = 100;
  CostLedger ledger;
  const KMeansResult r = kmeans_classical(blobs.dataset, options, ledger);
  const NaiveResult naive =
      naive_pinned_lloyd(blobs.dataset, 3, options.tol, options.max_iter);
  CHECK_EQ(r.state.assignments, naive.assignments);
  for (Eigen::Index m = 0; m < 3; ++m)
    for (Eigen::Index t = 0; t < 4; ++t)
      CHECK(std::abs(r.state.centroids(m, t) -
                     naive.centroids[static_cast<std::size_t>(m)]
                                    [static_cast<std::size_t>(t)]) <= 1e-12);
}

TEST_CASE("exact quantum iterations mirror the classical run") {
  for (std::uint64_t seed : {51ull, 52ull, 53ull}) {
    const BlobResult blobs = generate_blobs(seed, 4, 15, 6, 0.6, 0.12);
    KMeansOptions options;
    options.k = 4;
    options.init_seed = seed;
    CostLedger cl, ql;
    const KMeansResult rc = kmeans_classical(blobs.dataset, options, cl);
    SplitMix64 rng(seed);
    const KMeansResult rq =
        kmeans_quantum(blobs.dataset, options, EstimationParams::exact(),
                       CentroidUpdateMode::all_clusters, rng, ql);
    CHECK_EQ(rc.converged, rq.converged);
    REQUIRE_EQ(rc.trace.size(), rq.trace.size());
    for (std::size_t t = 0; t < rc.trace.size(); ++t) {
      CHECK_EQ(rc.trace[t].assignments, rq.trace[t].assignments);
      CHECK(rc.trace[t].centroids == rq.trace[t].centroids);
      CHECK_EQ(rc.trace[t].objective, rq.trace[t].objective);
      CHECK(!rc.trace[t].measured_cluster.has_value());
      CHECK(rq.trace[t].measured_cluster.has_value());
      CHECK(rq.trace[t].uncompute_event);
    }
  }
}

TEST_CASE("a cluster with no points keeps its centroid") {
  // Both points carry label 1; cluster 2 starts from a random data point and
  // never receives members, so its centroid must never move.
  PointMatrix pts(2, 1);
  pts << 0, 0.1;
  const Dataset ds(pts, {1, 1}, 2);
  KMeansOptions options;
  options.k = 2;
  options.init_seed = 9;
  CostLedger ledger;
  const KMeansResult r = kmeans_classical(ds, options, ledger);
  REQUIRE(!r.trace.empty());
  const double frozen = r.trace[0].centroids(1, 0);
  CHECK((frozen == 0.0 || frozen == 0.1));  // seeded pick of a data point
  for (const KMeansIterRecord& rec : r.trace) CHECK_EQ(rec.centroids(1, 0), frozen);
  CHECK_EQ(r.state.centroids(0, 0), 0.05);
}

TEST_CASE("objective never increases and labeled points never move") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const BlobResult blobs = generate_blobs(seed, 3, 15, 3, 0.8, 0.2);
    KMeansOptions options;
    options.k = 3;
    options.init_seed = seed;
    CostLedger ledger;
    const KMeansResult r = kmeans_classical(blobs.dataset, options, ledger);
    double prev = std::numeric_limits<double>::infinity();
    for (const KMeansIterRecord& rec : r.trace) {
      CHECK(rec.objective <= prev + 1e-9);
      prev = rec.objective;
      for (Eigen::Index i = 0; i < blobs.dataset.labeled_count(); ++i)
        CHECK_EQ(rec.assignments[static_cast<std::size_t>(i)],
                 blobs.dataset.label(i));
    }
  }
}

TEST_CASE("iteration cap is respected with tol zero") {
  const BlobResult blobs = generate_blobs(61, 2, 20, 3, 1.5, 0.1);
  KMeansOptions options;
  options.k = 2;
  options.tol = 0;
  options.max_iter = 3;
  CostLedger ledger;
  const KMeansResult r = kmeans_classical(blobs.dataset, options, ledger);
  CHECK_EQ(static_cast<int>(r.trace.size()), 3);
  CHECK_EQ(r.state.iteration, 3);
}

TEST_CASE("per-iteration classical charges follow N k d") {
  const BlobResult blobs = generate_blobs(62, 2, 15, 5, 0.4, 0.2);
  const std::uint64_t n = static_cast<std::uint64_t>(blobs.dataset.size());
  const std::uint64_t d = static_cast<std::uint64_t>(blobs.dataset.dim());
  KMeansOptions options;
  options.k = 2;
  CostLedger ledger;
  const KMeansResult r = kmeans_classical(blobs.dataset, options, ledger);
  for (const KMeansIterRecord& rec : r.trace) {
    std::uint64_t step1 = 0, step2 = 0, step3 = 0;
    for (const CostRow& row : rec.charges) {
      if (row.phase == "kmeans.step1.distance") step1 = row.units;
      if (row.phase == "kmeans.step2.assign") step2 = row.units;
      if (row.phase == "kmeans.step3.update") step3 = row.units;
    }
    CHECK_EQ(step1, n * 2 * d);
    CHECK_EQ(step2, n * 2);
    CHECK_EQ(step3, n * d);
  }
}

TEST_CASE("per-iteration quantum charges follow the per-step law") {
  const BlobResult blobs = generate_blobs(63, 3, 15, 4, 0.4, 0.2);
  const std::uint64_t n = static_cast<std::uint64_t>(blobs.dataset.size());
  KMeansOptions options;
  options.k = 3;
  CostLedger ledger;
  SplitMix64 rng(63);
  const KMeansResult r =
      kmeans_quantum(blobs.dataset, options, EstimationParams::noisy(0.05, 0.05),
                     CentroidUpdateMode::all_clusters, rng, ledger);
  for (const KMeansIterRecord& rec : r.trace) {
    std::uint64_t assign = 0, measure = 0, update = 0, map_calls = 0;
    for (const CostRow& row : rec.charges) {
      if (row.backend != Backend::quantum) continue;
      if (row.phase == "kmeans.step2.assign") assign = row.units;
      if (row.phase == "kmeans.step3.measure") measure = row.units;
      if (row.phase == "kmeans.step4.update") update = row.units;
      if (row.phase == "estimate.map") map_calls = row.calls;
    }
    CHECK_EQ(map_calls, 3);   // one superposed pass per centroid
    CHECK_EQ(assign, 3);
    CHECK_EQ(measure, 1);
    CHECK_EQ(update, 3 * n);  // all-clusters update: N per centroid
  }
}

TEST_CASE("sampled update mode moves only the measured centroid") {
  const BlobResult blobs = generate_blobs(64, 3, 12, 3, 0.5, 0.2);
  KMeansOptions options;
  options.k = 3;
  options.tol = 0;
  options.max_iter = 6;
  CostLedger ledger;
  SplitMix64 rng(64);
  const KMeansResult r =
      kmeans_quantum(blobs.dataset, options, EstimationParams::exact(),
                     CentroidUpdateMode::sampled_cluster, rng, ledger);
  PointMatrix prev = r.trace[0].centroids;  // baseline after iteration 0
  for (std::size_t t = 1; t < r.trace.size(); ++t) {
    const KMeansIterRecord& rec = r.trace[t];
    REQUIRE(rec.measured_cluster.has_value());
    const Eigen::Index m = *rec.measured_cluster - 1;
    for (Eigen::Index c = 0; c < 3; ++c)
      if (c != m) CHECK(rec.centroids.row(c) == prev.row(c));
    std::uint64_t update = 0;
    for (const CostRow& row : rec.charges)
      if (row.phase == "kmeans.step4.update" && row.backend == Backend::quantum)
        update = row.units;
    CHECK_EQ(update, static_cast<std::uint64_t>(blobs.dataset.size()));
    prev = rec.centroids;
  }
}

TEST_CASE("invalid cluster counts are rejected") {
  PointMatrix pts(2, 1);
  pts << 0, 1;
  const Dataset ds(pts, {1, 0}, 1);
  CostLedger ledger;
  KMeansOptions options;
  options.k = 5;  // more clusters than points
  CHECK_THROWS_AS(kmeans_classical(ds, options, ledger), std::invalid_argument);
  options.k = 0;
  CHECK_THROWS_AS(kmeans_classical(ds, options, ledger), std::invalid_argument);
  const Dataset high_label(pts, {2, 0}, 1);
  options.k = 1;  // label 2 exceeds k
  CHECK_THROWS_AS(kmeans_classical(high_label, options, ledger),
                  std::invalid_argument);
  options.k = 1;
  options.max_iter = 0;
  CHECK_THROWS_AS(kmeans_classical(ds, options, ledger), std::invalid_argument);
}

TEST_CASE("measuring a single nonempty cluster always returns it") {
  KMeansState state;
  state.centroids = PointMatrix::Zero(2, 1);
  state.assignments = {1, 1, 1};
  state.cluster_sets = {{0, 1, 2}, {}};
  SplitMix64 rng(70);
  for (int i = 0; i < 300; ++i) {
    const LabelMeasurement m = measure_label_register(state, rng);
    CHECK_EQ(m.cluster, 1);
    CHECK_EQ(m.members, std::vector<Eigen::Index>({0, 1, 2}));
    CHECK_EQ(m.amplitude_weight, 1.0 / 3.0);
  }
}

TEST_CASE("measurement frequencies follow cluster sizes") {
  KMeansState state;
  state.centroids = PointMatrix::Zero(2, 1);
  state.assignments.assign(100, 1);
  state.cluster_sets.assign(2, {});
  for (Eigen::Index j = 0; j < 100; ++j) {
    const LabelId z = j < 25 ? 1 : 2;
    state.assignments[static_cast<std::size_t>(j)] = z;
    state.cluster_sets[static_cast<std::size_t>(z - 1)].push_back(j);
  }
  SplitMix64 rng(71);
  const int draws = 10000;
  std::vector<int> counts(2, 0);
  for (int i = 0; i < draws; ++i)
    counts[static_cast<std::size_t>(measure_label_register(state, rng).cluster - 1)]++;
  const double tv = 0.5 * (std::abs(counts[0] / 10000.0 - 0.25) +
                           std::abs(counts[1] / 10000.0 - 0.75));
  CHECK(tv <= 0.02);
}

TEST_CASE("measurement membership equals the cluster set exactly") {
  const BlobResult blobs = generate_blobs(72, 3, 10, 2, 0.4, 0.2);
  KMeansOptions options;
  options.k = 3;
  CostLedger ledger;
  const KMeansResult r = kmeans_classical(blobs.dataset, options, ledger);
  SplitMix64 rng(72);
  for (int i = 0; i < 100; ++i) {
    const LabelMeasurement m = measure_label_register(r.state, rng);
    CHECK_EQ(m.members,
             r.state.cluster_sets[static_cast<std::size_t>(m.cluster - 1)]);
    CHECK_EQ(m.amplitude_weight, 1.0 / static_cast<double>(m.members.size()));
  }
}

TEST_CASE("measurement rejects a broken partition") {
  KMeansState state;
  state.centroids = PointMatrix::Zero(2, 1);
  state.assignments = {1, 2, 1};
  state.cluster_sets = {{0, 2}, {}};  // missing index 1
  SplitMix64 rng(73);
  CHECK_THROWS_AS(measure_label_register(state, rng), std::invalid_argument);
}
