#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qsl/cost_ledger.hpp"
#include "qsl/estimators.hpp"
#include "qsl/rng.hpp"
#include "qsl/types.hpp"

namespace qsl {

struct KMeansOptions {
  int k = 0;
  std::uint64_t init_seed = 0;  // seeds the fallback centroid picks only
  double tol = 1e-8;            // convergence: max squared centroid shift
  int max_iter = 100;
};

// Quantum centroid update policy. all_clusters recomputes every centroid
// each iteration (the combined per-iteration cost reading); sampled_cluster
// updates only the cluster the label measurement returned.
enum class CentroidUpdateMode { all_clusters, sampled_cluster };

// Iteration state: centroids c_m, assignments z in [1, k], the induced
// partition S_m, iteration counter and the within-cluster sum of squared
// distances.
struct KMeansState {
  PointMatrix centroids;   // k x d
  std::vector<LabelId> assignments;
  std::vector<std::vector<Eigen::Index>> cluster_sets;
  int iteration = 0;
  double objective = 0;
};

struct KMeansIterRecord {
  int t = 0;
  std::vector<LabelId> assignments;
  PointMatrix centroids;  // after the update
  double objective = 0;   // against the updated centroids
  double max_shift_sq = 0;
  std::optional<int> measured_cluster;  // quantum runs: 1-based outcome
  bool uncompute_event = false;         // quantum runs: zero-cost marker
  CostSnapshot charges;
};

struct KMeansResult {
  KMeansState state;
  std::vector<KMeansIterRecord> trace;
  bool converged = false;
};

// Lloyd iterations with labeled points pinned to their labels. Labeled
// points seed the initial centroids; clusters without labeled points start
// from a seeded-random data point. Unlabeled points go to the nearest
// centroid (ties to the smallest cluster index); a cluster that ends up
// empty keeps its centroid. Per iteration the classical ledger books
// N*k*d distance units, N*k comparisons and N*d update arithmetic.
KMeansResult kmeans_classical(const Dataset& ds, const KMeansOptions& options,
                              CostLedger& ledger);

// Same loop against the stochastic oracle: Step 1 gets all N*k distances
// from centroid_distance_map (quantum charge k * unit), Step 2 assigns and
// uncomputes (k units, zero-cost uncompute event), Step 3 measures the label
// register (1 unit), Step 4 updates centroids at N units per updated
// centroid. With exact-mode params and the same options the run reproduces
// kmeans_classical iteration for iteration.
KMeansResult kmeans_quantum(const Dataset& ds, const KMeansOptions& options,
                            const EstimationParams& params,
                            CentroidUpdateMode update_mode, SplitMix64& rng,
                            CostLedger& ledger);

struct LabelMeasurement {
  int cluster = 0;                     // 1-based, matches assignment labels
  std::vector<Eigen::Index> members;   // S_m for the measured m
  double amplitude_weight = 0;         // uniform membership weight 1/|S_m|
};

// Samples cluster m with probability |S_m| / N and returns the uniform
// superposition view over its members.
LabelMeasurement measure_label_register(const KMeansState& state,
                                        SplitMix64& rng);

}  // namespace qsl
