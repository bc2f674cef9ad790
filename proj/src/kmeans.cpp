#include "qsl/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qsl/metrics.hpp"
#include "qsl/qram.hpp"

namespace qsl {

namespace {

void validate_options(const Dataset& ds, const KMeansOptions& options) {
  if (options.k < 1)
    throw std::invalid_argument("kmeans: k must be >= 1");
  if (options.k > ds.size())
    throw std::invalid_argument("kmeans: k exceeds the number of points");
  if (!(options.tol >= 0))
    throw std::invalid_argument("kmeans: tol must be nonnegative");
  if (options.max_iter < 1)
    throw std::invalid_argument("kmeans: max_iter must be >= 1");
  if (ds.max_label() > options.k)
    throw std::invalid_argument(
        "kmeans: dataset labels must lie in [1, k]");
}

std::vector<std::vector<Eigen::Index>> partition(
    const std::vector<LabelId>& assignments, int k) {
  std::vector<std::vector<Eigen::Index>> sets(static_cast<std::size_t>(k));
  for (std::size_t j = 0; j < assignments.size(); ++j)
    sets[static_cast<std::size_t>(assignments[j] - 1)].push_back(
        static_cast<Eigen::Index>(j));
  return sets;
}

// Initial centroids: labeled means where available, otherwise seeded-random
// distinct data points.
PointMatrix initial_centroids(const Dataset& ds, const KMeansOptions& options) {
  const int k = options.k;
  PointMatrix centroids = PointMatrix::Zero(k, ds.dim());
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < ds.labeled_count(); ++i) {
    const int m = ds.label(i) - 1;
    centroids.row(m) += ds.points().row(i);
    ++counts[static_cast<std::size_t>(m)];
  }
  SplitMix64 rng = derive_stream(options.init_seed, "kmeans.init");
  std::vector<char> used(static_cast<std::size_t>(ds.size()), 0);
  for (int m = 0; m < k; ++m) {
    if (counts[static_cast<std::size_t>(m)] > 0) {
      centroids.row(m) /= static_cast<double>(counts[static_cast<std::size_t>(m)]);
    } else {
      Eigen::Index pick;
      do {
        pick = static_cast<Eigen::Index>(
            rng.below(static_cast<std::uint64_t>(ds.size())));
      } while (used[static_cast<std::size_t>(pick)]);
      used[static_cast<std::size_t>(pick)] = 1;
      centroids.row(m) = ds.points().row(pick);
    }
  }
  return centroids;
}

// Mean of each cluster's members, accumulated in ascending point order; an
// empty cluster keeps its previous centroid. Used identically by both
// backends so their arithmetic matches bit for bit.
PointMatrix updated_centroids(const Dataset& ds,
                              const std::vector<LabelId>& assignments, int k,
                              const PointMatrix& previous) {
  PointMatrix next = previous;
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
  PointMatrix sums = PointMatrix::Zero(k, ds.dim());
  for (Eigen::Index j = 0; j < ds.size(); ++j) {
    const int m = assignments[static_cast<std::size_t>(j)] - 1;
    sums.row(m) += ds.points().row(j);
    ++counts[static_cast<std::size_t>(m)];
  }
  for (int m = 0; m < k; ++m)
    if (counts[static_cast<std::size_t>(m)] > 0)
      next.row(m) =
          sums.row(m) / static_cast<double>(counts[static_cast<std::size_t>(m)]);
  return next;
}

double objective_against(const Dataset& ds,
                         const std::vector<LabelId>& assignments,
                         const PointMatrix& centroids) {
  double total = 0;
  for (Eigen::Index j = 0; j < ds.size(); ++j) {
    const int m = assignments[static_cast<std::size_t>(j)] - 1;
    total += squared_euclidean(
        ds.point(j),
        Eigen::Map<const FeatureVector>(centroids.row(m).data(),
                                        centroids.cols()));
  }
  return total;
}

double max_shift_sq(const PointMatrix& before, const PointMatrix& after) {
  double worst = 0;
  for (Eigen::Index m = 0; m < before.rows(); ++m)
    worst = std::max(worst, (after.row(m) - before.row(m)).squaredNorm());
  return worst;
}

// Assignment step shared by both backends: labeled points are pinned to
// their labels, unlabeled points take the centroid with the smallest
// (estimated) squared distance, ties to the smallest cluster index.
std::vector<LabelId> assign_points(const Dataset& ds,
                                   const Eigen::MatrixXd& distances, int k) {
  std::vector<LabelId> assignments(static_cast<std::size_t>(ds.size()));
  for (Eigen::Index j = 0; j < ds.size(); ++j) {
    if (j < ds.labeled_count()) {
      assignments[static_cast<std::size_t>(j)] = ds.label(j);
      continue;
    }
    int best = 0;
    for (int m = 1; m < k; ++m)
      if (distances(j, m) < distances(j, best)) best = m;
    assignments[static_cast<std::size_t>(j)] = best + 1;
  }
  return assignments;
}

}  // namespace

KMeansResult kmeans_classical(const Dataset& ds, const KMeansOptions& options,
                              CostLedger& ledger) {
  validate_options(ds, options);
  const PhaseHandle step1 = ledger.register_phase(
      Backend::classical, CostKind::algorithmic, "kmeans.step1.distance");
  const PhaseHandle step2 = ledger.register_phase(
      Backend::classical, CostKind::algorithmic, "kmeans.step2.assign");
  const PhaseHandle step3 = ledger.register_phase(
      Backend::classical, CostKind::algorithmic, "kmeans.step3.update");

  const int k = options.k;
  const std::uint64_t n64 = static_cast<std::uint64_t>(ds.size());
  const std::uint64_t k64 = static_cast<std::uint64_t>(k);
  const std::uint64_t d64 = static_cast<std::uint64_t>(ds.dim());

  KMeansResult result;
  result.state.centroids = initial_centroids(ds, options);
  Eigen::MatrixXd distances(ds.size(), k);
  for (int t = 0; t < options.max_iter; ++t) {
    const CostSnapshot before = ledger.snapshot();

    for (Eigen::Index j = 0; j < ds.size(); ++j)
      for (int m = 0; m < k; ++m)
        distances(j, m) = squared_euclidean(
            ds.point(j),
            Eigen::Map<const FeatureVector>(
                result.state.centroids.row(m).data(), ds.dim()));
    ledger.charge(step1, n64 * k64 * d64);

    result.state.assignments = assign_points(ds, distances, k);
    ledger.charge(step2, n64 * k64);

    const PointMatrix next =
        updated_centroids(ds, result.state.assignments, k, result.state.centroids);
    ledger.charge(step3, n64 * d64);

    KMeansIterRecord record;
    record.t = t;
    record.max_shift_sq = max_shift_sq(result.state.centroids, next);
    result.state.centroids = next;
    result.state.cluster_sets = partition(result.state.assignments, k);
    result.state.objective =
        objective_against(ds, result.state.assignments, result.state.centroids);
    result.state.iteration = t + 1;

    record.assignments = result.state.assignments;
    record.centroids = result.state.centroids;
    record.objective = result.state.objective;
    record.charges = CostLedger::diff(before, ledger.snapshot());
    result.trace.push_back(std::move(record));

    if (result.trace.back().max_shift_sq <= options.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

KMeansResult kmeans_quantum(const Dataset& ds, const KMeansOptions& options,
                            const EstimationParams& params,
                            CentroidUpdateMode update_mode, SplitMix64& rng,
                            CostLedger& ledger) {
  validate_options(ds, options);
  params.validate();
  const PhaseHandle step2 = ledger.register_phase(
      Backend::quantum, CostKind::algorithmic, "kmeans.step2.assign");
  const PhaseHandle step3 = ledger.register_phase(
      Backend::quantum, CostKind::algorithmic, "kmeans.step3.measure");
  const PhaseHandle step4 = ledger.register_phase(
      Backend::quantum, CostKind::algorithmic, "kmeans.step4.update");

  const int k = options.k;
  const std::uint64_t n64 = static_cast<std::uint64_t>(ds.size());

  const QramStore points = QramStore::from_dataset(ds, ledger);

  KMeansResult result;
  result.state.centroids = initial_centroids(ds, options);
  for (int t = 0; t < options.max_iter; ++t) {
    const CostSnapshot before = ledger.snapshot();

    // Step 1: distance estimation against the current centroids, which are
    // loaded into their own store each iteration (memory charges apply).
    QramStore centroid_store(ds.dim(), ledger, params.lambda);
    for (int m = 0; m < k; ++m)
      centroid_store.insert_row(Eigen::Map<const FeatureVector>(
          result.state.centroids.row(m).data(), ds.dim()));
    const NoisyMatrix map = centroid_distance_map(points, centroid_store, k,
                                                  params, rng, ledger);

    // Step 2: assignment, then uncompute of the distance registers (free).
    result.state.assignments = assign_points(ds, map.values, k);
    ledger.charge(step2, static_cast<std::uint64_t>(k));
    result.state.cluster_sets = partition(result.state.assignments, k);

    // Step 3: label-register measurement.
    result.state.iteration = t + 1;
    const LabelMeasurement measured = measure_label_register(result.state, rng);
    ledger.charge(step3, 1);

    // Step 4: centroid update, N units per updated centroid.
    const PointMatrix all_next =
        updated_centroids(ds, result.state.assignments, k, result.state.centroids);
    PointMatrix next;
    if (update_mode == CentroidUpdateMode::all_clusters) {
      next = all_next;
      for (int m = 0; m < k; ++m) ledger.charge(step4, n64);
    } else {
      next = result.state.centroids;
      next.row(measured.cluster - 1) = all_next.row(measured.cluster - 1);
      ledger.charge(step4, n64);
    }

    KMeansIterRecord record;
    record.t = t;
    record.max_shift_sq = max_shift_sq(result.state.centroids, next);
    result.state.centroids = next;
    result.state.objective =
        objective_against(ds, result.state.assignments, result.state.centroids);

    record.assignments = result.state.assignments;
    record.centroids = result.state.centroids;
    record.objective = result.state.objective;
    record.measured_cluster = measured.cluster;
    record.uncompute_event = true;
    record.charges = CostLedger::diff(before, ledger.snapshot());
    result.trace.push_back(std::move(record));

    if (result.trace.back().max_shift_sq <= options.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

LabelMeasurement measure_label_register(const KMeansState& state,
                                        SplitMix64& rng) {
  const std::size_t total_points = state.assignments.size();
  if (total_points == 0 || state.cluster_sets.empty())
    throw std::invalid_argument(
        "measure_label_register: state has no assignments");
  std::size_t counted = 0;
  for (const auto& s : state.cluster_sets) counted += s.size();
  if (counted != total_points)
    throw std::invalid_argument(
        "measure_label_register: cluster sets do not partition the points");

  // Cluster sizes are integers, so the cumulative sums are exact and
  // r < total strictly; an empty cluster can never be selected because it
  // leaves the cumulative sum unchanged.
  const double r = rng.uniform01() * static_cast<double>(total_points);
  double cumulative = 0;
  std::size_t chosen = state.cluster_sets.size();
  for (std::size_t m = 0; m < state.cluster_sets.size(); ++m) {
    cumulative += static_cast<double>(state.cluster_sets[m].size());
    if (r < cumulative) {
      chosen = m;
      break;
    }
  }
  if (chosen == state.cluster_sets.size()) {
    for (std::size_t m = state.cluster_sets.size(); m-- > 0;) {
      if (!state.cluster_sets[m].empty()) {
        chosen = m;
        break;
      }
    }
  }

  LabelMeasurement out;
  out.cluster = static_cast<int>(chosen) + 1;
  out.members = state.cluster_sets[chosen];
  out.amplitude_weight = 1.0 / static_cast<double>(out.members.size());
  return out;
}

}  // namespace qsl
