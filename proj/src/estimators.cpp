#include "qsl/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qsl/metrics.hpp"

namespace qsl {

void EstimationParams::validate() const {
  if (!(epsilon > 0) || !std::isfinite(epsilon))
    throw std::invalid_argument("EstimationParams: epsilon must be positive");
  if (!(delta > 0) || !(delta < 0.5))
    throw std::invalid_argument(
        "EstimationParams: delta must lie in (0, 1/2); the success bound "
        "1 - 2*delta is vacuous otherwise");
  if (lambda && !(*lambda > 0))
    throw std::invalid_argument("EstimationParams: lambda must be positive");
}

std::uint64_t estimate_cost_units(double norm_x, double norm_y, double lambda,
                                  const EstimationParams& params) {
  const double t =
      norm_x * norm_y * lambda * std::log(1.0 / params.delta) / params.epsilon;
  return static_cast<std::uint64_t>(std::ceil(t));
}

double effective_lambda(const EstimationParams& params, const QramStore& a,
                        const QramStore& b) {
  if (params.lambda) return *params.lambda;
  return std::max(a.lambda(), b.lambda());
}

EstimatorPhases resolve_estimator_phases(CostLedger& ledger) {
  EstimatorPhases p;
  p.distance_quantum = ledger.register_phase(
      Backend::quantum, CostKind::algorithmic, "estimate.distance");
  p.distance_classical = ledger.register_phase(
      Backend::classical, CostKind::algorithmic, "estimate.distance.classical");
  p.inner_quantum = ledger.register_phase(Backend::quantum,
                                          CostKind::algorithmic, "estimate.inner");
  p.inner_classical = ledger.register_phase(
      Backend::classical, CostKind::algorithmic, "estimate.inner.classical");
  p.map_quantum = ledger.register_phase(Backend::quantum, CostKind::algorithmic,
                                        "estimate.map");
  p.map_classical = ledger.register_phase(
      Backend::classical, CostKind::algorithmic, "estimate.map.classical");
  return p;
}

namespace {

struct Draw {
  double error = 0;
  bool in_tolerance = true;
};

// Fixed draw order: branch, then magnitude, then sign. Exact mode consumes
// no randomness.
Draw draw_error(const EstimationParams& params, SplitMix64& rng) {
  if (params.mode == OracleMode::exact) return {0.0, true};
  if (rng.uniform01() < 2.0 * params.delta) {
    const double magnitude = params.epsilon * (1.0 + 2.0 * rng.uniform01());
    const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    return {sign * magnitude, false};
  }
  return {(2.0 * rng.uniform01() - 1.0) * params.epsilon, true};
}

void check_pair(const QramStore& x, Eigen::Index i, const QramStore& y,
                Eigen::Index j) {
  if (x.dim() != y.dim())
    throw std::invalid_argument("estimate: store dimensions differ");
  if (i < 0 || i >= x.rows() || j < 0 || j >= y.rows())
    throw std::out_of_range("estimate: row index out of range");
}

}  // namespace

NoisyEstimate estimate_distance_sq(const QramStore& x, Eigen::Index i,
                                   const QramStore& y, Eigen::Index j,
                                   const EstimationParams& params,
                                   SplitMix64& rng, CostLedger& ledger,
                                   const EstimatorPhases& phases) {
  params.validate();
  check_pair(x, i, y, j);
  const double truth = squared_euclidean(x.row_values(i), y.row_values(j));
  const double lambda = effective_lambda(params, x, y);
  const std::uint64_t cost =
      estimate_cost_units(x.row_norm(i), y.row_norm(j), lambda, params);
  const Draw draw = draw_error(params, rng);
  const double value = params.mode == OracleMode::exact
                           ? truth
                           : std::max(0.0, truth + draw.error);
  ledger.charge(phases.distance_quantum, cost);
  ledger.charge(phases.distance_classical, static_cast<std::uint64_t>(x.dim()));
  return {value, draw.in_tolerance, cost};
}

NoisyEstimate estimate_distance_sq(const QramStore& x, Eigen::Index i,
                                   const QramStore& y, Eigen::Index j,
                                   const EstimationParams& params,
                                   SplitMix64& rng, CostLedger& ledger) {
  return estimate_distance_sq(x, i, y, j, params, rng, ledger,
                              resolve_estimator_phases(ledger));
}

NoisyEstimate estimate_inner_product(const QramStore& x, Eigen::Index i,
                                     const QramStore& y, Eigen::Index j,
                                     const EstimationParams& params,
                                     SplitMix64& rng, CostLedger& ledger) {
  params.validate();
  check_pair(x, i, y, j);
  const EstimatorPhases phases = resolve_estimator_phases(ledger);
  const double truth = inner_product(x.row_values(i), y.row_values(j));
  const double lambda = effective_lambda(params, x, y);
  const std::uint64_t cost =
      estimate_cost_units(x.row_norm(i), y.row_norm(j), lambda, params);
  const Draw draw = draw_error(params, rng);
  const double value =
      params.mode == OracleMode::exact ? truth : truth + draw.error;
  ledger.charge(phases.inner_quantum, cost);
  ledger.charge(phases.inner_classical, static_cast<std::uint64_t>(x.dim()));
  return {value, draw.in_tolerance, cost};
}

NoisyMatrix estimate_matrix_product(const QramStore& x, const QramStore& y,
                                    const EstimationParams& params,
                                    SplitMix64& rng, CostLedger& ledger) {
  params.validate();
  if (x.dim() != y.dim())
    throw std::invalid_argument("estimate_matrix_product: dimensions differ");
  const Eigen::Index l = x.rows();
  const Eigen::Index u = y.rows();
  NoisyMatrix out;
  out.values.resize(l, u);
  out.in_tolerance.resize(l, u);
  for (Eigen::Index i = 0; i < l; ++i) {
    for (Eigen::Index j = 0; j < u; ++j) {
      const NoisyEstimate e =
          estimate_inner_product(x, i, y, j, params, rng, ledger);
      out.values(i, j) = e.value;
      out.in_tolerance(i, j) = e.truth_within_epsilon;
      out.total_cost += e.cost_charged;
    }
  }
  return out;
}

NoisyMatrix centroid_distance_map(const QramStore& points,
                                  const QramStore& centroids, Eigen::Index k,
                                  const EstimationParams& params,
                                  SplitMix64& rng, CostLedger& ledger) {
  params.validate();
  if (k < 1 || centroids.rows() != k)
    throw std::invalid_argument(
        "centroid_distance_map: centroid store must hold exactly k >= 1 rows");
  if (points.dim() != centroids.dim())
    throw std::invalid_argument("centroid_distance_map: dimensions differ");
  const EstimatorPhases phases = resolve_estimator_phases(ledger);
  const Eigen::Index n = points.rows();
  const double lambda = effective_lambda(params, points, centroids);

  // One superposed pass per centroid: the circuit must run long enough for
  // the largest point norm, so the unit cost uses the stores' maxima. The
  // resulting charge is k * unit, independent of N and d.
  const std::uint64_t unit = estimate_cost_units(
      points.max_row_norm(), centroids.max_row_norm(), lambda, params);
  NoisyMatrix out;
  out.values.resize(n, k);
  out.in_tolerance.resize(n, k);
  for (Eigen::Index m = 0; m < k; ++m) {
    ledger.charge(phases.map_quantum, unit);
    out.total_cost += unit;
  }
  ledger.charge(phases.map_classical,
                static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(k) *
                    static_cast<std::uint64_t>(points.dim()));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index m = 0; m < k; ++m) {
      const double truth =
          squared_euclidean(points.row_values(j), centroids.row_values(m));
      const Draw draw = draw_error(params, rng);
      out.values(j, m) = params.mode == OracleMode::exact
                             ? truth
                             : std::max(0.0, truth + draw.error);
      out.in_tolerance(j, m) = draw.in_tolerance;
    }
  }
  return out;
}

}  // namespace qsl
