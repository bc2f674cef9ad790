#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

#include "qsl/cost_ledger.hpp"
#include "qsl/qram.hpp"
#include "qsl/rng.hpp"

namespace qsl {

enum class OracleMode { exact, noisy };

// Accuracy contract for the stochastic oracles: with probability at least
// 1 - 2*delta the returned value is within epsilon of the truth. `exact`
// returns ground truth but still books the cost formula, evaluated at the
// same (epsilon, delta) as reference values, so scaling studies stay
// comparable across modes.
struct EstimationParams {
  OracleMode mode = OracleMode::noisy;
  double epsilon = 0.1;
  double delta = 0.05;
  // State-preparation cost; defaults to the stores' value (the larger one
  // when two stores are involved).
  std::optional<double> lambda;

  static EstimationParams exact(std::optional<double> lambda = std::nullopt) {
    return {OracleMode::exact, 0.1, 0.05, lambda};
  }
  static EstimationParams noisy(double epsilon, double delta,
                                std::optional<double> lambda = std::nullopt) {
    return {OracleMode::noisy, epsilon, delta, lambda};
  }

  // epsilon > 0, 0 < delta < 1/2, lambda (if set) > 0.
  void validate() const;
};

struct NoisyEstimate {
  double value = 0;
  // True when the draw came from the in-tolerance branch. In exact mode this
  // is always true.
  bool truth_within_epsilon = true;
  std::uint64_t cost_charged = 0;
};

// Entry-wise estimates of a full product; flags mirror NoisyEstimate.
struct NoisyMatrix {
  Eigen::MatrixXd values;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> in_tolerance;
  std::uint64_t total_cost = 0;
};

// Cost of one estimate: ceil(|x| * |y| * lambda * ln(1/delta) / epsilon).
std::uint64_t estimate_cost_units(double norm_x, double norm_y, double lambda,
                                  const EstimationParams& params);

double effective_lambda(const EstimationParams& params, const QramStore& a,
                        const QramStore& b);

// Squared-distance oracle. Noisy draws: with probability 1 - 2*delta the
// error is uniform on [-epsilon, +epsilon]; otherwise its magnitude is
// uniform on [epsilon, 3*epsilon] with a random sign. Distance estimates are
// clamped at zero (which never worsens the error); inner products are not.
NoisyEstimate estimate_distance_sq(const QramStore& x, Eigen::Index i,
                                   const QramStore& y, Eigen::Index j,
                                   const EstimationParams& params,
                                   SplitMix64& rng, CostLedger& ledger);

NoisyEstimate estimate_inner_product(const QramStore& x, Eigen::Index i,
                                     const QramStore& y, Eigen::Index j,
                                     const EstimationParams& params,
                                     SplitMix64& rng, CostLedger& ledger);

// All l*u inner products <x_i, y_j> as independent estimates (row-major
// draw order). Each entry satisfies the single-estimate contract. Charges
// l*u estimate costs on the quantum counter and l*u*d multiply-accumulate
// units on the classical comparison counter.
NoisyMatrix estimate_matrix_product(const QramStore& x, const QramStore& y,
                                    const EstimationParams& params,
                                    SplitMix64& rng, CostLedger& ledger);

// N x k squared distances from every point to every centroid. Entries obey
// the single-estimate contract, but the quantum counter is charged only
// k * unit_cost (one superposed pass per centroid, independent of N and d;
// unit_cost uses the stores' maximal norms). The classical comparison
// counter books N*k*d.
NoisyMatrix centroid_distance_map(const QramStore& points,
                                  const QramStore& centroids, Eigen::Index k,
                                  const EstimationParams& params,
                                  SplitMix64& rng, CostLedger& ledger);

// Pre-resolved ledger handles for per-estimate hot loops.
struct EstimatorPhases {
  PhaseHandle distance_quantum;
  PhaseHandle distance_classical;
  PhaseHandle inner_quantum;
  PhaseHandle inner_classical;
  PhaseHandle map_quantum;
  PhaseHandle map_classical;
};
EstimatorPhases resolve_estimator_phases(CostLedger& ledger);

NoisyEstimate estimate_distance_sq(const QramStore& x, Eigen::Index i,
                                   const QramStore& y, Eigen::Index j,
                                   const EstimationParams& params,
                                   SplitMix64& rng, CostLedger& ledger,
                                   const EstimatorPhases& phases);

}  // namespace qsl
