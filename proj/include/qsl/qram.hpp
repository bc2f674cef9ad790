#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include "qsl/cost_ledger.hpp"
#include "qsl/rng.hpp"
#include "qsl/types.hpp"

namespace qsl {

// ceil(log2(x)) for x >= 1; 0 for x <= 1.
inline std::uint64_t ceil_log2(std::uint64_t x) {
  return x <= 1 ? 0 : std::bit_width(x - 1);
}

// Simulated quantum-addressable row store. Rows are kept exactly, together
// with their Euclidean norms and a binary tree of squared-norm partial sums
// (root = sum of all squared norms, depth = ceil(log2 N)).
//
// Cost conventions, booked on the attached ledger:
//   - each single-entry mutation charges ceil(log2(N*d)) units on the quantum
//     memory counter and N*d units on the classical comparison counter;
//     whole-row insert/delete charges d of those single-entry mutations
//     (N taken after an insert, before a delete);
//   - query_row and sample_row_index charge lambda() algorithmic units.
class QramStore {
 public:
  QramStore(Eigen::Index dim, CostLedger& ledger,
            std::optional<double> lambda_override = std::nullopt);

  // Builds a store by inserting every row (mutation charges apply).
  static QramStore from_points(const PointMatrix& points, CostLedger& ledger,
                               std::optional<double> lambda_override = std::nullopt);
  static QramStore from_dataset(const Dataset& ds, CostLedger& ledger,
                                std::optional<double> lambda_override = std::nullopt);

  Eigen::Index rows() const { return static_cast<Eigen::Index>(rows_.size()); }
  Eigen::Index dim() const { return dim_; }

  // Appends a row, returns its index.
  Eigen::Index insert_row(const Eigen::Ref<const FeatureVector>& v);
  void update_entry(Eigen::Index i, Eigen::Index j, double value);
  // Removes row i; higher rows shift down by one.
  void delete_row(Eigen::Index i);

  struct RowQuery {
    Eigen::Map<const FeatureVector> values;
    double norm;
  };
  // Charged oracle access to one row plus its norm.
  RowQuery query_row(Eigen::Index i) const;
  // Charged norm-weighted sampling: row i with probability norm_i^2 / total.
  // Walks the partial-sum tree; all-zero or empty store is an error.
  Eigen::Index sample_row_index(SplitMix64& rng) const;

  // Uncharged views: simulator-side ground truth used by the estimation
  // oracles, which price their own work.
  Eigen::Map<const FeatureVector> row_values(Eigen::Index i) const;
  double row_norm(Eigen::Index i) const;
  double max_row_norm() const;

  // State-preparation cost: the override if given, else max(1, ceil(log2(N*d))).
  double lambda() const;
  // Per-entry mutation charge at the current size: ceil(log2(N*d)).
  std::uint64_t entry_mutation_cost() const;

  double norm_tree_root() const;
  int norm_tree_depth() const;
  // Heap layout: node 1 is the root, node p has children 2p and 2p+1,
  // leaves start at leaf_offset(). Exposed for consistency checks.
  const std::vector<double>& norm_tree() const { return tree_; }
  Eigen::Index leaf_offset() const { return capacity_; }

 private:
  void check_row(Eigen::Index i) const;
  void set_leaf(Eigen::Index i, double squared_norm);
  void rebuild_tree();
  void charge_mutation(Eigen::Index entries, Eigen::Index n_for_charge);

  Eigen::Index dim_;
  CostLedger* ledger_;
  std::optional<double> lambda_override_;
  std::vector<FeatureVector> rows_;
  std::vector<double> norms_;
  std::vector<double> tree_;   // size 2 * capacity_
  Eigen::Index capacity_ = 0;  // power-of-two leaf count

  PhaseHandle mutate_quantum_;
  PhaseHandle mutate_classical_;
  PhaseHandle query_quantum_;
  PhaseHandle sample_quantum_;
};

}  // namespace qsl
