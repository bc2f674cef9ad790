#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qsl/cost_ledger.hpp"
#include "qsl/estimators.hpp"
#include "qsl/rng.hpp"
#include "qsl/types.hpp"

namespace qsl {

enum class TieBreakKind { lowest_index, seeded_random };

// How equal-distance candidate pairs are resolved. The default is fully
// deterministic: the lexicographically smallest (labeled index, unlabeled
// index) pair wins. seeded_random picks uniformly among the tied pairs from
// its own stream.
struct TieBreakPolicy {
  TieBreakKind kind = TieBreakKind::lowest_index;
  std::uint64_t seed = 0;  // used only by seeded_random
};

// L/U bookkeeping of the propagation loop.
struct PnnState {
  std::vector<std::pair<Eigen::Index, LabelId>> labeled;  // L, promotion order
  std::vector<Eigen::Index> unlabeled;                    // U, ascending
  int iteration = 0;
};

struct PnnStep {
  int iteration = 0;              // 0-based
  Eigen::Index promoted = -1;     // point moved from U to L
  Eigen::Index source = -1;       // labeled point whose label it copied
  LabelId label = kUnlabeled;
  double distance_sq = 0;         // value the minimization saw
  Eigen::Index labeled_before = 0;
  Eigen::Index unlabeled_before = 0;
  CostSnapshot charges;           // ledger delta for this iteration
};

struct PnnResult {
  std::vector<LabelId> labels;    // final transductive labeling, size N
  std::vector<PnnStep> trace;     // one step per promotion (u steps total)
};

// Label propagation: repeatedly find the globally closest (labeled,
// unlabeled) pair, copy the label, and promote the unlabeled point.
// Terminates after exactly u iterations. Requires at least one labeled
// point unless u == 0. Per iteration the ledger is charged |L|*|U|*d
// distance units, |L|*|U| comparisons and 1 assignment, all classical.
PnnResult pnn_classical(const Dataset& ds, const TieBreakPolicy& tie_break,
                        CostLedger& ledger);

// Same propagation with every pairwise distance obtained from the stochastic
// oracle. Points are loaded into a simulated QRAM first (memory charges).
// Per iteration: |L|*|U| oracle estimates (each booking its own cost),
// |L|*|U| comparison units and 1 assignment on the quantum counter. With
// exact-mode params the run reproduces pnn_classical step for step.
PnnResult pnn_quantum(const Dataset& ds, const EstimationParams& params,
                      const TieBreakPolicy& tie_break, SplitMix64& rng,
                      CostLedger& ledger);

}  // namespace qsl
