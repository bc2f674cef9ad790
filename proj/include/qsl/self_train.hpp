#pragma once

#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "qsl/cost_ledger.hpp"
#include "qsl/types.hpp"

namespace qsl {

struct CandidatePrediction {
  Eigen::Index point = -1;   // unlabeled point the prediction is for
  LabelId label = kUnlabeled;
  double score = 0;          // larger = more confident
  Eigen::Index source = -1;  // supporting labeled point; -1 if not applicable
};

// fit(L) / predict(U) contract consumed by the self-training driver.
class SupervisedLearner {
 public:
  virtual ~SupervisedLearner() = default;
  virtual void fit(const Dataset& ds,
                   const std::vector<std::pair<Eigen::Index, LabelId>>& labeled) = 0;
  virtual std::vector<CandidatePrediction> predict(
      const Dataset& ds, const std::vector<Eigen::Index>& unlabeled) = 0;
};

// Promote the single best-scoring prediction per round, provided it clears
// min_score. The default threshold accepts everything (promote-1).
struct ConfidencePolicy {
  double min_score = -std::numeric_limits<double>::infinity();
};

struct SelfTrainResult {
  std::vector<LabelId> labels;
  bool stagnated = false;  // stopped with unlabeled points left
  int iterations = 0;
  std::vector<Eigen::Index> promoted_order;
};

// Generic wrapper: fit on L, predict U, promote the most confident
// prediction, repeat until U is empty or nothing clears the policy.
SelfTrainResult self_train(const Dataset& ds, SupervisedLearner& base_learner,
                           const ConfidencePolicy& confidence,
                           CostLedger& ledger);

// 1-NN base learner: each unlabeled point is scored by minus its squared
// distance to the closest labeled point. Used with the promote-1 policy the
// driver reproduces the classical propagating classifier exactly. predict
// charges |L|*|U|*d distance units and |L|*|U| comparisons.
class NearestNeighborLearner : public SupervisedLearner {
 public:
  explicit NearestNeighborLearner(CostLedger& ledger);
  void fit(const Dataset& ds,
           const std::vector<std::pair<Eigen::Index, LabelId>>& labeled) override;
  std::vector<CandidatePrediction> predict(
      const Dataset& ds, const std::vector<Eigen::Index>& unlabeled) override;

 private:
  CostLedger* ledger_;
  PhaseHandle distance_;
  PhaseHandle minimize_;
  std::vector<std::pair<Eigen::Index, LabelId>> labeled_;
};

}  // namespace qsl
