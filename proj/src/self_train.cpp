#include "qsl/self_train.hpp"

#include <algorithm>
#include <stdexcept>

#include "qsl/metrics.hpp"

namespace qsl {

SelfTrainResult self_train(const Dataset& ds, SupervisedLearner& base_learner,
                           const ConfidencePolicy& confidence,
                           CostLedger& ledger) {
  const PhaseHandle promote = ledger.register_phase(
      Backend::classical, CostKind::algorithmic, "selftrain.promote");

  std::vector<std::pair<Eigen::Index, LabelId>> labeled;
  std::vector<Eigen::Index> unlabeled;
  for (Eigen::Index i = 0; i < ds.labeled_count(); ++i)
    labeled.emplace_back(i, ds.label(i));
  for (Eigen::Index j = ds.labeled_count(); j < ds.size(); ++j)
    unlabeled.push_back(j);
  if (!unlabeled.empty() && labeled.empty())
    throw std::invalid_argument(
        "self_train: needs at least one labeled point");

  SelfTrainResult result;
  result.labels = ds.labels();
  while (!unlabeled.empty()) {
    base_learner.fit(ds, labeled);
    const std::vector<CandidatePrediction> preds =
        base_learner.predict(ds, unlabeled);

    const CandidatePrediction* best = nullptr;
    for (const CandidatePrediction& p : preds) {
      if (p.label == kUnlabeled) continue;
      if (!best || p.score > best->score ||
          (p.score == best->score &&
           std::pair(p.source, p.point) < std::pair(best->source, best->point)))
        best = &p;
    }
    if (!best || !(best->score >= confidence.min_score)) {
      result.stagnated = true;
      break;
    }

    ledger.charge(promote, 1);
    result.labels[static_cast<std::size_t>(best->point)] = best->label;
    result.promoted_order.push_back(best->point);
    labeled.emplace_back(best->point, best->label);
    unlabeled.erase(
        std::find(unlabeled.begin(), unlabeled.end(), best->point));
    ++result.iterations;
  }
  return result;
}

NearestNeighborLearner::NearestNeighborLearner(CostLedger& ledger)
    : ledger_(&ledger) {
  distance_ = ledger_->register_phase(Backend::classical, CostKind::algorithmic,
                                      "selftrain.distance");
  minimize_ = ledger_->register_phase(Backend::classical, CostKind::algorithmic,
                                      "selftrain.minimize");
}

void NearestNeighborLearner::fit(
    const Dataset&,
    const std::vector<std::pair<Eigen::Index, LabelId>>& labeled) {
  labeled_ = labeled;
}

std::vector<CandidatePrediction> NearestNeighborLearner::predict(
    const Dataset& ds, const std::vector<Eigen::Index>& unlabeled) {
  std::vector<CandidatePrediction> preds;
  preds.reserve(unlabeled.size());
  const std::uint64_t d = static_cast<std::uint64_t>(ds.dim());
  for (const Eigen::Index j : unlabeled) {
    CandidatePrediction p;
    p.point = j;
    bool first = true;
    double best_dist = 0;
    for (const auto& [i, label] : labeled_) {
      ledger_->charge(distance_, d);
      ledger_->charge(minimize_, 1);
      const double dist = squared_euclidean(ds.point(i), ds.point(j));
      if (first || dist < best_dist ||
          (dist == best_dist && i < p.source)) {
        best_dist = dist;
        p.source = i;
        p.label = label;
        first = false;
      }
    }
    p.score = -best_dist;
    preds.push_back(p);
  }
  return preds;
}

}  // namespace qsl
