#include "qsl/pnn.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "qsl/metrics.hpp"
#include "qsl/qram.hpp"

namespace qsl {

namespace {

struct Candidate {
  double dist = 0;
  Eigen::Index source = -1;   // labeled index
  Eigen::Index target = -1;   // unlabeled index

  // Distance first, then lexicographic (source, target).
  bool operator<(const Candidate& o) const {
    if (dist != o.dist) return dist < o.dist;
    if (source != o.source) return source < o.source;
    return target < o.target;
  }
};

PnnState initial_state(const Dataset& ds) {
  PnnState state;
  for (Eigen::Index i = 0; i < ds.labeled_count(); ++i)
    state.labeled.emplace_back(i, ds.label(i));
  for (Eigen::Index j = ds.labeled_count(); j < ds.size(); ++j)
    state.unlabeled.push_back(j);
  if (state.unlabeled.empty()) return state;
  if (state.labeled.empty())
    throw std::invalid_argument(
        "pnn: needs at least one labeled point to propagate from");
  return state;
}

// Shared propagation loop; evaluate(i, j) returns the (possibly estimated)
// squared distance for one pair and books its own per-pair charges.
template <typename Evaluate>
PnnResult propagate(const Dataset& ds, const TieBreakPolicy& tie_break,
                    CostLedger& ledger, PhaseHandle minimize_phase,
                    PhaseHandle assign_phase, Evaluate&& evaluate) {
  PnnState state = initial_state(ds);
  PnnResult result;
  result.labels = ds.labels();
  std::optional<SplitMix64> tie_rng;
  if (tie_break.kind == TieBreakKind::seeded_random)
    tie_rng.emplace(derive_stream(tie_break.seed, "pnn.tie_break"));

  std::vector<Candidate> ties;  // reused across iterations
  while (!state.unlabeled.empty()) {
    const CostSnapshot before = ledger.snapshot();
    const Eigen::Index l = static_cast<Eigen::Index>(state.labeled.size());
    const Eigen::Index u = static_cast<Eigen::Index>(state.unlabeled.size());

    Candidate best;
    bool have_best = false;
    ties.clear();
    for (const auto& [i, label] : state.labeled) {
      for (const Eigen::Index j : state.unlabeled) {
        const Candidate cand{evaluate(i, j), i, j};
        if (!have_best || cand < best) {
          best = cand;
          have_best = true;
        }
        if (tie_rng) {
          if (ties.empty() || cand.dist < ties.front().dist) {
            ties.clear();
            ties.push_back(cand);
          } else if (cand.dist == ties.front().dist) {
            ties.push_back(cand);
          }
        }
      }
    }
    if (tie_rng && ties.size() > 1)
      best = ties[static_cast<std::size_t>(tie_rng->below(ties.size()))];

    ledger.charge(minimize_phase,
                  static_cast<std::uint64_t>(l) * static_cast<std::uint64_t>(u));
    ledger.charge(assign_phase, 1);

    const LabelId label = result.labels[static_cast<std::size_t>(best.source)];
    result.labels[static_cast<std::size_t>(best.target)] = label;
    state.labeled.emplace_back(best.target, label);
    state.unlabeled.erase(std::find(state.unlabeled.begin(),
                                    state.unlabeled.end(), best.target));

    PnnStep step;
    step.iteration = state.iteration;
    step.promoted = best.target;
    step.source = best.source;
    step.label = label;
    step.distance_sq = best.dist;
    step.labeled_before = l;
    step.unlabeled_before = u;
    step.charges = CostLedger::diff(before, ledger.snapshot());
    result.trace.push_back(std::move(step));
    ++state.iteration;
  }
  return result;
}

}  // namespace

PnnResult pnn_classical(const Dataset& ds, const TieBreakPolicy& tie_break,
                        CostLedger& ledger) {
  const PhaseHandle distance = ledger.register_phase(
      Backend::classical, CostKind::algorithmic, "pnn.step1.distance");
  const PhaseHandle minimize = ledger.register_phase(
      Backend::classical, CostKind::algorithmic, "pnn.step2.minimize");
  const PhaseHandle assign = ledger.register_phase(
      Backend::classical, CostKind::algorithmic, "pnn.step3.assign");
  const std::uint64_t d = static_cast<std::uint64_t>(ds.dim());
  return propagate(ds, tie_break, ledger, minimize, assign,
                   [&](Eigen::Index i, Eigen::Index j) {
                     ledger.charge(distance, d);
                     return squared_euclidean(ds.point(i), ds.point(j));
                   });
}

PnnResult pnn_quantum(const Dataset& ds, const EstimationParams& params,
                      const TieBreakPolicy& tie_break, SplitMix64& rng,
                      CostLedger& ledger) {
  params.validate();
  const EstimatorPhases phases = resolve_estimator_phases(ledger);
  const PhaseHandle minimize = ledger.register_phase(
      Backend::quantum, CostKind::algorithmic, "pnn.step2.minimize");
  const PhaseHandle assign = ledger.register_phase(
      Backend::quantum, CostKind::algorithmic, "pnn.step3.assign");
  const QramStore store = QramStore::from_dataset(ds, ledger);
  return propagate(ds, tie_break, ledger, minimize, assign,
                   [&](Eigen::Index i, Eigen::Index j) {
                     return estimate_distance_sq(store, i, store, j, params,
                                                 rng, ledger, phases)
                         .value;
                   });
}

}  // namespace qsl
