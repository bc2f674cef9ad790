#include "qsl/cost_ledger.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qsl {

const char* to_string(Backend b) {
  return b == Backend::classical ? "classical" : "quantum";
}

const char* to_string(CostKind k) {
  return k == CostKind::memory_access ? "memory_access" : "algorithmic";
}

PhaseHandle CostLedger::register_phase(Backend b, CostKind k,
                                       std::string_view phase) {
  if (phase.empty())
    throw std::invalid_argument("CostLedger: empty phase tag");
  std::lock_guard lock(mutex_);
  Key key{static_cast<int>(b), static_cast<int>(k), std::string(phase)};
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  const PhaseHandle h = counters_.size();
  counters_.emplace_back();
  keys_.emplace_back(b, k, std::string(phase));
  index_.emplace(std::move(key), h);
  return h;
}

bool CostLedger::is_registered(Backend b, CostKind k,
                               std::string_view phase) const {
  return find(b, k, phase) != nullptr;
}

const CostLedger::Counter* CostLedger::find(Backend b, CostKind k,
                                            std::string_view phase) const {
  std::lock_guard lock(mutex_);
  Key key{static_cast<int>(b), static_cast<int>(k), std::string(phase)};
  auto it = index_.find(key);
  return it == index_.end() ? nullptr : &counters_[it->second];
}

void CostLedger::charge(PhaseHandle h, std::uint64_t amount) {
  if (h >= counters_.size())
    throw std::invalid_argument("CostLedger: invalid phase handle");
  counters_[h].units.fetch_add(amount, std::memory_order_relaxed);
  counters_[h].calls.fetch_add(1, std::memory_order_relaxed);
}

void CostLedger::charge(Backend b, CostKind k, std::string_view phase,
                        std::uint64_t amount) {
  std::uint64_t handle;
  {
    std::lock_guard lock(mutex_);
    Key key{static_cast<int>(b), static_cast<int>(k), std::string(phase)};
    auto it = index_.find(key);
    if (it == index_.end())
      throw std::invalid_argument("CostLedger: phase '" + std::string(phase) +
                                  "' is not registered");
    handle = it->second;
  }
  charge(handle, amount);
}

std::uint64_t CostLedger::units(Backend b, CostKind k,
                                std::string_view phase) const {
  const Counter* c = find(b, k, phase);
  return c ? c->units.load(std::memory_order_relaxed) : 0;
}

std::uint64_t CostLedger::calls(Backend b, CostKind k,
                                std::string_view phase) const {
  const Counter* c = find(b, k, phase);
  return c ? c->calls.load(std::memory_order_relaxed) : 0;
}

std::uint64_t CostLedger::total_units(Backend b, CostKind k) const {
  std::lock_guard lock(mutex_);
  std::uint64_t total = 0;
  for (std::size_t h = 0; h < keys_.size(); ++h) {
    const auto& [kb, kk, tag] = keys_[h];
    if (kb == b && kk == k)
      total += counters_[h].units.load(std::memory_order_relaxed);
  }
  return total;
}

CostSnapshot CostLedger::snapshot() const {
  std::lock_guard lock(mutex_);
  CostSnapshot rows;
  rows.reserve(keys_.size());
  for (std::size_t h = 0; h < keys_.size(); ++h) {
    const auto& [b, k, tag] = keys_[h];
    rows.push_back({b, k, tag, counters_[h].units.load(std::memory_order_relaxed),
                    counters_[h].calls.load(std::memory_order_relaxed)});
  }
  std::sort(rows.begin(), rows.end(), [](const CostRow& a, const CostRow& c) {
    return std::tie(a.backend, a.kind, a.phase) <
           std::tie(c.backend, c.kind, c.phase);
  });
  return rows;
}

CostSnapshot CostLedger::diff(const CostSnapshot& before,
                              const CostSnapshot& after) {
  std::map<std::tuple<Backend, CostKind, std::string>,
           std::pair<std::uint64_t, std::uint64_t>>
      base;
  for (const CostRow& r : before)
    base[{r.backend, r.kind, r.phase}] = {r.units, r.calls};
  CostSnapshot out;
  for (const CostRow& r : after) {
    auto it = base.find({r.backend, r.kind, r.phase});
    const std::uint64_t u0 = it == base.end() ? 0 : it->second.first;
    const std::uint64_t c0 = it == base.end() ? 0 : it->second.second;
    if (r.units < u0 || r.calls < c0)
      throw std::invalid_argument("CostLedger::diff: counters went backwards");
    if (r.units != u0 || r.calls != c0)
      out.push_back({r.backend, r.kind, r.phase, r.units - u0, r.calls - c0});
  }
  return out;
}

ScalingReport fit_scaling(std::string variable,
                          const std::vector<ScalingPoint>& sweep) {
  const auto n = static_cast<Eigen::Index>(sweep.size());
  if (n < 4)
    throw std::invalid_argument("fit_scaling: needs at least 4 sweep points");
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const ScalingPoint& p = sweep[static_cast<std::size_t>(i)];
    if (!(p.value > 0) || !(p.charge > 0))
      throw std::invalid_argument(
          "fit_scaling: values and charges must be positive");
    a(i, 0) = std::log(p.value);
    a(i, 1) = 1.0;
    y(i) = std::log(p.charge);
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(y);
  ScalingReport report;
  report.variable = std::move(variable);
  report.points = sweep;
  report.slope = coef(0);
  report.intercept = coef(1);
  report.residual = std::sqrt((a * coef - y).squaredNorm() /
                              static_cast<double>(n));
  return report;
}

}  // namespace qsl
