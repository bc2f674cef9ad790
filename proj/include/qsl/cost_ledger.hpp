#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace qsl {

enum class Backend { classical, quantum };
enum class CostKind { memory_access, algorithmic };

const char* to_string(Backend b);
const char* to_string(CostKind k);

// One counter value at snapshot time. Snapshots are sorted by
// (backend, kind, phase) so their serialization order is stable.
struct CostRow {
  Backend backend;
  CostKind kind;
  std::string phase;
  std::uint64_t units = 0;
  std::uint64_t calls = 0;

  friend bool operator==(const CostRow&, const CostRow&) = default;
};
using CostSnapshot = std::vector<CostRow>;

// Opaque index of a registered (backend, kind, phase) counter; charging by
// handle is lock-free, suited to per-estimate hot loops.
using PhaseHandle = std::size_t;

// Abstract cost accounting. Counters are keyed by backend (classical vs
// quantum), kind (memory access vs algorithmic work) and a registered phase
// tag; they hold integer units plus a call count and only ever increase.
// Charging an unregistered phase by name is a contract violation.
class CostLedger {
 public:
  CostLedger() = default;
  CostLedger(const CostLedger&) = delete;
  CostLedger& operator=(const CostLedger&) = delete;

  // Idempotent: re-registering a known phase returns its existing handle.
  PhaseHandle register_phase(Backend b, CostKind k, std::string_view phase);

  bool is_registered(Backend b, CostKind k, std::string_view phase) const;

  // units += amount, calls += 1. amount may be zero (the call is still
  // counted as an event; the cost counters are untouched).
  void charge(PhaseHandle h, std::uint64_t amount);
  void charge(Backend b, CostKind k, std::string_view phase,
              std::uint64_t amount);

  std::uint64_t units(Backend b, CostKind k, std::string_view phase) const;
  std::uint64_t calls(Backend b, CostKind k, std::string_view phase) const;
  std::uint64_t total_units(Backend b, CostKind k) const;

  CostSnapshot snapshot() const;

  // Per-key difference after - before; every counter must be monotone.
  static CostSnapshot diff(const CostSnapshot& before,
                           const CostSnapshot& after);

 private:
  struct Counter {
    std::atomic<std::uint64_t> units{0};
    std::atomic<std::uint64_t> calls{0};
  };
  using Key = std::tuple<int, int, std::string>;

  const Counter* find(Backend b, CostKind k, std::string_view phase) const;

  mutable std::mutex mutex_;                    // guards the registry only
  std::map<Key, PhaseHandle> index_;
  std::deque<Counter> counters_;                // stable addresses
  std::vector<std::tuple<Backend, CostKind, std::string>> keys_;
};

// One sweep point: the swept variable's value and the measured charge.
struct ScalingPoint {
  double value = 0;
  double charge = 0;
};

// Least-squares fit of log(charge) against log(value).
struct ScalingReport {
  std::string variable;
  std::vector<ScalingPoint> points;
  double slope = 0;
  double intercept = 0;
  double residual = 0;  // RMS of log-space fit residuals
};

// Requires at least 4 points, all values and charges positive.
ScalingReport fit_scaling(std::string variable,
                          const std::vector<ScalingPoint>& sweep);

}  // namespace qsl
