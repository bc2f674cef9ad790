#include "qsl/qram.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qsl {

QramStore::QramStore(Eigen::Index dim, CostLedger& ledger,
                     std::optional<double> lambda_override)
    : dim_(dim), ledger_(&ledger), lambda_override_(lambda_override) {
  if (dim_ < 1) throw std::invalid_argument("QramStore: dim must be >= 1");
  if (lambda_override_ && !(*lambda_override_ > 0))
    throw std::invalid_argument("QramStore: lambda override must be positive");
  mutate_quantum_ = ledger_->register_phase(Backend::quantum,
                                            CostKind::memory_access, "qram.mutate");
  mutate_classical_ = ledger_->register_phase(
      Backend::classical, CostKind::memory_access, "qram.mutate.classical");
  query_quantum_ = ledger_->register_phase(Backend::quantum,
                                           CostKind::algorithmic, "qram.query");
  sample_quantum_ = ledger_->register_phase(Backend::quantum,
                                            CostKind::algorithmic, "qram.sample");
}

QramStore QramStore::from_points(const PointMatrix& points, CostLedger& ledger,
                                 std::optional<double> lambda_override) {
  QramStore store(points.cols(), ledger, lambda_override);
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    store.insert_row(points.row(i).transpose());
  return store;
}

QramStore QramStore::from_dataset(const Dataset& ds, CostLedger& ledger,
                                  std::optional<double> lambda_override) {
  return from_points(ds.points(), ledger, lambda_override);
}

void QramStore::check_row(Eigen::Index i) const {
  if (i < 0 || i >= rows())
    throw std::out_of_range("QramStore: row index " + std::to_string(i) +
                            " out of range [0, " + std::to_string(rows()) + ")");
}

void QramStore::set_leaf(Eigen::Index i, double squared_norm) {
  Eigen::Index node = capacity_ + i;
  tree_[static_cast<std::size_t>(node)] = squared_norm;
  for (node /= 2; node >= 1; node /= 2) {
    const std::size_t p = static_cast<std::size_t>(node);
    tree_[p] = tree_[2 * p] + tree_[2 * p + 1];
  }
}

void QramStore::rebuild_tree() {
  const Eigen::Index n = rows();
  capacity_ = static_cast<Eigen::Index>(
      std::bit_ceil(static_cast<std::uint64_t>(std::max<Eigen::Index>(n, 1))));
  tree_.assign(static_cast<std::size_t>(2 * capacity_), 0.0);
  // Leaves always hold the row's squaredNorm() so that every mutation path
  // writes bitwise-identical values for identical rows.
  for (Eigen::Index i = 0; i < n; ++i)
    tree_[static_cast<std::size_t>(capacity_ + i)] =
        rows_[static_cast<std::size_t>(i)].squaredNorm();
  for (Eigen::Index p = capacity_ - 1; p >= 1; --p) {
    const std::size_t q = static_cast<std::size_t>(p);
    tree_[q] = tree_[2 * q] + tree_[2 * q + 1];
  }
}

void QramStore::charge_mutation(Eigen::Index entries, Eigen::Index n_for_charge) {
  const std::uint64_t per_entry = ceil_log2(
      static_cast<std::uint64_t>(n_for_charge) * static_cast<std::uint64_t>(dim_));
  const std::uint64_t classical_per_entry =
      static_cast<std::uint64_t>(n_for_charge) * static_cast<std::uint64_t>(dim_);
  for (Eigen::Index e = 0; e < entries; ++e) {
    ledger_->charge(mutate_quantum_, per_entry);
    ledger_->charge(mutate_classical_, classical_per_entry);
  }
}

Eigen::Index QramStore::insert_row(const Eigen::Ref<const FeatureVector>& v) {
  if (v.size() != dim_)
    throw std::invalid_argument("QramStore::insert_row: dimension mismatch");
  if (!v.allFinite())
    throw std::invalid_argument("QramStore::insert_row: entries must be finite");
  rows_.emplace_back(v);
  const double sq = rows_.back().squaredNorm();
  norms_.push_back(std::sqrt(sq));
  const Eigen::Index n = rows();
  if (n > capacity_) {
    rebuild_tree();
  } else {
    set_leaf(n - 1, sq);
  }
  charge_mutation(dim_, n);  // one unit per entry, N after the insert
  return n - 1;
}

void QramStore::update_entry(Eigen::Index i, Eigen::Index j, double value) {
  check_row(i);
  if (j < 0 || j >= dim_)
    throw std::out_of_range("QramStore::update_entry: column " +
                            std::to_string(j) + " out of range");
  if (!std::isfinite(value))
    throw std::invalid_argument("QramStore::update_entry: value must be finite");
  rows_[static_cast<std::size_t>(i)](j) = value;
  const double sq = rows_[static_cast<std::size_t>(i)].squaredNorm();
  norms_[static_cast<std::size_t>(i)] = std::sqrt(sq);
  set_leaf(i, sq);
  charge_mutation(1, rows());
}

void QramStore::delete_row(Eigen::Index i) {
  check_row(i);
  charge_mutation(dim_, rows());  // N before the delete
  rows_.erase(rows_.begin() + i);
  norms_.erase(norms_.begin() + i);
  rebuild_tree();
}

QramStore::RowQuery QramStore::query_row(Eigen::Index i) const {
  check_row(i);
  ledger_->charge(query_quantum_,
                  static_cast<std::uint64_t>(std::ceil(lambda())));
  return {row_values(i), norms_[static_cast<std::size_t>(i)]};
}

Eigen::Index QramStore::sample_row_index(SplitMix64& rng) const {
  if (rows() == 0)
    throw std::domain_error("QramStore::sample_row_index: store is empty");
  const double root = norm_tree_root();
  if (!(root > 0))
    throw std::domain_error(
        "QramStore::sample_row_index: all rows have zero norm");
  ledger_->charge(sample_quantum_,
                  static_cast<std::uint64_t>(std::ceil(lambda())));
  double r = rng.uniform01() * root;
  Eigen::Index node = 1;
  while (node < capacity_) {
    const double left = tree_[static_cast<std::size_t>(2 * node)];
    if (r < left) {
      node = 2 * node;
    } else {
      r -= left;
      node = 2 * node + 1;
    }
  }
  Eigen::Index idx = node - capacity_;
  // Floating-point edge: r can fall past the last positive leaf. Snap to the
  // nearest earlier row with positive norm.
  if (idx >= rows()) idx = rows() - 1;
  while (idx > 0 && norms_[static_cast<std::size_t>(idx)] == 0.0) --idx;
  return idx;
}

Eigen::Map<const FeatureVector> QramStore::row_values(Eigen::Index i) const {
  check_row(i);
  const FeatureVector& row = rows_[static_cast<std::size_t>(i)];
  return {row.data(), row.size()};
}

double QramStore::row_norm(Eigen::Index i) const {
  check_row(i);
  return norms_[static_cast<std::size_t>(i)];
}

double QramStore::max_row_norm() const {
  double m = 0;
  for (double n : norms_) m = std::max(m, n);
  return m;
}

double QramStore::lambda() const {
  if (lambda_override_) return *lambda_override_;
  const std::uint64_t nd = static_cast<std::uint64_t>(std::max<Eigen::Index>(rows(), 1)) *
                           static_cast<std::uint64_t>(dim_);
  return static_cast<double>(std::max<std::uint64_t>(1, ceil_log2(nd)));
}

std::uint64_t QramStore::entry_mutation_cost() const {
  return ceil_log2(static_cast<std::uint64_t>(rows()) *
                   static_cast<std::uint64_t>(dim_));
}

double QramStore::norm_tree_root() const {
  return capacity_ >= 1 ? tree_[1] : 0.0;
}

int QramStore::norm_tree_depth() const {
  return static_cast<int>(ceil_log2(static_cast<std::uint64_t>(
      std::max<Eigen::Index>(rows(), 1))));
}

}  // namespace qsl
