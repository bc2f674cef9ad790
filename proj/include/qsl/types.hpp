#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qsl {

// Dense real feature vector; all arithmetic goes through Eigen.
using FeatureVector = Eigen::VectorXd;

// Class labels are integers in [1, k]; 0 marks an unlabeled point.
using LabelId = int;
inline constexpr LabelId kUnlabeled = 0;

// Points are stored row-major so that point(i) is a contiguous column view,
// interchangeable with a FeatureVector in every metric kernel. Keeping one
// memory layout everywhere makes classical and simulated-quantum code paths
// produce bit-identical arithmetic.
using PointMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A fixed sample of N = l + u points. Rows 0..l-1 carry labels in [1, k],
// rows l..N-1 are unlabeled. Immutable after construction.
class Dataset {
 public:
  Dataset(PointMatrix points, std::vector<LabelId> labels,
          Eigen::Index labeled_count)
      : points_(std::move(points)),
        labels_(std::move(labels)),
        labeled_count_(labeled_count) {
    const Eigen::Index n = points_.rows();
    if (n < 1) throw std::invalid_argument("Dataset: needs at least one point");
    if (points_.cols() < 1)
      throw std::invalid_argument("Dataset: needs at least one feature");
    if (static_cast<Eigen::Index>(labels_.size()) != n)
      throw std::invalid_argument("Dataset: labels size does not match points");
    if (labeled_count_ < 0 || labeled_count_ > n)
      throw std::invalid_argument("Dataset: labeled_count out of range");
    if (!points_.allFinite())
      throw std::invalid_argument("Dataset: features must be finite");
    for (Eigen::Index i = 0; i < n; ++i) {
      const LabelId z = labels_[static_cast<std::size_t>(i)];
      if (i < labeled_count_ && z < 1)
        throw std::invalid_argument("Dataset: labeled row " + std::to_string(i) +
                                    " must carry a label >= 1");
      if (i >= labeled_count_ && z != kUnlabeled)
        throw std::invalid_argument("Dataset: unlabeled row " +
                                    std::to_string(i) + " must carry label 0");
    }
  }

  Eigen::Index size() const { return points_.rows(); }
  Eigen::Index dim() const { return points_.cols(); }
  Eigen::Index labeled_count() const { return labeled_count_; }
  Eigen::Index unlabeled_count() const { return size() - labeled_count_; }

  // Contiguous view of point i (no copy).
  Eigen::Map<const FeatureVector> point(Eigen::Index i) const {
    return {points_.row(i).data(), points_.cols()};
  }
  LabelId label(Eigen::Index i) const {
    return labels_.at(static_cast<std::size_t>(i));
  }

  const PointMatrix& points() const { return points_; }
  const std::vector<LabelId>& labels() const { return labels_; }

  LabelId max_label() const {
    LabelId m = 0;
    for (LabelId z : labels_) m = std::max(m, z);
    return m;
  }

 private:
  PointMatrix points_;
  std::vector<LabelId> labels_;
  Eigen::Index labeled_count_;
};

// Raised for malformed or unreadable input files.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qsl
