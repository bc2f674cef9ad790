#include "qsl/blobs.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "qsl/rng.hpp"

namespace qsl {

namespace {

PointMatrix place_centers(SplitMix64& rng, int k, int dim) {
  PointMatrix centers = PointMatrix::Zero(k, dim);
  if (dim == 1) {
    const double offset = rng.uniform01();
    for (int m = 0; m < k; ++m) centers(m, 0) = offset + m;
    return centers;
  }
  const double rotation = 2.0 * std::numbers::pi * rng.uniform01();
  for (int m = 0; m < k; ++m) {
    const double theta = rotation + 2.0 * std::numbers::pi * m / k;
    centers(m, 0) = std::cos(theta);
    centers(m, 1) = std::sin(theta);
  }
  return centers;
}

}  // namespace

BlobResult generate_blobs(std::uint64_t seed, int k, int per_cluster, int dim,
                          double spread, double labeled_fraction) {
  if (k < 1) throw std::invalid_argument("generate_blobs: k must be >= 1");
  if (per_cluster < 1)
    throw std::invalid_argument("generate_blobs: per_cluster must be >= 1");
  if (dim < 1) throw std::invalid_argument("generate_blobs: dim must be >= 1");
  if (!(spread > 0) || !std::isfinite(spread))
    throw std::invalid_argument("generate_blobs: spread must be positive");
  if (!(labeled_fraction >= 0.0) || !(labeled_fraction <= 1.0))
    throw std::invalid_argument(
        "generate_blobs: labeled_fraction must lie in [0, 1]");

  const Eigen::Index n = static_cast<Eigen::Index>(k) * per_cluster;
  const Eigen::Index labeled =
      static_cast<Eigen::Index>(std::ceil(labeled_fraction * static_cast<double>(n)));

  SplitMix64 center_rng = derive_stream(seed, "blobs.centers");
  const PointMatrix centers = place_centers(center_rng, k, dim);

  SplitMix64 point_rng = derive_stream(seed, "blobs.points");
  PointMatrix raw(n, dim);
  std::vector<LabelId> raw_label(static_cast<std::size_t>(n));
  for (int m = 0; m < k; ++m) {
    for (int p = 0; p < per_cluster; ++p) {
      const Eigen::Index row = static_cast<Eigen::Index>(m) * per_cluster + p;
      for (int c = 0; c < dim; ++c)
        raw(row, c) = centers(m, c) + spread * point_rng.gaussian();
      raw_label[static_cast<std::size_t>(row)] = m + 1;
    }
  }

  // Round-robin labeled picks: cluster 0 point 0, cluster 1 point 0, ...,
  // wrapping to each cluster's next point. Every cluster is represented
  // whenever labeled >= k.
  std::vector<char> picked(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> order;
  order.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < labeled; ++t) {
    const Eigen::Index m = t % k;
    const Eigen::Index p = t / k;
    const Eigen::Index row = m * per_cluster + p;
    picked[static_cast<std::size_t>(row)] = 1;
    order.push_back(row);
  }
  for (Eigen::Index row = 0; row < n; ++row)
    if (!picked[static_cast<std::size_t>(row)]) order.push_back(row);

  PointMatrix points(n, dim);
  std::vector<LabelId> labels(static_cast<std::size_t>(n), kUnlabeled);
  std::vector<LabelId> generating(static_cast<std::size_t>(n));
  for (Eigen::Index out_row = 0; out_row < n; ++out_row) {
    const Eigen::Index src = order[static_cast<std::size_t>(out_row)];
    points.row(out_row) = raw.row(src);
    generating[static_cast<std::size_t>(out_row)] =
        raw_label[static_cast<std::size_t>(src)];
    if (out_row < labeled)
      labels[static_cast<std::size_t>(out_row)] =
          raw_label[static_cast<std::size_t>(src)];
  }

  return {Dataset(std::move(points), std::move(labels), labeled),
          std::move(generating), centers};
}

double min_center_gap_sq(const PointMatrix& centers) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < centers.rows(); ++a)
    for (Eigen::Index b = a + 1; b < centers.rows(); ++b)
      best = std::min(best, (centers.row(a) - centers.row(b)).squaredNorm());
  return best;
}

Dataset normalize_rows(const Dataset& ds) {
  PointMatrix points = ds.points();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double norm = points.row(i).norm();
    if (!(norm > 0))
      throw std::invalid_argument("normalize_rows: zero-norm row");
    points.row(i) /= norm;
  }
  return Dataset(std::move(points), ds.labels(), ds.labeled_count());
}

}  // namespace qsl
