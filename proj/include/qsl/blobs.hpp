#pragma once

#include <cstdint>
#include <vector>

#include "qsl/types.hpp"

namespace qsl {

// Output of the synthetic Gaussian-blob generator. `dataset` is the working
// sample (labeled rows first); `generating_labels` records the cluster that
// produced each row, including the unlabeled ones; `centers` are the exact
// cluster centers, so tests can compute separations directly.
struct BlobResult {
  Dataset dataset;
  std::vector<LabelId> generating_labels;
  PointMatrix centers;
};

// Deterministic blobs: k clusters of per_cluster points each in d dimensions,
// Gaussian with the given spread around centers placed from the seed (unit
// circle in the first two coordinates for d >= 2, unit spacing on a line for
// d == 1, plus a seed-dependent rotation/offset). Exactly
// ceil(labeled_fraction * N) points keep their generating label, chosen
// round-robin across clusters so labels cover all clusters whenever l >= k.
// Pure function of its arguments: repeat calls are byte-identical.
BlobResult generate_blobs(std::uint64_t seed, int k, int per_cluster, int dim,
                          double spread, double labeled_fraction);

// Minimal pairwise squared distance between blob centers.
double min_center_gap_sq(const PointMatrix& centers);

// Copy of ds with every point scaled to unit norm (zero rows are an error).
Dataset normalize_rows(const Dataset& ds);

}  // namespace qsl
