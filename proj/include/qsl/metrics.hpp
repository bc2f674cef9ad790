#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace qsl {

// Exact squared L2 distance. Ground truth for every noisy oracle; always
// nonnegative, zero exactly for bitwise-equal inputs.
template <typename DerivedA, typename DerivedB>
double squared_euclidean(const Eigen::MatrixBase<DerivedA>& a,
                         const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("squared_euclidean: dimension mismatch");
  return (a.derived() - b.derived()).squaredNorm();
}

// Exact inner product <a, b>.
template <typename DerivedA, typename DerivedB>
double inner_product(const Eigen::MatrixBase<DerivedA>& a,
                     const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("inner_product: dimension mismatch");
  return a.derived().dot(b.derived());
}

}  // namespace qsl
