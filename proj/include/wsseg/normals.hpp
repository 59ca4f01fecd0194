#ifndef WSSEG_NORMALS_HPP
#define WSSEG_NORMALS_HPP

#include <Eigen/Core>

#include "wsseg/kd_tree.hpp"
#include "wsseg/point_cloud.hpp"

namespace wsseg {

inline constexpr int kDefaultNormalNeighbors = 16;
inline constexpr double kEigenTieTolerance = 1e-12;

// Flips `n` so its largest-magnitude component is positive (first such
// component on exact ties).
Eigen::Vector3d canonical_sign(const Eigen::Vector3d& n);

// Smallest-eigenvalue eigenvector of a symmetric 3x3 covariance. When
// several eigenvalues lie within kEigenTieTolerance of the smallest, the
// candidate with lexicographically largest (|x|,|y|,|z|) wins. Result is
// unit length with canonical sign.
Eigen::Vector3d smallest_eigenvector(const Eigen::Matrix3d& covariance);

// PCA normal per point over its k nearest neighbors (the point included).
// Throws std::invalid_argument when k < 3 or k > N.
NormalField estimate_normals(const PointCloud& cloud, const SpatialIndex& index,
                             int k = kDefaultNormalNeighbors);

}  // namespace wsseg

#endif  // WSSEG_NORMALS_HPP
