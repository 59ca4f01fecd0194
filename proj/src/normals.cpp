#include "wsseg/normals.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "wsseg/symmetric_eigen.hpp"

namespace wsseg {

Eigen::Vector3d canonical_sign(const Eigen::Vector3d& n) {
  Eigen::Index dominant = 0;
  n.cwiseAbs().maxCoeff(&dominant);
  return n[dominant] < 0.0 ? Eigen::Vector3d(-n) : n;
}

namespace {

bool lexicographically_larger(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  for (int i = 0; i < 3; ++i) {
    const double x = std::abs(a[i]), y = std::abs(b[i]);
    if (x != y) return x > y;
  }
  return false;
}

Eigen::Vector3d pick_smallest(const SymmetricEigen3<double>& eig) {
  Eigen::Vector3d best = eig.vectors.col(0).normalized();
  for (int i = 1; i < 3; ++i) {
    if (eig.values[i] - eig.values[0] > kEigenTieTolerance) break;
    const Eigen::Vector3d cand = eig.vectors.col(i).normalized();
    if (lexicographically_larger(cand, best)) best = cand;
  }
  return canonical_sign(best);
}

}  // namespace

Eigen::Vector3d smallest_eigenvector(const Eigen::Matrix3d& covariance) {
  return pick_smallest(jacobi_eigen3<double>(covariance, kEigenTieTolerance, 50));
}

NormalField estimate_normals(const PointCloud& cloud, const SpatialIndex& index,
                             int k) {
  const Eigen::Index n = cloud.size();
  if (k < 3) throw std::invalid_argument("estimate_normals: k must be >= 3");
  if (k > n)
    throw std::invalid_argument("estimate_normals: k=" + std::to_string(k) +
                                " exceeds point count " + std::to_string(n));
  NormalField out;
  out.normals.resize(3, n);
  out.curvature.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto nbrs = index.k_nearest(cloud.positions.col(i), k);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& nb : nbrs) mean += cloud.positions.col(nb.index);
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& nb : nbrs) {
      const Eigen::Vector3d d = cloud.positions.col(nb.index) - mean;
      cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(nbrs.size());
    const auto eig = jacobi_eigen3<double>(cov, kEigenTieTolerance, 50);
    out.normals.col(i) = pick_smallest(eig);
    const double trace = eig.values.sum();
    out.curvature[i] = trace > 0.0 ? std::max(0.0, eig.values[0]) / trace : 0.0;
  }
  return out;
}

}  // namespace wsseg
