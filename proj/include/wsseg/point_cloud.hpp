#ifndef WSSEG_POINT_CLOUD_HPP
#define WSSEG_POINT_CLOUD_HPP

#include <cstdint>
#include <optional>

#include <Eigen/Core>

namespace wsseg {

using Matrix3Xu8 = Eigen::Matrix<std::uint8_t, 3, Eigen::Dynamic>;

// N points stored column-wise: positions (meters), RGB colors and an
// optional D x N feature block.
struct PointCloud {
  Eigen::Matrix3Xd positions;
  Matrix3Xu8 colors;
  std::optional<Eigen::MatrixXf> features;

  PointCloud() = default;
  explicit PointCloud(Eigen::Index n) : positions(3, n), colors(3, n) {
    positions.setZero();
    colors.setZero();
  }

  Eigen::Index size() const { return positions.cols(); }
  bool empty() const { return size() == 0; }

  // Throws DataError when column counts disagree or a coordinate is not
  // finite.
  void validate() const;
};

// Unit normals, one column per point. `curvature` holds the surface
// variation lambda_min / (lambda_0 + lambda_1 + lambda_2) when the normals
// were estimated from neighborhoods; analytic normals leave it empty.
struct NormalField {
  Eigen::Matrix3Xd normals;
  Eigen::VectorXd curvature;

  Eigen::Index size() const { return normals.cols(); }
};

// Rigid transform applied to every position (and optionally normals).
PointCloud transformed(const PointCloud& cloud, const Eigen::Matrix3d& rotation,
                       const Eigen::Vector3d& translation);

}  // namespace wsseg

#endif  // WSSEG_POINT_CLOUD_HPP
