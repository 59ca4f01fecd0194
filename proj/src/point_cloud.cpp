#include "wsseg/point_cloud.hpp"

#include <string>

#include "wsseg/errors.hpp"
#include "wsseg/kd_tree.hpp"

namespace wsseg {

void PointCloud::validate() const {
  const auto n = size();
  if (colors.cols() != n)
    throw DataError("point cloud: " + std::to_string(colors.cols()) +
                    " colors for " + std::to_string(n) + " points");
  if (features && features->cols() != n)
    throw DataError("point cloud: " + std::to_string(features->cols()) +
                    " feature columns for " + std::to_string(n) + " points");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!positions.col(i).allFinite())
      throw DataError("point cloud: non-finite coordinate at point " +
                      std::to_string(i));
}

PointCloud transformed(const PointCloud& cloud, const Eigen::Matrix3d& rotation,
                       const Eigen::Vector3d& translation) {
  PointCloud out = cloud;
  out.positions = (rotation * cloud.positions).colwise() + translation;
  return out;
}

SpatialIndex build_index(const PointCloud& cloud) {
  return SpatialIndex(cloud.positions);
}

}  // namespace wsseg
