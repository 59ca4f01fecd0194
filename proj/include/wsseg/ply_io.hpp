#ifndef WSSEG_PLY_IO_HPP
#define WSSEG_PLY_IO_HPP

#include <optional>
#include <string>

#include "wsseg/labels.hpp"
#include "wsseg/point_cloud.hpp"

namespace wsseg {

struct PlyData {
  PointCloud cloud;
  // Raw 16-bit `label` channel when the file has one (65535 = unlabeled).
  std::optional<Eigen::Matrix<std::uint16_t, Eigen::Dynamic, 1>> labels;
};

// Reads ascii or binary_little_endian PLY with float x,y,z and uchar
// red,green,blue vertex properties. Other scalar vertex properties are
// skipped; elements after `vertex` are ignored.
PlyData read_ply(const std::string& path);
PointCloud load_ply(const std::string& path);

// Always binary_little_endian. With labels, appends `property ushort label`.
void save_ply(const PointCloud& cloud, const std::string& path);
void save_ply(const PointCloud& cloud, const LabelField& labels,
              const std::string& path);

LabelField labels_from_ply(const PlyData& data, int num_classes,
                           const std::string& path);

}  // namespace wsseg

#endif  // WSSEG_PLY_IO_HPP
