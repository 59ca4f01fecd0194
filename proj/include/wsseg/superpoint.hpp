#ifndef WSSEG_SUPERPOINT_HPP
#define WSSEG_SUPERPOINT_HPP

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wsseg/kd_tree.hpp"
#include "wsseg/point_cloud.hpp"

namespace wsseg {

// Disjoint cover of {0..N-1}; ids dense in [0, segment_count).
class SuperpointPartition {
 public:
  SuperpointPartition() = default;

  // Throws DataError unless ids are dense in [0, max id].
  static SuperpointPartition from_assignment(Eigen::VectorXi assignment);

  Eigen::Index point_count() const { return assignment_.size(); }
  int segment_count() const { return static_cast<int>(segments_.size()); }
  const Eigen::VectorXi& assignment() const { return assignment_; }
  const std::vector<std::vector<Eigen::Index>>& segments() const { return segments_; }
  const std::vector<Eigen::Index>& segment(int id) const {
    return segments_[static_cast<std::size_t>(id)];
  }

  friend bool operator==(const SuperpointPartition& a, const SuperpointPartition& b) {
    return a.assignment_.size() == b.assignment_.size() && a.assignment_ == b.assignment_;
  }

 private:
  Eigen::VectorXi assignment_;
  std::vector<std::vector<Eigen::Index>> segments_;
};

struct OversegmentParams {
  double angle_threshold_deg = 15.0;
  int adjacency_k = 10;
  int min_size = 20;
  double edge_length_percentile = 95.0;
  // Points whose surface variation exceeds this join a segment but do not
  // flood further. Ignored when the normal field carries no curvature.
  double max_curvature = 0.05;
};

// Region growing over the adjacency_k-NN graph. An edge floods when its
// endpoint normals (taken as unoriented lines) differ by at most the angle
// threshold and its length is within the percentile gate. Seeds go in
// ascending point order; high-curvature points never spread. Segments below
// min_size are then merged into the neighbor sharing the most graph edges
// (lower id on ties).
SuperpointPartition oversegment(const PointCloud& cloud, const NormalField& normals,
                                const SpatialIndex& index,
                                const OversegmentParams& params = {});

struct PartitionStats {
  int segment_count = 0;
  std::map<Eigen::Index, int> size_histogram;  // size -> number of segments
  Eigen::Index min_size = 0;
  Eigen::Index median_size = 0;  // lower median
  Eigen::Index max_size = 0;
};

PartitionStats partition_stats(const SuperpointPartition& partition);

// {"n": N, "u": U, "assignment": [ids]}
SuperpointPartition read_partition_json(const std::string& path);
void write_partition_json(const SuperpointPartition& partition, const std::string& path);

}  // namespace wsseg

#endif  // WSSEG_SUPERPOINT_HPP
