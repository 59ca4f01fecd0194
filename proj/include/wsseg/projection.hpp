#ifndef WSSEG_PROJECTION_HPP
#define WSSEG_PROJECTION_HPP

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wsseg/camera.hpp"
#include "wsseg/labels.hpp"
#include "wsseg/point_cloud.hpp"
#include "wsseg/tensor_io.hpp"

namespace wsseg {

// N x C per-point class scores. Masked-out entries hold kMaskedLogit.
using LogitField = RowMatrixXf;
inline constexpr float kMaskedLogit = std::numeric_limits<float>::lowest();

using SceneMask = Eigen::Array<bool, Eigen::Dynamic, 1>;

struct TextEmbeddings {
  RowMatrixXf prototypes;  // C x d
  std::vector<std::string> class_names;
};

struct AggregateOptions {
  // Off by default: only the image-grid gate applies. When on, a point is
  // counted only if its depth is within `depth_tolerance` of the nearest
  // point projecting to the same pixel.
  bool depth_test = false;
  double depth_tolerance = 0.02;
};

struct Aggregate {
  RowMatrixXf values;        // N x channels, mean over correspondences
  Eigen::VectorXi hit_count;  // correspondences per point
};

Aggregate aggregate_views(const PointCloud& cloud, const std::vector<CameraView>& views,
                          const AggregateOptions& options = {});

LogitField compute_logits(const RowMatrixXf& embeddings, const TextEmbeddings& text);

LogitField apply_scene_mask(const LogitField& logits, const SceneMask& mask);

struct PseudoLabels {
  LabelField labels;
  ConfidenceField confidence;
};

// Softmax over unmasked entries per row; label is the argmax (lowest id on
// ties) and confidence its probability. Throws DataError naming the first
// fully masked row.
PseudoLabels rank_to_pseudo_labels(const LogitField& filtered);

// Marks points with no view correspondence as unlabeled, confidence 0.
void drop_unobserved(PseudoLabels& pseudo, const Eigen::VectorXi& hit_count);

}  // namespace wsseg

#endif  // WSSEG_PROJECTION_HPP
