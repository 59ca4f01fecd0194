#include "wsseg/projection.hpp"

#include <cmath>
#include <string>

#include "wsseg/errors.hpp"

namespace wsseg {

void CameraView::validate() const {
  if (!camera.is_valid())
    throw DataError("camera view: rotation not orthonormal or intrinsics malformed");
  if (camera.width <= 0 || camera.height <= 0)
    throw DataError("camera view: non-positive image size");
  const Eigen::Index pixels = Eigen::Index{camera.width} * camera.height;
  if (payload.rows() != pixels)
    throw DataError("camera view: payload has " + std::to_string(payload.rows()) +
                    " rows, expected " + std::to_string(pixels));
}

namespace {

// Smallest depth landing on each pixel, +inf where nothing lands.
Eigen::VectorXd depth_buffer(const PointCloud& cloud, const PinholeCamera<double>& cam) {
  Eigen::VectorXd zbuf = Eigen::VectorXd::Constant(Eigen::Index{cam.width} * cam.height,
                                                   std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const auto proj = project_point<double>(cloud.positions.col(i), cam);
    if (!proj) continue;
    const auto px = pixel_index(proj->pixel, cam);
    if (px && proj->depth < zbuf[*px]) zbuf[*px] = proj->depth;
  }
  return zbuf;
}

}  // namespace

Aggregate aggregate_views(const PointCloud& cloud, const std::vector<CameraView>& views,
                          const AggregateOptions& options) {
  const Eigen::Index n = cloud.size();
  Eigen::Index channels = 0;
  for (std::size_t v = 0; v < views.size(); ++v) {
    views[v].validate();
    if (v == 0) {
      channels = views[v].channels();
      continue;
    }
    if (views[v].kind != views[0].kind)
      throw DataError("aggregate_views: view " + std::to_string(v) +
                      " mixes logit and embedding payloads");
    if (views[v].channels() != channels)
      throw DataError("aggregate_views: view " + std::to_string(v) + " has " +
                      std::to_string(views[v].channels()) + " channels, expected " +
                      std::to_string(channels));
  }

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(channels, n);  // column per point
  Eigen::VectorXi hits = Eigen::VectorXi::Zero(n);
  for (const auto& view : views) {
    Eigen::VectorXd zbuf;
    if (options.depth_test) zbuf = depth_buffer(cloud, view.camera);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto proj = project_point<double>(cloud.positions.col(i), view.camera);
      if (!proj) continue;
      const auto px = pixel_index(proj->pixel, view.camera);
      if (!px) continue;
      if (options.depth_test && proj->depth > zbuf[*px] + options.depth_tolerance) continue;
      sum.col(i) += view.payload.row(*px).transpose().cast<double>();
      ++hits[i];
    }
  }

  Aggregate out;
  out.values.resize(n, channels);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (hits[i] > 0)
      out.values.row(i) = (sum.col(i) / hits[i]).transpose().cast<float>();
    else
      out.values.row(i).setZero();
  }
  out.hit_count = std::move(hits);
  return out;
}

LogitField compute_logits(const RowMatrixXf& embeddings, const TextEmbeddings& text) {
  if (text.prototypes.rows() != static_cast<Eigen::Index>(text.class_names.size()))
    throw DataError("text embeddings: " + std::to_string(text.prototypes.rows()) +
                    " prototypes for " + std::to_string(text.class_names.size()) +
                    " class names");
  if (embeddings.cols() != text.prototypes.cols())
    throw DataError("compute_logits: embedding dimension " +
                    std::to_string(embeddings.cols()) + " != prototype dimension " +
                    std::to_string(text.prototypes.cols()));
  return (embeddings.cast<double>() * text.prototypes.cast<double>().transpose())
      .cast<float>();
}

LogitField apply_scene_mask(const LogitField& logits, const SceneMask& mask) {
  if (mask.size() != logits.cols())
    throw DataError("apply_scene_mask: mask has " + std::to_string(mask.size()) +
                    " classes, logits have " + std::to_string(logits.cols()));
  if (!mask.any()) throw DataError("apply_scene_mask: scene mask has no present class");
  LogitField out = logits;
  for (Eigen::Index c = 0; c < mask.size(); ++c)
    if (!mask[c]) out.col(c).setConstant(kMaskedLogit);
  return out;
}

PseudoLabels rank_to_pseudo_labels(const LogitField& filtered) {
  const Eigen::Index n = filtered.rows(), classes = filtered.cols();
  PseudoLabels out{LabelField(n, static_cast<int>(classes)), ConfidenceField(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = -1;
    double best_logit = 0.0;
    for (Eigen::Index c = 0; c < classes; ++c) {
      const float v = filtered(i, c);
      if (v == kMaskedLogit) continue;
      if (best < 0 || v > best_logit) {
        best = static_cast<int>(c);
        best_logit = v;
      }
    }
    if (best < 0) throw DataError("point " + std::to_string(i) + " has every class masked");
    double denom = 0.0;
    for (Eigen::Index c = 0; c < classes; ++c) {
      const float v = filtered(i, c);
      if (v != kMaskedLogit) denom += std::exp(static_cast<double>(v) - best_logit);
    }
    out.labels[i] = best;
    out.confidence[i] = static_cast<float>(1.0 / denom);
  }
  return out;
}

void drop_unobserved(PseudoLabels& pseudo, const Eigen::VectorXi& hit_count) {
  if (hit_count.size() != pseudo.labels.size())
    throw DataError("drop_unobserved: hit_count length mismatch");
  for (Eigen::Index i = 0; i < hit_count.size(); ++i) {
    if (hit_count[i] == 0) {
      pseudo.labels[i] = kUnlabeled;
      pseudo.confidence[i] = 0.0f;
    }
  }
}

}  // namespace wsseg
