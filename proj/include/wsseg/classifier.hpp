#ifndef WSSEG_CLASSIFIER_HPP
#define WSSEG_CLASSIFIER_HPP

#include <memory>
#include <optional>

#include "wsseg/errors.hpp"
#include "wsseg/kd_tree.hpp"
#include "wsseg/labels.hpp"
#include "wsseg/point_cloud.hpp"

namespace wsseg {

class NotFittedError : public Error {
 public:
  NotFittedError() : Error("classifier used before fit") {}
};

struct Prediction {
  LabelField labels;  // no unlabeled entries
  ConfidenceField confidence;
};

// Seat for the point classifier trained during self-training. fit() must
// only learn from labeled points; predict() labels every point.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void fit(const PointCloud& cloud, const LabelField& labels) = 0;
  virtual Prediction predict(const PointCloud& cloud) const = 0;
  virtual bool fitted() const = 0;
};

struct KnnClassifierParams {
  int neighbors = 15;
  double color_weight = 0.5;  // applied to colors scaled into [0, 1]
  double distance_epsilon = 1e-6;
};

// Distance-weighted k-NN vote in (position, color_weight * rgb/255) space.
class KnnClassifier final : public Classifier {
 public:
  using Features = Eigen::Matrix<double, 6, Eigen::Dynamic>;

  explicit KnnClassifier(KnnClassifierParams params = {});

  void fit(const PointCloud& cloud, const LabelField& labels) override;
  Prediction predict(const PointCloud& cloud) const override;
  bool fitted() const override { return tree_.has_value(); }

  Eigen::Index exemplar_count() const { return tree_ ? tree_->size() : 0; }
  const KnnClassifierParams& params() const { return params_; }

  Features features(const PointCloud& cloud) const;

 private:
  KnnClassifierParams params_;
  std::optional<KdTree<6>> tree_;
  Eigen::VectorXi exemplar_labels_;
  int num_classes_ = 0;
};

}  // namespace wsseg

#endif  // WSSEG_CLASSIFIER_HPP
