#include "wsseg/classifier.hpp"

#include <stdexcept>
#include <vector>

namespace wsseg {

KnnClassifier::KnnClassifier(KnnClassifierParams params) : params_(params) {
  if (params_.neighbors < 1) throw std::invalid_argument("KnnClassifier: neighbors must be >= 1");
  if (params_.color_weight < 0.0)
    throw std::invalid_argument("KnnClassifier: color weight must be >= 0");
  if (!(params_.distance_epsilon > 0.0))
    throw std::invalid_argument("KnnClassifier: distance epsilon must be > 0");
}

KnnClassifier::Features KnnClassifier::features(const PointCloud& cloud) const {
  Features f(6, cloud.size());
  f.topRows<3>() = cloud.positions;
  f.bottomRows<3>() = cloud.colors.cast<double>() * (params_.color_weight / 255.0);
  return f;
}

void KnnClassifier::fit(const PointCloud& cloud, const LabelField& labels) {
  if (labels.size() != cloud.size())
    throw DataError("KnnClassifier::fit: " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(cloud.size()) + " points");
  const Eigen::Index n = labels.labeled_count();
  if (n == 0) throw DataError("KnnClassifier::fit: no labeled points");
  const Features all = features(cloud);
  Features kept(6, n);
  exemplar_labels_.resize(n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (!labels.is_labeled(i)) continue;
    kept.col(k) = all.col(i);
    exemplar_labels_[k++] = labels[i];
  }
  num_classes_ = labels.num_classes;
  tree_.emplace(std::move(kept));
}

Prediction KnnClassifier::predict(const PointCloud& cloud) const {
  if (!tree_) throw NotFittedError();
  const Features query = features(cloud);
  Prediction out{LabelField(cloud.size(), num_classes_), ConfidenceField(cloud.size())};
  std::vector<double> votes(static_cast<std::size_t>(num_classes_));
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    std::fill(votes.begin(), votes.end(), 0.0);
    double total = 0.0;
    for (const auto& nb : tree_->k_nearest(query.col(i), params_.neighbors)) {
      const double w = 1.0 / (std::sqrt(nb.squared_distance) + params_.distance_epsilon);
      votes[static_cast<std::size_t>(exemplar_labels_[nb.index])] += w;
      total += w;
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
      if (votes[c] > votes[best]) best = c;
    out.labels[i] = static_cast<int>(best);
    out.confidence[i] = static_cast<float>(votes[best] / total);
  }
  return out;
}

}  // namespace wsseg
