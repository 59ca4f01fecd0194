#ifndef WSSEG_METRICS_HPP
#define WSSEG_METRICS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "wsseg/labels.hpp"

namespace wsseg {

// Rows are ground truth, columns prediction. Points unlabeled in either
// field land in `ignored`.
struct ConfusionMatrix {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
  std::int64_t ignored = 0;

  std::int64_t counted() const { return counts.sum(); }
};

ConfusionMatrix confusion(const LabelField& pred, const LabelField& gt);

struct SegmentationScore {
  double miou = 0.0;
  double macc = 0.0;
  // nullopt for classes absent from both prediction and ground truth.
  std::vector<std::optional<double>> per_class_iou;
  // nullopt for classes absent from ground truth.
  std::vector<std::optional<double>> per_class_recall;
};

// Throws DataError when no class occurs in either field.
SegmentationScore miou(const ConfusionMatrix& cm);

inline SegmentationScore score(const LabelField& pred, const LabelField& gt) {
  return miou(confusion(pred, gt));
}

struct ConfidenceBin {
  double lower = 0.0, upper = 0.0;  // [lower, upper), last bin closed
  std::int64_t count = 0;
  std::optional<double> accuracy;  // nullopt when the bin is empty
  double share = 0.0;              // count / all scored points
};

// Points unlabeled in `labels` or `gt` are skipped. Edges must be strictly
// increasing with edges.front() <= 0 and edges.back() >= 1.
std::vector<ConfidenceBin> confidence_bins(const LabelField& labels,
                                           const ConfidenceField& confidence,
                                           const LabelField& gt,
                                           const std::vector<double>& edges);

// {0, q_1, ..., q_{bins-1}, 1} over the confidences of labeled points, with
// duplicate edges collapsed.
std::vector<double> quantile_edges(const LabelField& labels, const ConfidenceField& confidence,
                                   int bins);

// Non-unlabeled fraction; 0 for an empty field.
double labeled_rate(const LabelField& labels);

nlohmann::json score_to_json(const SegmentationScore& s,
                             const std::vector<std::string>& class_names);
// Aligned per-class IoU/recall table with a trailing mean row.
std::string score_to_table(const SegmentationScore& s,
                           const std::vector<std::string>& class_names);

}  // namespace wsseg

#endif  // WSSEG_METRICS_HPP
