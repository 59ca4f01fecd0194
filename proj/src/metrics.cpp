#include "wsseg/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "wsseg/errors.hpp"

namespace wsseg {

ConfusionMatrix confusion(const LabelField& pred, const LabelField& gt) {
  if (pred.size() != gt.size())
    throw DataError("confusion: " + std::to_string(pred.size()) + " predictions vs " +
                    std::to_string(gt.size()) + " ground-truth labels");
  if (pred.num_classes != gt.num_classes)
    throw DataError("confusion: class count mismatch " + std::to_string(pred.num_classes) +
                    " vs " + std::to_string(gt.num_classes));
  ConfusionMatrix cm;
  cm.counts.setZero(gt.num_classes, gt.num_classes);
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (!pred.is_labeled(i) || !gt.is_labeled(i)) {
      ++cm.ignored;
      continue;
    }
    ++cm.counts(gt[i], pred[i]);
  }
  return cm;
}

SegmentationScore miou(const ConfusionMatrix& cm) {
  const Eigen::Index c = cm.counts.rows();
  SegmentationScore s;
  s.per_class_iou.resize(static_cast<std::size_t>(c));
  s.per_class_recall.resize(static_cast<std::size_t>(c));
  double iou_sum = 0.0, recall_sum = 0.0;
  int iou_n = 0, recall_n = 0;
  for (Eigen::Index k = 0; k < c; ++k) {
    const auto tp = static_cast<double>(cm.counts(k, k));
    const auto gt_total = static_cast<double>(cm.counts.row(k).sum());
    const auto pred_total = static_cast<double>(cm.counts.col(k).sum());
    if (gt_total == 0.0 && pred_total == 0.0) continue;
    const double iou = tp / (gt_total + pred_total - tp);
    s.per_class_iou[static_cast<std::size_t>(k)] = iou;
    iou_sum += iou;
    ++iou_n;
    if (gt_total > 0.0) {
      const double recall = tp / gt_total;
      s.per_class_recall[static_cast<std::size_t>(k)] = recall;
      recall_sum += recall;
      ++recall_n;
    }
  }
  if (iou_n == 0) throw DataError("miou: no class present in prediction or ground truth");
  s.miou = iou_sum / iou_n;
  s.macc = recall_n > 0 ? recall_sum / recall_n : 0.0;
  return s;
}

std::vector<ConfidenceBin> confidence_bins(const LabelField& labels,
                                           const ConfidenceField& confidence,
                                           const LabelField& gt,
                                           const std::vector<double>& edges) {
  if (labels.size() != confidence.size() || labels.size() != gt.size())
    throw DataError("confidence_bins: length mismatch");
  if (edges.size() < 2 || edges.front() > 0.0 || edges.back() < 1.0)
    throw std::invalid_argument("confidence_bins: edges must cover [0, 1]");
  for (std::size_t k = 1; k < edges.size(); ++k)
    if (!(edges[k] > edges[k - 1]))
      throw std::invalid_argument("confidence_bins: edges must be strictly increasing");

  const std::size_t bins = edges.size() - 1;
  std::vector<ConfidenceBin> out(bins);
  std::vector<std::int64_t> correct(bins, 0);
  std::int64_t total = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (!labels.is_labeled(i) || !gt.is_labeled(i)) continue;
    const double v = confidence[i];
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    auto b = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - edges.begin() - 1));
    b = std::min(b, bins - 1);
    ++out[b].count;
    if (labels[i] == gt[i]) ++correct[b];
    ++total;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lower = edges[b];
    out[b].upper = edges[b + 1];
    if (out[b].count > 0)
      out[b].accuracy = static_cast<double>(correct[b]) / static_cast<double>(out[b].count);
    out[b].share = total > 0 ? static_cast<double>(out[b].count) / static_cast<double>(total) : 0.0;
  }
  return out;
}

std::vector<double> quantile_edges(const LabelField& labels, const ConfidenceField& confidence,
                                   int bins) {
  if (bins < 1) throw std::invalid_argument("quantile_edges: bins must be >= 1");
  std::vector<double> values;
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels.is_labeled(i)) values.push_back(confidence[i]);
  std::sort(values.begin(), values.end());
  std::vector<double> edges{0.0};
  for (int k = 1; k < bins && !values.empty(); ++k) {
    const auto at = static_cast<std::size_t>(static_cast<double>(k) / bins *
                                             static_cast<double>(values.size()));
    const double q = values[std::min(at, values.size() - 1)];
    if (q > edges.back() && q < 1.0) edges.push_back(q);
  }
  edges.push_back(1.0);
  return edges;
}

double labeled_rate(const LabelField& labels) {
  if (labels.size() == 0) return 0.0;
  return static_cast<double>(labels.labeled_count()) / static_cast<double>(labels.size());
}

namespace {

std::string class_name(const std::vector<std::string>& names, std::size_t k) {
  return k < names.size() ? names[k] : "class_" + std::to_string(k);
}

}  // namespace

nlohmann::json score_to_json(const SegmentationScore& s,
                             const std::vector<std::string>& class_names) {
  nlohmann::json j;
  j["miou"] = s.miou;
  j["macc"] = s.macc;
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t k = 0; k < s.per_class_iou.size(); ++k) {
    if (!s.per_class_iou[k]) continue;
    nlohmann::json row;
    row["iou"] = *s.per_class_iou[k];
    row["recall"] = s.per_class_recall[k] ? nlohmann::json(*s.per_class_recall[k]) : nlohmann::json();
    per[class_name(class_names, k)] = row;
  }
  j["per_class"] = per;
  return j;
}

std::string score_to_table(const SegmentationScore& s,
                           const std::vector<std::string>& class_names) {
  std::size_t width = 5;
  for (std::size_t k = 0; k < s.per_class_iou.size(); ++k)
    width = std::max(width, class_name(class_names, k).size());
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-*s %8s %8s\n", static_cast<int>(width), "class", "IoU", "Acc");
  out << buf;
  for (std::size_t k = 0; k < s.per_class_iou.size(); ++k) {
    if (!s.per_class_iou[k]) continue;
    const std::string name = class_name(class_names, k);
    if (s.per_class_recall[k])
      std::snprintf(buf, sizeof buf, "%-*s %8.1f %8.1f\n", static_cast<int>(width), name.c_str(),
                    100.0 * *s.per_class_iou[k], 100.0 * *s.per_class_recall[k]);
    else
      std::snprintf(buf, sizeof buf, "%-*s %8.1f %8s\n", static_cast<int>(width), name.c_str(),
                    100.0 * *s.per_class_iou[k], "-");
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-*s %8.1f %8.1f\n", static_cast<int>(width), "mean",
                100.0 * s.miou, 100.0 * s.macc);
  out << buf;
  return out.str();
}

}  // namespace wsseg
