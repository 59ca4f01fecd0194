#include "wsseg/stlp.hpp"

#include <stdexcept>

#include "wsseg/errors.hpp"

namespace wsseg {

void StlpConfig::validate() const {
  if (rounds < 0) throw std::invalid_argument("rounds must be >= 0");
  refine.validate();
}

LabelField label_update(const LabelField& prev, const LabelField& pred,
                        const ConfidenceField& pred_confidence, const SceneMask& scene_mask,
                        double top_v, UpdateMode mode) {
  const Eigen::Index n = prev.size();
  if (pred.size() != n || pred_confidence.size() != n)
    throw DataError("label_update: length mismatch (" + std::to_string(n) + " previous, " +
                    std::to_string(pred.size()) + " predicted, " +
                    std::to_string(pred_confidence.size()) + " confidences)");
  if (scene_mask.size() != prev.num_classes)
    throw DataError("label_update: scene mask has " + std::to_string(scene_mask.size()) +
                    " classes, labels have " + std::to_string(prev.num_classes));

  // Candidates: in-mask predictions at positions open for update.
  LabelField candidates(n, prev.num_classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool open = mode == UpdateMode::Full || !prev.is_labeled(i);
    const int c = pred[i];
    if (open && c != kUnlabeled && scene_mask[c]) candidates[i] = c;
  }
  const LabelField selected = calr(candidates, pred_confidence, top_v);
  if (mode == UpdateMode::Full) return selected;

  LabelField out = prev;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!prev.is_labeled(i)) out[i] = selected[i];
  return out;
}

RoundResult stlp_round(const PointCloud& cloud, const LabelField& prev,
                       const SuperpointPartition& partition, const SceneMask& scene_mask,
                       Classifier& classifier, const StlpConfig& config) {
  if (prev.labeled_count() == 0) throw DataError("stlp_round: previous labels are all unlabeled");
  classifier.fit(cloud, prev);
  RoundResult r;
  r.prediction = classifier.predict(cloud);
  r.updated = label_update(prev, r.prediction.labels, r.prediction.confidence, scene_mask,
                           config.refine.top_v, config.update);
  r.labels = galr(r.updated, partition, config.refine.alpha);
  return r;
}

nlohmann::json round_report_to_json(const RoundReport& r) {
  nlohmann::json j;
  j["round"] = r.round;
  j["labeled_rate"] = r.labeled_rate;
  if (r.score) {
    j["miou"] = r.score->miou;
    j["macc"] = r.score->macc;
    nlohmann::json per = nlohmann::json::array();
    for (const auto& v : r.score->per_class_iou) per.push_back(v ? nlohmann::json(*v) : nlohmann::json());
    j["per_class_iou"] = per;
  }
  return j;
}

StlpResult stlp_run(const PointCloud& cloud, const LabelField& y0,
                    const SuperpointPartition& partition, const SceneMask& scene_mask,
                    Classifier& classifier, const StlpConfig& config,
                    const LabelField* ground_truth, const RoundObserver& observer) {
  config.validate();
  StlpResult result;
  result.labels = y0;
  for (int t = 1; t <= config.rounds; ++t) {
    RoundResult r = stlp_round(cloud, result.labels, partition, scene_mask, classifier, config);
    if (observer) observer(t, result.labels, r);
    result.labels = std::move(r.labels);
    RoundReport rep;
    rep.round = t;
    rep.labeled_rate = labeled_rate(result.labels);
    if (ground_truth && result.labels.labeled_count() > 0)
      rep.score = score(result.labels, *ground_truth);
    result.report.push_back(std::move(rep));
  }
  classifier.fit(cloud, result.labels);
  return result;
}

LabelField infer(const PointCloud& cloud, const Classifier& classifier,
                 const SuperpointPartition& partition, double alpha,
                 const InferOptions& options) {
  if (!classifier.fitted()) throw NotFittedError();
  Prediction pred = classifier.predict(cloud);
  if (!options.use_galr) return std::move(pred.labels);
  LabelField out = galr(pred.labels, partition, alpha);
  if (!options.unlabeled_on_reject)
    for (Eigen::Index i = 0; i < out.size(); ++i)
      if (!out.is_labeled(i)) out[i] = pred.labels[i];
  return out;
}

}  // namespace wsseg
