#ifndef WSSEG_STLP_HPP
#define WSSEG_STLP_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "wsseg/classifier.hpp"
#include "wsseg/metrics.hpp"
#include "wsseg/projection.hpp"
#include "wsseg/refine.hpp"
#include "wsseg/superpoint.hpp"

namespace wsseg {

inline constexpr int kDefaultRounds = 2;

enum class UpdateMode {
  Retained,  // keep previous labels, fill only unlabeled positions
  Full,      // regenerate every position from the new prediction
};

struct StlpConfig {
  int rounds = kDefaultRounds;
  RefineParams refine;
  KnnClassifierParams classifier;
  UpdateMode update = UpdateMode::Retained;
  std::uint64_t seed = 0;

  void validate() const;
};

// Merges a new prediction into the previous labels. Predictions of classes
// outside the scene mask are dropped, the rest compete per class (top_v
// percent by confidence) over the positions eligible for update.
LabelField label_update(const LabelField& prev, const LabelField& pred,
                        const ConfidenceField& pred_confidence, const SceneMask& scene_mask,
                        double top_v, UpdateMode mode = UpdateMode::Retained);

struct RoundResult {
  Prediction prediction;
  LabelField updated;  // after label_update, before galr
  LabelField labels;   // after galr
};

// fit -> predict -> label_update -> galr. Throws DataError when `prev` has
// no labeled point.
RoundResult stlp_round(const PointCloud& cloud, const LabelField& prev,
                       const SuperpointPartition& partition, const SceneMask& scene_mask,
                       Classifier& classifier, const StlpConfig& config);

struct RoundReport {
  int round = 0;
  double labeled_rate = 0.0;
  std::optional<SegmentationScore> score;  // when ground truth is supplied
};

nlohmann::json round_report_to_json(const RoundReport& r);

struct StlpResult {
  LabelField labels;
  std::vector<RoundReport> report;  // one entry per round
};

using RoundObserver = std::function<void(int round, const LabelField& before,
                                         const RoundResult& result)>;

// Runs `config.rounds` rounds starting from y0 and leaves `classifier`
// fitted on the final labels (on y0 when rounds == 0).
StlpResult stlp_run(const PointCloud& cloud, const LabelField& y0,
                    const SuperpointPartition& partition, const SceneMask& scene_mask,
                    Classifier& classifier, const StlpConfig& config,
                    const LabelField* ground_truth = nullptr,
                    const RoundObserver& observer = {});

struct InferOptions {
  bool use_galr = true;
  // Rejected blocks keep raw predictions unless this is set.
  bool unlabeled_on_reject = false;
};

LabelField infer(const PointCloud& cloud, const Classifier& classifier,
                 const SuperpointPartition& partition, double alpha,
                 const InferOptions& options = {});

}  // namespace wsseg

#endif  // WSSEG_STLP_HPP
