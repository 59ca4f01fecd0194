#ifndef WSSEG_REFINE_HPP
#define WSSEG_REFINE_HPP

#include "wsseg/labels.hpp"
#include "wsseg/superpoint.hpp"

namespace wsseg {

inline constexpr double kDefaultTopV = 30.0;
inline constexpr double kDefaultAlpha = 0.5;

struct RefineParams {
  double top_v = kDefaultTopV;  // percent, (0, 100]
  double alpha = kDefaultAlpha;  // [0, 1]

  void validate() const;
};

// Points retained out of a class pool of size n at top_v percent.
Eigen::Index calr_keep_count(Eigen::Index n, double top_v);

// Class-aware selection: inside each class keep the calr_keep_count most
// confident points (lower index wins confidence ties); the rest become
// unlabeled.
LabelField calr(const LabelField& labels, const ConfidenceField& confidence, double top_v);

// Superpoint vote: a block takes its majority label (lower class on count
// ties) when the majority share strictly exceeds alpha, otherwise the whole
// block is unlabeled. Blocks without labeled members are unlabeled.
LabelField galr(const LabelField& labels, const SuperpointPartition& partition, double alpha);

LabelField refine_pipeline(const LabelField& labels, const ConfidenceField& confidence,
                           const SuperpointPartition& partition, const RefineParams& params);

}  // namespace wsseg

#endif  // WSSEG_REFINE_HPP
