#include "wsseg/refine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "wsseg/errors.hpp"

namespace wsseg {

void RefineParams::validate() const {
  if (!(top_v > 0.0 && top_v <= 100.0))
    throw std::invalid_argument("top_v must be in (0, 100]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0, 1]");
}

Eigen::Index calr_keep_count(Eigen::Index n, double top_v) {
  // top_v * n first keeps integral percentages exact.
  const auto keep = static_cast<Eigen::Index>(std::ceil(top_v * static_cast<double>(n) / 100.0));
  return std::min(n, keep);
}

LabelField calr(const LabelField& labels, const ConfidenceField& confidence, double top_v) {
  if (labels.size() != confidence.size())
    throw DataError("calr: " + std::to_string(labels.size()) + " labels vs " +
                    std::to_string(confidence.size()) + " confidences");
  if (!(top_v > 0.0 && top_v <= 100.0)) throw std::invalid_argument("calr: top_v must be in (0, 100]");

  std::vector<std::vector<Eigen::Index>> pools(static_cast<std::size_t>(labels.num_classes));
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels.is_labeled(i)) pools[static_cast<std::size_t>(labels[i])].push_back(i);

  LabelField out(labels.size(), labels.num_classes);
  for (std::size_t c = 0; c < pools.size(); ++c) {
    auto& pool = pools[c];
    const auto keep = calr_keep_count(static_cast<Eigen::Index>(pool.size()), top_v);
    std::partial_sort(pool.begin(), pool.begin() + keep, pool.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                        return confidence[a] > confidence[b] ||
                               (confidence[a] == confidence[b] && a < b);
                      });
    for (Eigen::Index k = 0; k < keep; ++k) out[pool[static_cast<std::size_t>(k)]] = static_cast<int>(c);
  }
  return out;
}

LabelField galr(const LabelField& labels, const SuperpointPartition& partition, double alpha) {
  if (partition.point_count() != labels.size())
    throw DataError("galr: partition covers " + std::to_string(partition.point_count()) +
                    " points, labels have " + std::to_string(labels.size()));
  LabelField out(labels.size(), labels.num_classes);
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(labels.num_classes));
  for (const auto& block : partition.segments()) {
    std::fill(counts.begin(), counts.end(), 0);
    Eigen::Index total = 0;
    for (const Eigen::Index p : block) {
      if (!labels.is_labeled(p)) continue;
      ++counts[static_cast<std::size_t>(labels[p])];
      ++total;
    }
    if (total == 0) continue;
    const auto top = std::max_element(counts.begin(), counts.end());  // first max = lowest id
    const double ratio = static_cast<double>(*top) / static_cast<double>(total);
    if (!(ratio > alpha)) continue;
    const int winner = static_cast<int>(top - counts.begin());
    for (const Eigen::Index p : block) out[p] = winner;
  }
  return out;
}

LabelField refine_pipeline(const LabelField& labels, const ConfidenceField& confidence,
                           const SuperpointPartition& partition, const RefineParams& params) {
  params.validate();
  return galr(calr(labels, confidence, params.top_v), partition, params.alpha);
}

}  // namespace wsseg
