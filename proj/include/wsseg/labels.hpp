#ifndef WSSEG_LABELS_HPP
#define WSSEG_LABELS_HPP

#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace wsseg {

// In-memory unlabeled tag. On disk it is 65535 in 16-bit PLY channels and
// -1 in text listings.
inline constexpr int kUnlabeled = -1;
inline constexpr std::uint16_t kUnlabeledPly = 65535;

// Per-point class id in [0, num_classes) or kUnlabeled.
struct LabelField {
  Eigen::VectorXi labels;
  int num_classes = 0;

  LabelField() = default;
  LabelField(Eigen::Index n, int classes, int fill = kUnlabeled)
      : labels(Eigen::VectorXi::Constant(n, fill)), num_classes(classes) {}
  LabelField(Eigen::VectorXi values, int classes)
      : labels(std::move(values)), num_classes(classes) {}

  Eigen::Index size() const { return labels.size(); }
  bool is_labeled(Eigen::Index i) const { return labels[i] != kUnlabeled; }
  int operator[](Eigen::Index i) const { return labels[i]; }
  int& operator[](Eigen::Index i) { return labels[i]; }

  Eigen::Index labeled_count() const {
    return (labels.array() != kUnlabeled).count();
  }

  // Throws DataError when a value is outside [0, num_classes) and not
  // kUnlabeled.
  void validate() const;

  friend bool operator==(const LabelField& a, const LabelField& b) {
    return a.num_classes == b.num_classes && a.labels.size() == b.labels.size() &&
           a.labels == b.labels;
  }
};

// Per-point confidence in [0, 1].
using ConfidenceField = Eigen::VectorXf;

// Newline-delimited text, one integer per line, -1 for unlabeled.
LabelField read_label_text(const std::string& path, int num_classes);
void write_label_text(const LabelField& labels, const std::string& path);

// Dispatches on extension: ".ply" reads the `label` channel, anything else
// is parsed as text.
LabelField read_labels(const std::string& path, int num_classes);

}  // namespace wsseg

#endif  // WSSEG_LABELS_HPP
