#include "wsseg/labels.hpp"

#include <fstream>
#include <string>
#include <vector>

#include "wsseg/errors.hpp"
#include "wsseg/ply_io.hpp"

namespace wsseg {

void LabelField::validate() const {
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const int v = labels[i];
    if (v != kUnlabeled && (v < 0 || v >= num_classes))
      throw DataError("label " + std::to_string(v) + " at point " +
                      std::to_string(i) + " outside [0, " +
                      std::to_string(num_classes) + ")");
  }
}

LabelField read_label_text(const std::string& path, int num_classes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file " + path);
  std::vector<int> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(line, &used);
    } catch (const std::exception&) {
      throw FormatError(path, "expected integer label", line_no, "line");
    }
    if (line.find_first_not_of(" \t\r", used) != std::string::npos)
      throw FormatError(path, "expected integer label", line_no, "line");
    if (v < -1 || v >= num_classes)
      throw FormatError(path, "label " + std::to_string(v) + " out of range",
                        line_no, "line");
    values.push_back(v);
  }
  LabelField out(static_cast<Eigen::Index>(values.size()), num_classes);
  for (std::size_t i = 0; i < values.size(); ++i)
    out.labels[static_cast<Eigen::Index>(i)] = values[i];
  return out;
}

void write_label_text(const LabelField& labels, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write label file " + path);
  for (Eigen::Index i = 0; i < labels.size(); ++i) out << labels[i] << '\n';
  if (!out) throw IoError("write failed for " + path);
}

LabelField read_labels(const std::string& path, int num_classes) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".ply") == 0)
    return labels_from_ply(read_ply(path), num_classes, path);
  return read_label_text(path, num_classes);
}

}  // namespace wsseg
