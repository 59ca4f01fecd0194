#ifndef WSSEG_PIPELINE_HPP
#define WSSEG_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wsseg/labels.hpp"
#include "wsseg/normals.hpp"
#include "wsseg/point_cloud.hpp"
#include "wsseg/projection.hpp"
#include "wsseg/stlp.hpp"
#include "wsseg/superpoint.hpp"

namespace wsseg {


struct SuperpointConfig {
  OversegmentParams params;
  int normal_neighbors = kDefaultNormalNeighbors;
};

// Normals from the cloud itself, then region growing.
SuperpointPartition compute_partition(const PointCloud& cloud, const SuperpointConfig& config);

// Class list: JSON array of names, index = class id.
std::vector<std::string> read_class_names(const std::string& path);
void write_class_names(const std::vector<std::string>& names, const std::string& path);

// Scene mask: JSON array of the class names present in the scene. Unknown
// names raise DataError.
SceneMask read_scene_mask(const std::string& path, const std::vector<std::string>& classes);
void write_scene_mask(const SceneMask& mask, const std::vector<std::string>& classes,
                      const std::string& path);

// Everything the refinement and self-training stages consume for one scene.
struct SceneBundle {
  PointCloud cloud;
  PseudoLabels pseudo;
  SuperpointPartition partition;
  SceneMask mask;
  LabelField ground_truth;
};

// Synthesizes scene + noisy logits from the named presets and runs the
// pseudo-labelling and partition stages.
SceneBundle synth_bundle(const std::string& scene_preset_name,
                         const std::string& noise_preset_name, std::uint64_t seed,
                         const SuperpointConfig& superpoints = {});

// Metrics of one parameter setting on one scene. Values stay empty when the
// stage has nothing to score (for example every label rejected).
struct SettingScore {
  std::optional<double> miou;          // infer output vs ground truth
  std::optional<double> macc;
  double labeled_rate = 0.0;           // of the refined labels
  std::optional<double> label_miou;    // refined labels over their labeled subset
};

SettingScore evaluate_setting(const SceneBundle& scene, const StlpConfig& config);

enum class SweepParam { TopV, Alpha, Rounds };

SweepParam parse_sweep_param(const std::string& name);
std::string sweep_param_name(SweepParam param);
StlpConfig with_param(StlpConfig config, SweepParam param, double value);

struct SweepRow {
  double x = 0.0;
  SettingScore mean;  // averaged over the scenes that produced a value
};

// Evaluates every grid value on every scene; `jobs` worker threads split the
// scenes.
std::vector<SweepRow> run_sweep(const std::vector<SceneBundle>& scenes, SweepParam param,
                                const std::vector<double>& grid, const StlpConfig& base,
                                int jobs = 1);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace wsseg

#endif  // WSSEG_PIPELINE_HPP
