#ifndef WSSEG_SYNTH_HPP
#define WSSEG_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "wsseg/camera.hpp"
#include "wsseg/labels.hpp"
#include "wsseg/point_cloud.hpp"
#include "wsseg/projection.hpp"

namespace wsseg {

struct ClassStyle {
  std::string name;
  Eigen::Vector3d color{128, 128, 128};  // mean RGB
  Eigen::Vector3d min_dims{0.4, 0.4, 0.4};  // box extents (x, y, z), meters
  Eigen::Vector3d max_dims{1.0, 1.0, 1.0};
};

// Palette convention: index 0 is the floor class, index 1 the wall class,
// the rest are box-shaped object classes.
std::vector<ClassStyle> default_palette();
std::vector<std::string> class_names(const std::vector<ClassStyle>& palette);

struct SceneSpec {
  Eigen::Vector3d extents{5.0, 4.0, 2.5};  // room size, meters
  int min_objects = 5;
  int max_objects = 7;
  std::vector<ClassStyle> palette = default_palette();
  double density = 150.0;  // expected points per square meter of surface
  double noise_sigma = 0.004;
  double color_sigma = 6.0;         // per-point RGB jitter
  double object_color_sigma = 14.0;  // per-object RGB offset
  double wall_margin = 0.15;        // minimum gap box <-> wall
  double object_gap = 0.25;         // minimum gap box <-> box
  double clutter_fraction = 0.0;    // share of points given no ground truth
  std::uint64_t seed = 0;

  void validate() const;
};

struct Box {
  int class_id = 0;
  Eigen::Vector3d min_corner, max_corner;
};

struct Scene {
  PointCloud cloud;
  LabelField ground_truth;
  SceneMask mask;
  NormalField normals;  // from the generating surfaces
  std::vector<Box> boxes;
  // Generating surface per point: 0 floor, 1..4 walls, then 5 faces per box.
  Eigen::VectorXi surface;
};

// Draw order from one mt19937_64(seed): object count; per object the class,
// dims and placement attempts; then per surface (floor, walls -x,+x,-y,+y,
// each box top,-x,+x,-y,+y) a Poisson count followed by per-point
// (u, v, jitter xyz, color jitter rgb); clutter last.
Scene generate_scene(const SceneSpec& spec);

struct LogitNoiseSpec {
  double correct_mean = 2.6;
  double correct_sigma = 1.0;
  double confusion_temperature = 1.0;  // spread of the non-target logits
  double blur_radius = 0.2;            // meters
  // Spatially smooth confusion: Gaussian blobs pushing one class toward a
  // fixed confuser class.
  int region_count = 6;
  double region_radius = 0.5;
  double region_strength = 3.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-point C-class logits imitating a noisy open-vocabulary predictor.
LogitField corrupt_logits(const LabelField& gt, const PointCloud& cloud,
                          const LogitNoiseSpec& spec);

struct CameraRingSpec {
  int count = 8;
  double radius = 1.5;      // from the room center, meters
  double height = 1.6;
  double target_height = 0.6;
  double focal = 120.0;     // pixels
  int width = 320;
  int height_px = 240;
};

// Places cameras on a horizontal ring looking at the room center and
// z-buffers `payload` rows (one per point) into each view.
std::vector<CameraView> render_views(const PointCloud& cloud, const RowMatrixXf& payload,
                                     const CameraRingSpec& ring,
                                     const Eigen::Vector3d& center,
                                     PayloadKind kind = PayloadKind::Logits);

// Rotation taking world coordinates into an x-right, y-down, z-forward
// camera frame looking from `eye` toward `target`.
Eigen::Matrix3d look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                        const Eigen::Vector3d& up = Eigen::Vector3d::UnitZ());

// Named fixtures. "room-small" is the acceptance preset.
SceneSpec scene_preset(const std::string& name, std::uint64_t seed);
LogitNoiseSpec noise_preset(const std::string& name, std::uint64_t seed);
CameraRingSpec ring_preset(const std::string& name);
std::vector<std::uint64_t> standard_seeds();

// JSON (de)serialization; absent keys keep their defaults. A "preset" key
// starts from that named preset seeded with "seed".
SceneSpec scene_spec_from_json(const nlohmann::json& j);
LogitNoiseSpec noise_spec_from_json(const nlohmann::json& j);
CameraRingSpec ring_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SceneSpec& spec);
nlohmann::json to_json(const LogitNoiseSpec& spec);
nlohmann::json to_json(const CameraRingSpec& spec);

}  // namespace wsseg

#endif  // WSSEG_SYNTH_HPP
