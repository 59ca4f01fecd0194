#include "wsseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Geometry>

#include "wsseg/errors.hpp"
#include "wsseg/kd_tree.hpp"
#include "wsseg/normals.hpp"

namespace wsseg {

std::vector<ClassStyle> default_palette() {
  using V = Eigen::Vector3d;
  return {
      {"floor", V(150, 120, 90), V::Zero(), V::Zero()},
      {"wall", V(215, 210, 195), V::Zero(), V::Zero()},
      {"cabinet", V(120, 75, 40), V(0.5, 0.4, 0.8), V(1.0, 0.6, 1.9)},
      {"bed", V(70, 110, 180), V(1.4, 1.8, 0.4), V(1.8, 2.1, 0.6)},
      {"chair", V(200, 60, 50), V(0.45, 0.45, 0.8), V(0.6, 0.6, 1.0)},
      {"sofa", V(90, 150, 80), V(1.6, 0.8, 0.7), V(2.2, 1.0, 0.9)},
      {"table", V(170, 140, 60), V(0.8, 0.7, 0.7), V(1.6, 1.0, 0.8)},
      {"bookshelf", V(60, 50, 110), V(0.8, 0.3, 1.5), V(1.2, 0.4, 2.0)},
      {"desk", V(150, 150, 150), V(1.0, 0.6, 0.7), V(1.5, 0.8, 0.8)},
      {"bathtub", V(230, 230, 250), V(1.5, 0.7, 0.5), V(1.8, 0.8, 0.6)},
  };
}

std::vector<std::string> class_names(const std::vector<ClassStyle>& palette) {
  std::vector<std::string> names;
  for (const auto& s : palette) names.push_back(s.name);
  return names;
}

void SceneSpec::validate() const {
  if (!(extents.array() > 0.0).all()) throw DataError("scene spec: extents must be positive");
  if (!(density > 0.0)) throw DataError("scene spec: density must be positive");
  if (min_objects < 0 || max_objects < min_objects)
    throw DataError("scene spec: need 0 <= min_objects <= max_objects");
  if (palette.size() < 2) throw DataError("scene spec: palette needs floor and wall classes");
  if (max_objects > static_cast<int>(palette.size()) - 2)
    throw DataError("scene spec: palette has " + std::to_string(palette.size() - 2) +
                    " object classes, " + std::to_string(max_objects) + " objects requested");
  if (noise_sigma < 0.0 || color_sigma < 0.0 || object_color_sigma < 0.0)
    throw DataError("scene spec: negative noise");
  if (clutter_fraction < 0.0 || clutter_fraction > 1.0)
    throw DataError("scene spec: clutter fraction must be in [0, 1]");
}

void LogitNoiseSpec::validate() const {
  if (blur_radius < 0.0) throw DataError("noise spec: blur radius must be >= 0");
  if (correct_sigma < 0.0 || confusion_temperature < 0.0)
    throw DataError("noise spec: negative spread");
  if (region_count < 0 || region_radius <= 0.0) throw DataError("noise spec: bad region settings");
}

namespace {

struct Rect {
  Eigen::Vector3d origin, a, b;
  Eigen::Vector3d normal;
  int label;
  Eigen::Vector3d color;
};

std::uint8_t to_channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Vector3d room = spec.extents;

  const int wanted = std::uniform_int_distribution<int>(spec.min_objects, spec.max_objects)(rng);
  std::vector<int> object_classes;
  for (int c = 2; c < static_cast<int>(spec.palette.size()); ++c) object_classes.push_back(c);
  std::shuffle(object_classes.begin(), object_classes.end(), rng);
  object_classes.resize(static_cast<std::size_t>(wanted));

  Scene scene;
  for (const int cls : object_classes) {
    const auto& style = spec.palette[static_cast<std::size_t>(cls)];
    Eigen::Vector3d dims;
    for (int d = 0; d < 3; ++d)
      dims[d] = style.min_dims[d] + unit(rng) * (style.max_dims[d] - style.min_dims[d]);
    for (int attempt = 0; attempt < 100; ++attempt) {
      const double sx = room.x() - 2 * spec.wall_margin - dims.x();
      const double sy = room.y() - 2 * spec.wall_margin - dims.y();
      const double ux = unit(rng), uy = unit(rng);
      if (sx <= 0.0 || sy <= 0.0 || dims.z() >= room.z()) break;
      Box box{cls, Eigen::Vector3d(spec.wall_margin + ux * sx, spec.wall_margin + uy * sy, 0.0), {}};
      box.max_corner = box.min_corner + dims;
      const bool clear = std::none_of(scene.boxes.begin(), scene.boxes.end(), [&](const Box& o) {
        return box.min_corner.x() < o.max_corner.x() + spec.object_gap &&
               o.min_corner.x() < box.max_corner.x() + spec.object_gap &&
               box.min_corner.y() < o.max_corner.y() + spec.object_gap &&
               o.min_corner.y() < box.max_corner.y() + spec.object_gap;
      });
      if (clear) {
        scene.boxes.push_back(box);
        break;
      }
    }
  }

  auto offset = [&]() {
    return Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)) * spec.object_color_sigma;
  };
  std::vector<Rect> rects;
  using V = Eigen::Vector3d;
  const V floor_color = spec.palette[0].color + offset();
  rects.push_back({V::Zero(), V(room.x(), 0, 0), V(0, room.y(), 0), V::UnitZ(), 0, floor_color});
  const V wall_color = spec.palette[1].color + offset();
  rects.push_back({V::Zero(), V(0, room.y(), 0), V(0, 0, room.z()), V::UnitX(), 1, wall_color});
  rects.push_back({V(room.x(), 0, 0), V(0, room.y(), 0), V(0, 0, room.z()), V::UnitX(), 1, wall_color});
  rects.push_back({V::Zero(), V(room.x(), 0, 0), V(0, 0, room.z()), V::UnitY(), 1, wall_color});
  rects.push_back({V(0, room.y(), 0), V(room.x(), 0, 0), V(0, 0, room.z()), V::UnitY(), 1, wall_color});
  for (const auto& box : scene.boxes) {
    const V lo = box.min_corner, hi = box.max_corner, d = hi - lo;
    const V color = spec.palette[static_cast<std::size_t>(box.class_id)].color + offset();
    const int c = box.class_id;
    rects.push_back({V(lo.x(), lo.y(), hi.z()), V(d.x(), 0, 0), V(0, d.y(), 0), V::UnitZ(), c, color});
    rects.push_back({lo, V(0, d.y(), 0), V(0, 0, d.z()), V::UnitX(), c, color});
    rects.push_back({V(hi.x(), lo.y(), 0), V(0, d.y(), 0), V(0, 0, d.z()), V::UnitX(), c, color});
    rects.push_back({lo, V(d.x(), 0, 0), V(0, 0, d.z()), V::UnitY(), c, color});
    rects.push_back({V(lo.x(), hi.y(), 0), V(d.x(), 0, 0), V(0, 0, d.z()), V::UnitY(), c, color});
  }

  std::vector<V> pos, nrm;
  std::vector<Eigen::Matrix<std::uint8_t, 3, 1>> col;
  std::vector<int> lab, surf;
  for (std::size_t r = 0; r < rects.size(); ++r) {
    const Rect& rect = rects[r];
    const double area = rect.a.norm() * rect.b.norm();
    const long count = std::poisson_distribution<long>(spec.density * area)(rng);
    for (long k = 0; k < count; ++k) {
      const double u = unit(rng), v = unit(rng);
      V p = rect.origin + u * rect.a + v * rect.b;
      const V jitter(gauss(rng), gauss(rng), gauss(rng));
      const V cj(gauss(rng), gauss(rng), gauss(rng));
      if (r == 0) {
        const bool covered = std::any_of(scene.boxes.begin(), scene.boxes.end(), [&](const Box& b) {
          return p.x() > b.min_corner.x() && p.x() < b.max_corner.x() &&
                 p.y() > b.min_corner.y() && p.y() < b.max_corner.y();
        });
        if (covered) continue;
      }
      p += jitter * spec.noise_sigma;
      const V c = rect.color + cj * spec.color_sigma;
      pos.push_back(p);
      nrm.push_back(rect.normal);
      col.emplace_back(to_channel(c.x()), to_channel(c.y()), to_channel(c.z()));
      lab.push_back(rect.label);
      surf.push_back(static_cast<int>(r));
    }
  }

  const auto n = static_cast<Eigen::Index>(pos.size());
  const int classes = static_cast<int>(spec.palette.size());
  scene.cloud = PointCloud(n);
  scene.normals.normals.resize(3, n);
  scene.ground_truth = LabelField(n, classes);
  scene.surface.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    scene.cloud.positions.col(i) = pos[k];
    scene.cloud.colors.col(i) = col[k];
    scene.normals.normals.col(i) = canonical_sign(nrm[k]);
    scene.ground_truth[i] = lab[k];
    scene.surface[i] = surf[k];
  }
  if (spec.clutter_fraction > 0.0)
    for (Eigen::Index i = 0; i < n; ++i)
      if (unit(rng) < spec.clutter_fraction) scene.ground_truth[i] = kUnlabeled;

  scene.mask = SceneMask::Constant(classes, false);
  scene.mask[0] = true;
  scene.mask[1] = true;
  for (const auto& b : scene.boxes) scene.mask[b.class_id] = true;
  return scene;
}

LogitField corrupt_logits(const LabelField& gt, const PointCloud& cloud,
                          const LogitNoiseSpec& spec) {
  spec.validate();
  if (gt.size() != cloud.size()) throw DataError("corrupt_logits: label/cloud length mismatch");
  const Eigen::Index n = gt.size();
  const int classes = gt.num_classes;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<int> present;
  for (int c = 0; c < classes; ++c)
    if ((gt.labels.array() == c).any()) present.push_back(c);
  std::vector<int> confuser(static_cast<std::size_t>(classes), kUnlabeled);
  for (const int c : present) {
    if (present.size() < 2) break;
    int pick = std::uniform_int_distribution<int>(0, static_cast<int>(present.size()) - 2)(rng);
    if (present[static_cast<std::size_t>(pick)] >= c) ++pick;
    confuser[static_cast<std::size_t>(c)] = present[static_cast<std::size_t>(pick)];
  }

  std::vector<Eigen::Vector3d> centers;
  if (n > 0 && spec.region_count > 0) {
    const Eigen::Vector3d lo = cloud.positions.rowwise().minCoeff();
    const Eigen::Vector3d hi = cloud.positions.rowwise().maxCoeff();
    for (int j = 0; j < spec.region_count; ++j) {
      Eigen::Vector3d u(unit(rng), unit(rng), unit(rng));
      centers.push_back(lo + u.cwiseProduct(hi - lo));
    }
  }

  LogitField logits(n, classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < classes; ++c)
      logits(i, c) = static_cast<float>(spec.confusion_temperature * gauss(rng));
    const double correct = spec.correct_mean + spec.correct_sigma * gauss(rng);
    const int g = gt[i];
    if (g == kUnlabeled) continue;
    logits(i, g) = static_cast<float>(correct);
    const int k = confuser[static_cast<std::size_t>(g)];
    if (k != kUnlabeled && !centers.empty()) {
      double s = 0.0;
      for (const auto& c : centers) {
        const double d2 = (cloud.positions.col(i) - c).squaredNorm();
        s = std::max(s, std::exp(-d2 / (2 * spec.region_radius * spec.region_radius)));
      }
      logits(i, k) += static_cast<float>(spec.region_strength * s);
    }
  }

  if (spec.blur_radius > 0.0 && n > 0) {
    const SpatialIndex index(cloud.positions);
    const LogitField base = logits;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int g = gt[i];
      if (g == kUnlabeled) continue;
      for (const auto& nb : index.radius_search(cloud.positions.col(i), spec.blur_radius)) {
        const int h = gt[nb.index];
        if (h == kUnlabeled || h == g) continue;
        const double w = 0.5 * (1.0 - std::sqrt(nb.squared_distance) / spec.blur_radius);
        const double a = base(i, g), b = base(i, h);
        logits(i, g) = static_cast<float>((1 - w) * a + w * b);
        logits(i, h) = static_cast<float>((1 - w) * b + w * a);
        break;
      }
    }
  }
  return logits;
}

Eigen::Matrix3d look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                        const Eigen::Vector3d& up) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  const Eigen::Vector3d right = forward.cross(up).normalized();
  const Eigen::Vector3d down = forward.cross(right);
  Eigen::Matrix3d r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  return r;
}

std::vector<CameraView> render_views(const PointCloud& cloud, const RowMatrixXf& payload,
                                     const CameraRingSpec& ring, const Eigen::Vector3d& center,
                                     PayloadKind kind) {
  if (ring.count < 1) throw DataError("render_views: need at least one camera");
  if (!(ring.focal > 0.0)) throw DataError("render_views: focal length must be positive");
  if (ring.width < 1 || ring.height_px < 1) throw DataError("render_views: bad image size");
  if (payload.rows() != cloud.size())
    throw DataError("render_views: payload rows must match point count");

  std::vector<CameraView> views;
  const Eigen::Vector3d target(center.x(), center.y(), ring.target_height);
  for (int k = 0; k < ring.count; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / ring.count;
    const Eigen::Vector3d eye(center.x() + ring.radius * std::cos(theta),
                              center.y() + ring.radius * std::sin(theta), ring.height);
    CameraView view;
    view.kind = kind;
    auto& cam = view.camera;
    cam.width = ring.width;
    cam.height = ring.height_px;
    cam.intrinsics << ring.focal, 0, ring.width / 2.0, 0, ring.focal, ring.height_px / 2.0, 0, 0, 1;
    // Degenerate when looking straight down/up; callers keep target off the axis.
    cam.rotation = look_at(eye, target);
    cam.translation = -cam.rotation * eye;

    const Eigen::Index pixels = Eigen::Index{cam.width} * cam.height;
    Eigen::VectorXd zbuf = Eigen::VectorXd::Constant(pixels, std::numeric_limits<double>::infinity());
    Eigen::VectorXi owner = Eigen::VectorXi::Constant(pixels, -1);
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
      const auto proj = project_point<double>(cloud.positions.col(i), cam);
      if (!proj) continue;
      const auto px = pixel_index(proj->pixel, cam);
      if (px && proj->depth < zbuf[*px]) {
        zbuf[*px] = proj->depth;
        owner[*px] = static_cast<int>(i);
      }
    }
    view.payload = RowMatrixXf::Zero(pixels, payload.cols());
    for (Eigen::Index p = 0; p < pixels; ++p)
      if (owner[p] >= 0) view.payload.row(p) = payload.row(owner[p]);
    views.push_back(std::move(view));
  }
  return views;
}

SceneSpec scene_preset(const std::string& name, std::uint64_t seed) {
  SceneSpec s;
  s.seed = seed;
  if (name == "room-small") return s;
  if (name == "room-large") {
    s.extents = Eigen::Vector3d(8.0, 6.0, 3.0);
    s.density = 800.0;
    return s;
  }
  if (name == "empty-room") {
    s.min_objects = s.max_objects = 0;
    return s;
  }
  throw DataError("unknown scene preset '" + name + "'");
}

LogitNoiseSpec noise_preset(const std::string& name, std::uint64_t seed) {
  LogitNoiseSpec s;
  s.seed = seed ^ 0x9e3779b97f4a7c15ULL;
  if (name == "paper-like") return s;
  if (name == "clean") {
    s.correct_sigma = 0.0;
    s.confusion_temperature = 0.0;
    s.blur_radius = 0.0;
    s.region_count = 0;
    s.region_strength = 0.0;
    return s;
  }
  throw DataError("unknown noise preset '" + name + "'");
}

CameraRingSpec ring_preset(const std::string& name) {
  if (name == "room-small" || name == "default") return {};
  throw DataError("unknown camera preset '" + name + "'");
}

std::vector<std::uint64_t> standard_seeds() { return {1, 2, 3, 4, 5}; }

namespace {

Eigen::Vector3d vec3(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw DataError("expected a 3-element array");
  return {v[0], v[1], v[2]};
}

std::vector<double> arr(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

SceneSpec scene_spec_from_json(const nlohmann::json& j) {
  SceneSpec s;
  try {
    if (j.contains("preset"))
      s = scene_preset(j.at("preset").get<std::string>(), j.value("seed", std::uint64_t{0}));
    if (j.contains("extents")) s.extents = vec3(j.at("extents"));
    maybe(j, "min_objects", s.min_objects);
    maybe(j, "max_objects", s.max_objects);
    maybe(j, "density", s.density);
    maybe(j, "noise_sigma", s.noise_sigma);
    maybe(j, "color_sigma", s.color_sigma);
    maybe(j, "object_color_sigma", s.object_color_sigma);
    maybe(j, "wall_margin", s.wall_margin);
    maybe(j, "object_gap", s.object_gap);
    maybe(j, "clutter_fraction", s.clutter_fraction);
    maybe(j, "seed", s.seed);
    if (j.contains("palette")) {
      const auto defaults = default_palette();
      s.palette.clear();
      for (const auto& e : j.at("palette")) {
        ClassStyle style;
        const std::string name = e.is_string() ? e.get<std::string>() : e.at("name").get<std::string>();
        const auto known = std::find_if(defaults.begin(), defaults.end(),
                                        [&](const ClassStyle& d) { return d.name == name; });
        if (known != defaults.end()) style = *known;
        style.name = name;
        if (e.is_object()) {
          if (e.contains("color")) style.color = vec3(e.at("color"));
          if (e.contains("min_dims")) style.min_dims = vec3(e.at("min_dims"));
          if (e.contains("max_dims")) style.max_dims = vec3(e.at("max_dims"));
        }
        s.palette.push_back(style);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("scene spec: ") + e.what());
  }
  s.validate();
  return s;
}

LogitNoiseSpec noise_spec_from_json(const nlohmann::json& j) {
  LogitNoiseSpec s;
  try {
    if (j.contains("preset"))
      s = noise_preset(j.at("preset").get<std::string>(), j.value("seed", std::uint64_t{0}));
    maybe(j, "correct_mean", s.correct_mean);
    maybe(j, "correct_sigma", s.correct_sigma);
    maybe(j, "confusion_temperature", s.confusion_temperature);
    maybe(j, "blur_radius", s.blur_radius);
    maybe(j, "region_count", s.region_count);
    maybe(j, "region_radius", s.region_radius);
    maybe(j, "region_strength", s.region_strength);
    if (!j.contains("preset")) maybe(j, "seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("noise spec: ") + e.what());
  }
  s.validate();
  return s;
}

CameraRingSpec ring_spec_from_json(const nlohmann::json& j) {
  CameraRingSpec s;
  try {
    maybe(j, "count", s.count);
    maybe(j, "radius", s.radius);
    maybe(j, "height", s.height);
    maybe(j, "target_height", s.target_height);
    maybe(j, "focal", s.focal);
    maybe(j, "width", s.width);
    maybe(j, "height_px", s.height_px);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("camera ring spec: ") + e.what());
  }
  return s;
}

nlohmann::json to_json(const SceneSpec& s) {
  nlohmann::json palette = nlohmann::json::array();
  for (const auto& p : s.palette)
    palette.push_back({{"name", p.name},
                       {"color", arr(p.color)},
                       {"min_dims", arr(p.min_dims)},
                       {"max_dims", arr(p.max_dims)}});
  return {{"extents", arr(s.extents)},
          {"min_objects", s.min_objects},
          {"max_objects", s.max_objects},
          {"palette", palette},
          {"density", s.density},
          {"noise_sigma", s.noise_sigma},
          {"color_sigma", s.color_sigma},
          {"object_color_sigma", s.object_color_sigma},
          {"wall_margin", s.wall_margin},
          {"object_gap", s.object_gap},
          {"clutter_fraction", s.clutter_fraction},
          {"seed", s.seed}};
}

nlohmann::json to_json(const LogitNoiseSpec& s) {
  return {{"correct_mean", s.correct_mean},     {"correct_sigma", s.correct_sigma},
          {"confusion_temperature", s.confusion_temperature},
          {"blur_radius", s.blur_radius},       {"region_count", s.region_count},
          {"region_radius", s.region_radius},   {"region_strength", s.region_strength},
          {"seed", s.seed}};
}

nlohmann::json to_json(const CameraRingSpec& s) {
  return {{"count", s.count},   {"radius", s.radius}, {"height", s.height},
          {"target_height", s.target_height}, {"focal", s.focal},
          {"width", s.width},   {"height_px", s.height_px}};
}

}  // namespace wsseg
