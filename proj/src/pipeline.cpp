#include "wsseg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "wsseg/errors.hpp"
#include "wsseg/metrics.hpp"
#include "wsseg/normals.hpp"
#include "wsseg/refine.hpp"
#include "wsseg/synth.hpp"

namespace wsseg {

SuperpointPartition compute_partition(const PointCloud& cloud, const SuperpointConfig& config) {
  const auto index = build_index(cloud);
  const int k = static_cast<int>(std::min<Eigen::Index>(config.normal_neighbors, cloud.size()));
  const auto normals = estimate_normals(cloud, index, k);
  return oversegment(cloud, normals, index, config.params);
}

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump() << '\n';
}

std::vector<std::string> string_array(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) throw DataError(path + ": expected a JSON array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw DataError(path + ": expected a JSON array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<std::string> read_class_names(const std::string& path) {
  auto names = string_array(read_json(path), path);
  if (names.empty()) throw DataError(path + ": class list is empty");
  return names;
}

void write_class_names(const std::vector<std::string>& names, const std::string& path) {
  write_json(names, path);
}

SceneMask read_scene_mask(const std::string& path, const std::vector<std::string>& classes) {
  SceneMask mask = SceneMask::Constant(static_cast<Eigen::Index>(classes.size()), false);
  for (const auto& name : string_array(read_json(path), path)) {
    const auto it = std::find(classes.begin(), classes.end(), name);
    if (it == classes.end()) throw DataError(path + ": unknown class '" + name + "'");
    mask[it - classes.begin()] = true;
  }
  return mask;
}

void write_scene_mask(const SceneMask& mask, const std::vector<std::string>& classes,
                      const std::string& path) {
  if (mask.size() != static_cast<Eigen::Index>(classes.size()))
    throw DataError("scene mask / class list size mismatch");
  std::vector<std::string> present;
  for (Eigen::Index c = 0; c < mask.size(); ++c)
    if (mask[c]) present.push_back(classes[static_cast<std::size_t>(c)]);
  write_json(present, path);
}

SceneBundle synth_bundle(const std::string& scene_preset_name,
                         const std::string& noise_preset_name, std::uint64_t seed,
                         const SuperpointConfig& superpoints) {
  auto scene = generate_scene(scene_preset(scene_preset_name, seed));
  const auto logits =
      corrupt_logits(scene.ground_truth, scene.cloud, noise_preset(noise_preset_name, seed));
  SceneBundle b;
  b.pseudo = rank_to_pseudo_labels(apply_scene_mask(logits, scene.mask));
  b.partition = compute_partition(scene.cloud, superpoints);
  b.cloud = std::move(scene.cloud);
  b.mask = std::move(scene.mask);
  b.ground_truth = std::move(scene.ground_truth);
  return b;
}

SettingScore evaluate_setting(const SceneBundle& scene, const StlpConfig& config) {
  SettingScore s;
  const auto y0 =
      refine_pipeline(scene.pseudo.labels, scene.pseudo.confidence, scene.partition, config.refine);
  s.labeled_rate = labeled_rate(y0);
  if (y0.labeled_count() == 0) return s;
  s.label_miou = score(y0, scene.ground_truth).miou;

  KnnClassifier knn(config.classifier);
  try {
    stlp_run(scene.cloud, y0, scene.partition, scene.mask, knn, config);
  } catch (const DataError&) {
    return s;
  }
  const auto final_score =
      score(infer(scene.cloud, knn, scene.partition, config.refine.alpha), scene.ground_truth);
  s.miou = final_score.miou;
  s.macc = final_score.macc;
  return s;
}

SweepParam parse_sweep_param(const std::string& name) {
  if (name == "V" || name == "top-v" || name == "top_v") return SweepParam::TopV;
  if (name == "alpha") return SweepParam::Alpha;
  if (name == "T" || name == "rounds") return SweepParam::Rounds;
  throw std::invalid_argument("unknown sweep parameter '" + name + "' (expected V, alpha or T)");
}

std::string sweep_param_name(SweepParam param) {
  switch (param) {
    case SweepParam::TopV: return "V";
    case SweepParam::Alpha: return "alpha";
    case SweepParam::Rounds: return "T";
  }
  return "";
}

StlpConfig with_param(StlpConfig config, SweepParam param, double value) {
  switch (param) {
    case SweepParam::TopV: config.refine.top_v = value; break;
    case SweepParam::Alpha: config.refine.alpha = value; break;
    case SweepParam::Rounds:
      if (value != static_cast<double>(static_cast<int>(value)))
        throw std::invalid_argument("T sweep values must be integers");
      config.rounds = static_cast<int>(value);
      break;
  }
  config.validate();
  return config;
}

std::vector<SweepRow> run_sweep(const std::vector<SceneBundle>& scenes, SweepParam param,
                                const std::vector<double>& grid, const StlpConfig& base,
                                int jobs) {
  std::vector<StlpConfig> configs;
  for (double x : grid) configs.push_back(with_param(base, param, x));

  std::vector<std::vector<SettingScore>> results(scenes.size(),
                                                 std::vector<SettingScore>(grid.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(scenes.size());
  auto worker = [&] {
    for (std::size_t s; (s = next.fetch_add(1)) < scenes.size();) {
      try {
        for (std::size_t g = 0; g < grid.size(); ++g)
          results[s][g] = evaluate_setting(scenes[s], configs[g]);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, scenes.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  auto mean = [](const std::vector<std::optional<double>>& v) -> std::optional<double> {
    double sum = 0.0;
    int n = 0;
    for (const auto& x : v)
      if (x) sum += *x, ++n;
    if (n == 0) return std::nullopt;
    return sum / n;
  };

  std::vector<SweepRow> rows;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<std::optional<double>> miou, macc, rate, label_miou;
    for (const auto& per_scene : results) {
      const auto& r = per_scene[g];
      miou.push_back(r.miou);
      macc.push_back(r.macc);
      rate.push_back(r.labeled_rate);
      label_miou.push_back(r.label_miou);
    }
    SweepRow row;
    row.x = grid[g];
    row.mean.miou = mean(miou);
    row.mean.macc = mean(macc);
    row.mean.labeled_rate = mean(rate).value_or(0.0);
    row.mean.label_miou = mean(label_miou);
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  auto field = [](const std::optional<double>& v) {
    if (!v) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << "x,miou,macc,labeled_rate,label_miou\n";
  for (const auto& r : rows) {
    char x[32];
    std::snprintf(x, sizeof x, "%g", r.x);
    out << x << ',' << field(r.mean.miou) << ',' << field(r.mean.macc) << ','
        << field(r.mean.labeled_rate) << ',' << field(r.mean.label_miou) << '\n';
  }
  return out.str();
}

}  // namespace wsseg
