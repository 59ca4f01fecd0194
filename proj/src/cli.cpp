#include "wsseg/cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "wsseg/errors.hpp"
#include "wsseg/metrics.hpp"
#include "wsseg/ply_io.hpp"
#include "wsseg/synth.hpp"
#include "wsseg/tensor_io.hpp"
#include "wsseg/view_io.hpp"

namespace wsseg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void PipelineConfig::validate() const {
  refine.validate();
  stlp_config().validate();
  const auto& sp = superpoints.params;
  if (!(sp.angle_threshold_deg > 0.0 && sp.angle_threshold_deg <= 180.0))
    throw std::invalid_argument("angle threshold must be in (0, 180]");
  if (sp.adjacency_k < 1) throw std::invalid_argument("adjacency_k must be >= 1");
  if (sp.min_size < 1) throw std::invalid_argument("min_size must be >= 1");
  if (!(sp.edge_length_percentile > 0.0 && sp.edge_length_percentile <= 100.0))
    throw std::invalid_argument("edge_length_percentile must be in (0, 100]");
  if (superpoints.normal_neighbors < 3) throw std::invalid_argument("normal_neighbors must be >= 3");
  if (stlp.classifier.neighbors < 1) throw std::invalid_argument("neighbors must be >= 1");
  if (!(stlp.classifier.color_weight >= 0.0))
    throw std::invalid_argument("color_weight must be >= 0");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
}

StlpConfig PipelineConfig::stlp_config() const {
  StlpConfig c = stlp;
  c.refine = refine;
  c.seed = seed;
  return c;
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

UpdateMode parse_update(const std::string& s) {
  if (s == "retained") return UpdateMode::Retained;
  if (s == "full") return UpdateMode::Full;
  throw std::invalid_argument("update mode must be 'retained' or 'full', got '" + s + "'");
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).string();
}

}  // namespace

PipelineConfig config_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw DataError("config must be a JSON object");
  PipelineConfig c;
  try {
    for (auto [key, field] : {std::pair{"cloud", &c.cloud}, {"logits", &c.logits},
                              {"views", &c.views}, {"prototypes", &c.prototypes},
                              {"mask", &c.mask}, {"classes", &c.classes},
                              {"partition", &c.partition}, {"gt", &c.gt},
                              {"labels", &c.labels}, {"confidence", &c.confidence},
                              {"out", &c.out}}) {
      maybe(j, key, *field);
      *field = resolve(*field, base_dir);
    }
    maybe(j, "seed", c.seed);
    maybe(j, "jobs", c.jobs);
    if (j.contains("refine")) {
      const auto& r = j.at("refine");
      maybe(r, "top_v", c.refine.top_v);
      maybe(r, "alpha", c.refine.alpha);
    }
    if (j.contains("stlp")) {
      const auto& s = j.at("stlp");
      maybe(s, "rounds", c.stlp.rounds);
      if (s.contains("update")) c.stlp.update = parse_update(s.at("update").get<std::string>());
      if (s.contains("classifier")) {
        const auto& k = s.at("classifier");
        maybe(k, "neighbors", c.stlp.classifier.neighbors);
        maybe(k, "color_weight", c.stlp.classifier.color_weight);
      }
    }
    if (j.contains("superpoint")) {
      const auto& s = j.at("superpoint");
      auto& p = c.superpoints.params;
      maybe(s, "angle_threshold", p.angle_threshold_deg);
      maybe(s, "adjacency_k", p.adjacency_k);
      maybe(s, "min_size", p.min_size);
      maybe(s, "edge_length_percentile", p.edge_length_percentile);
      maybe(s, "max_curvature", p.max_curvature);
      maybe(s, "normal_neighbors", c.superpoints.normal_neighbors);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return config_from_json(j, fs::path(path).parent_path().string());
}

json to_json(const PipelineConfig& c) {
  const auto& p = c.superpoints.params;
  return {{"cloud", c.cloud},
          {"logits", c.logits},
          {"views", c.views},
          {"prototypes", c.prototypes},
          {"mask", c.mask},
          {"classes", c.classes},
          {"partition", c.partition},
          {"gt", c.gt},
          {"labels", c.labels},
          {"confidence", c.confidence},
          {"out", c.out},
          {"seed", c.seed},
          {"jobs", c.jobs},
          {"refine", {{"top_v", c.refine.top_v}, {"alpha", c.refine.alpha}}},
          {"stlp",
           {{"rounds", c.stlp.rounds},
            {"update", c.stlp.update == UpdateMode::Retained ? "retained" : "full"},
            {"classifier",
             {{"neighbors", c.stlp.classifier.neighbors},
              {"color_weight", c.stlp.classifier.color_weight}}}}},
          {"superpoint",
           {{"angle_threshold", p.angle_threshold_deg},
            {"adjacency_k", p.adjacency_k},
            {"min_size", p.min_size},
            {"edge_length_percentile", p.edge_length_percentile},
            {"max_curvature", p.max_curvature},
            {"normal_neighbors", c.superpoints.normal_neighbors}}}};
}

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Flag values; unset ones leave the config untouched.
struct Overrides {
  std::string config_path;
  std::optional<std::string> cloud, logits, views, prototypes, mask, classes, partition, gt,
      labels, confidence, out;
  std::optional<double> top_v, alpha, angle_threshold, color_weight;
  std::optional<int> rounds, jobs, neighbors, min_size;
  std::optional<std::string> update;
  std::optional<std::uint64_t> seed;
  bool json = false;

  // subcommand-specific
  std::string spec, scene_preset = "room-small", noise_preset = "paper-like";
  bool no_views = false;
  bool no_galr = false, unlabeled_on_reject = false;
  std::string pred;
  int bins = 4;
  std::string param;
  std::vector<double> grid;
  std::vector<std::uint64_t> seeds;
};

PipelineConfig effective_config(const Overrides& o) {
  PipelineConfig c = o.config_path.empty() ? PipelineConfig{} : load_config(o.config_path);
  auto set = [](std::string& field, const std::optional<std::string>& v) {
    if (v) field = *v;
  };
  set(c.cloud, o.cloud);
  set(c.logits, o.logits);
  set(c.views, o.views);
  set(c.prototypes, o.prototypes);
  set(c.mask, o.mask);
  set(c.classes, o.classes);
  set(c.partition, o.partition);
  set(c.gt, o.gt);
  set(c.labels, o.labels);
  set(c.confidence, o.confidence);
  set(c.out, o.out);
  if (o.top_v) c.refine.top_v = *o.top_v;
  if (o.alpha) c.refine.alpha = *o.alpha;
  if (o.rounds) c.stlp.rounds = *o.rounds;
  if (o.update) c.stlp.update = parse_update(*o.update);
  if (o.neighbors) c.stlp.classifier.neighbors = *o.neighbors;
  if (o.color_weight) c.stlp.classifier.color_weight = *o.color_weight;
  if (o.angle_threshold) c.superpoints.params.angle_threshold_deg = *o.angle_threshold;
  if (o.min_size) c.superpoints.params.min_size = *o.min_size;
  if (o.seed) c.seed = *o.seed;
  if (o.jobs) c.jobs = *o.jobs;
  c.validate();
  return c;
}

const std::string& require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required input ") + flag);
  return value;
}

fs::path out_dir(const PipelineConfig& c) {
  const fs::path dir = require(c.out, "--out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

// Class names: --classes, else a classes.json next to one of the inputs,
// else the default synthetic palette.
std::vector<std::string> resolve_classes(const PipelineConfig& c) {
  if (!c.classes.empty()) return read_class_names(c.classes);
  for (const auto* p : {&c.mask, &c.cloud, &c.gt, &c.labels, &c.logits}) {
    if (p->empty()) continue;
    const auto sibling = fs::path(*p).parent_path() / "classes.json";
    if (fs::exists(sibling)) return read_class_names(sibling.string());
  }
  return class_names(default_palette());
}

SceneMask resolve_mask(const PipelineConfig& c, const std::vector<std::string>& classes) {
  if (c.mask.empty()) return SceneMask::Constant(static_cast<Eigen::Index>(classes.size()), true);
  return read_scene_mask(c.mask, classes);
}

SuperpointPartition resolve_partition(const PipelineConfig& c, const PointCloud* cloud,
                                      const fs::path& dir, bool& computed) {
  computed = false;
  if (!c.partition.empty()) return read_partition_json(c.partition);
  if (!cloud) throw UsageError("missing required input --partition (or --cloud to compute one)");
  computed = true;
  auto partition = compute_partition(*cloud, c.superpoints);
  write_partition_json(partition, (dir / "partition.json").string());
  return partition;
}

void check_size(Eigen::Index got, Eigen::Index want, const std::string& what) {
  if (got != want)
    throw DataError(what + " has " + std::to_string(got) + " entries, expected " +
                    std::to_string(want));
}

ConfidenceField read_confidence(const std::string& path) {
  const auto t = read_lf01(path);
  if (t.cols() != 1)
    throw DataError(path + ": confidence tensor must have 1 column, has " +
                    std::to_string(t.cols()));
  return t.col(0);
}

void write_confidence(const ConfidenceField& conf, const std::string& path) {
  write_lf01(RowMatrixXf(conf), path);
}

// Collects human-readable lines or one JSON object, depending on --json.
class Report {
 public:
  Report(std::ostream& out, bool as_json) : out_(out), json_(as_json) {}
  void line(const std::string& s) {
    if (!json_) out_ << s << '\n';
  }
  json& doc() { return doc_; }
  void finish() {
    if (json_) out_ << doc_.dump() << '\n';
  }

 private:
  std::ostream& out_;
  bool json_;
  json doc_ = json::object();
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

void cmd_synth(const Overrides& o, Report& report) {
  std::uint64_t seed = o.seed.value_or(0);
  json spec = json::object();
  if (!o.spec.empty()) {
    std::ifstream in(o.spec);
    if (!in) throw IoError("cannot open spec '" + o.spec + "'");
    try {
      spec = json::parse(in);
    } catch (const json::exception& e) {
      throw DataError(o.spec + ": " + e.what());
    }
    if (!spec.is_object()) throw DataError(o.spec + ": spec must be a JSON object");
    if (!o.seed && spec.contains("seed")) seed = spec.at("seed").get<std::uint64_t>();
  }
  json scene_j = spec.value("scene", json::object());
  json noise_j = spec.value("noise", json::object());
  const json ring_j = spec.value("ring", json::object());
  if (!scene_j.contains("preset")) scene_j["preset"] = o.scene_preset;
  if (!noise_j.contains("preset")) noise_j["preset"] = o.noise_preset;
  if (o.seed || !scene_j.contains("seed")) scene_j["seed"] = seed;
  if (o.seed || !noise_j.contains("seed")) noise_j["seed"] = seed;

  const auto scene_spec = scene_spec_from_json(scene_j);
  const auto noise_spec = noise_spec_from_json(noise_j);
  const auto ring = ring_spec_from_json(ring_j);

  const auto scene = generate_scene(scene_spec);
  const auto logits = corrupt_logits(scene.ground_truth, scene.cloud, noise_spec);
  const auto names = class_names(scene_spec.palette);

  PipelineConfig c;
  c.out = require(o.out.value_or(""), "--out");
  const auto dir = out_dir(c);
  save_ply(scene.cloud, (dir / "cloud.ply").string());
  save_ply(scene.cloud, scene.ground_truth, (dir / "gt.ply").string());
  write_scene_mask(scene.mask, names, (dir / "mask.json").string());
  write_class_names(names, (dir / "classes.json").string());
  write_lf01(logits, (dir / "logits.lf01").string());
  std::size_t view_count = 0;
  if (!o.no_views) {
    fs::create_directories(dir / "views");
    const Eigen::Vector3d center(scene_spec.extents.x() / 2, scene_spec.extents.y() / 2, 0.0);
    const auto views = render_views(scene.cloud, logits, ring, center);
    write_view_manifest(views, (dir / "views" / "manifest.json").string());
    view_count = views.size();
  }

  report.line("synthesized " + std::to_string(scene.cloud.size()) + " points, " +
              std::to_string(scene.mask.count()) + " classes present, " +
              std::to_string(view_count) + " views -> " + dir.string());
  report.doc() = {{"points", scene.cloud.size()},
                  {"classes_present", scene.mask.count()},
                  {"views", view_count},
                  {"out", dir.string()}};
}

void cmd_pseudo(const PipelineConfig& c, Report& report) {
  const auto dir = out_dir(c);
  const auto classes = resolve_classes(c);
  const auto mask = resolve_mask(c, classes);

  std::optional<PointCloud> cloud;
  if (!c.cloud.empty()) cloud = load_ply(c.cloud);

  LogitField logits;
  std::optional<Eigen::VectorXi> hits;
  if (!c.views.empty()) {
    if (!cloud) throw UsageError("--views needs --cloud");
    const auto views = read_view_manifest(c.views);
    if (views.empty()) throw DataError(c.views + ": no views");
    auto agg = aggregate_views(*cloud, views);
    if (views.front().kind == PayloadKind::Embeddings) {
      TextEmbeddings text;
      text.prototypes = read_lf01(require(c.prototypes, "--prototypes"));
      text.class_names = classes;
      logits = compute_logits(agg.values, text);
    } else {
      logits = std::move(agg.values);
    }
    hits = std::move(agg.hit_count);
  } else {
    logits = read_lf01(require(c.logits, "--logits or --views"));
    if (cloud) check_size(logits.rows(), cloud->size(), c.logits);
  }
  check_size(logits.cols(), static_cast<Eigen::Index>(classes.size()), "logit row (classes)");

  auto pseudo = rank_to_pseudo_labels(apply_scene_mask(logits, mask));
  if (hits) drop_unobserved(pseudo, *hits);

  const auto labels_path = (dir / "pseudo_labels.txt").string();
  const auto conf_path = (dir / "confidence.lf01").string();
  write_label_text(pseudo.labels, labels_path);
  write_confidence(pseudo.confidence, conf_path);

  const double rate = labeled_rate(pseudo.labels);
  report.line("pseudo labels for " + std::to_string(pseudo.labels.size()) +
              " points, labeled rate " + fmt(rate) + " -> " + labels_path);
  report.doc() = {{"points", pseudo.labels.size()},
                  {"labeled_rate", rate},
                  {"labels", labels_path},
                  {"confidence", conf_path}};
}

void cmd_refine(const PipelineConfig& c, Report& report) {
  const auto dir = out_dir(c);
  const auto classes = resolve_classes(c);
  const auto labels = read_labels(require(c.labels, "--labels"), static_cast<int>(classes.size()));
  const auto conf = read_confidence(require(c.confidence, "--confidence"));
  check_size(conf.size(), labels.size(), c.confidence);

  std::optional<PointCloud> cloud;
  if (c.partition.empty() && !c.cloud.empty()) cloud = load_ply(c.cloud);
  bool computed = false;
  const auto partition = resolve_partition(c, cloud ? &*cloud : nullptr, dir, computed);
  check_size(partition.point_count(), labels.size(), "partition");

  const auto refined = refine_pipeline(labels, conf, partition, c.refine);
  const auto path = (dir / "refined_labels.txt").string();
  write_label_text(refined, path);

  const double rate = labeled_rate(refined);
  report.line("refined " + std::to_string(refined.size()) + " labels over " +
              std::to_string(partition.segment_count()) + " superpoints, labeled rate " +
              fmt(rate) + " -> " + path);
  report.doc() = {{"points", refined.size()},
                  {"superpoints", partition.segment_count()},
                  {"labeled_rate", rate},
                  {"labels", path}};
  if (computed) report.doc()["partition"] = (dir / "partition.json").string();
}

void cmd_stlp(const PipelineConfig& c, Report& report) {
  const auto dir = out_dir(c);
  const auto classes = resolve_classes(c);
  const int n_classes = static_cast<int>(classes.size());
  const auto cloud = load_ply(require(c.cloud, "--cloud"));
  const auto y0 = read_labels(require(c.labels, "--labels"), n_classes);
  check_size(y0.size(), cloud.size(), c.labels);
  const auto mask = resolve_mask(c, classes);
  std::optional<LabelField> gt;
  if (!c.gt.empty()) {
    gt = read_labels(c.gt, n_classes);
    check_size(gt->size(), cloud.size(), c.gt);
  }
  bool computed = false;
  const auto partition = resolve_partition(c, &cloud, dir, computed);
  check_size(partition.point_count(), cloud.size(), "partition");

  KnnClassifier knn(c.stlp.classifier);
  const auto result = stlp_run(cloud, y0, partition, mask, knn, c.stlp_config(),
                               gt ? &*gt : nullptr);

  const auto labels_path = (dir / "labels.txt").string();
  const auto report_path = (dir / "report.jsonl").string();
  write_label_text(result.labels, labels_path);
  std::ofstream rep(report_path);
  if (!rep) throw IoError("cannot write '" + report_path + "'");
  json rows = json::array();
  for (const auto& r : result.report) {
    const auto row = round_report_to_json(r);
    rep << row.dump() << '\n';
    rows.push_back(row);
    std::string msg = "round " + std::to_string(r.round) + ": labeled rate " + fmt(r.labeled_rate);
    if (r.score) msg += ", mIoU " + fmt(r.score->miou);
    report.line(msg);
  }
  report.line("final labels -> " + labels_path);
  report.doc() = {{"labels", labels_path},
                  {"report", report_path},
                  {"rounds", rows},
                  {"labeled_rate", labeled_rate(result.labels)}};
}

void cmd_infer(const PipelineConfig& c, const Overrides& o, Report& report) {
  const auto dir = out_dir(c);
  const auto classes = resolve_classes(c);
  const int n_classes = static_cast<int>(classes.size());
  const auto cloud = load_ply(require(c.cloud, "--cloud"));
  const auto train = read_labels(require(c.labels, "--labels"), n_classes);
  check_size(train.size(), cloud.size(), c.labels);
  bool computed = false;
  const auto partition = resolve_partition(c, &cloud, dir, computed);
  check_size(partition.point_count(), cloud.size(), "partition");

  KnnClassifier knn(c.stlp.classifier);
  knn.fit(cloud, train);
  InferOptions opts;
  opts.use_galr = !o.no_galr;
  opts.unlabeled_on_reject = o.unlabeled_on_reject;
  const auto pred = infer(cloud, knn, partition, c.refine.alpha, opts);

  const auto path = (dir / "predictions.txt").string();
  write_label_text(pred, path);
  report.line("predicted " + std::to_string(pred.size()) + " points -> " + path);
  report.doc() = {{"points", pred.size()}, {"labels", path}, {"labeled_rate", labeled_rate(pred)}};
  if (!c.gt.empty()) {
    const auto gt = read_labels(c.gt, n_classes);
    check_size(gt.size(), pred.size(), c.gt);
    const auto s = score(pred, gt);
    report.line("mIoU " + fmt(s.miou) + ", mAcc " + fmt(s.macc));
    report.doc()["miou"] = s.miou;
    report.doc()["macc"] = s.macc;
  }
}

void cmd_eval(const PipelineConfig& c, const Overrides& o, Report& report) {
  const auto classes = resolve_classes(c);
  const int n_classes = static_cast<int>(classes.size());
  const auto pred = read_labels(require(o.pred, "--pred"), n_classes);
  const auto gt = read_labels(require(c.gt, "--gt"), n_classes);
  check_size(pred.size(), gt.size(), o.pred);

  const auto s = score(pred, gt);
  report.line(score_to_table(s, classes));
  report.line("labeled rate " + fmt(labeled_rate(pred)));
  json doc = score_to_json(s, classes);
  doc["labeled_rate"] = labeled_rate(pred);

  if (!c.confidence.empty()) {
    const auto conf = read_confidence(c.confidence);
    check_size(conf.size(), pred.size(), c.confidence);
    if (o.bins < 1) throw UsageError("--bins must be >= 1");
    const auto edges = quantile_edges(pred, conf, o.bins);
    json bins = json::array();
    for (const auto& b : confidence_bins(pred, conf, gt, edges)) {
      json jb = {{"lower", b.lower}, {"upper", b.upper}, {"count", b.count}, {"share", b.share}};
      jb["accuracy"] = b.accuracy ? json(*b.accuracy) : json(nullptr);
      bins.push_back(jb);
      report.line("confidence [" + fmt(b.lower, 3) + ", " + fmt(b.upper, 3) + "]: " +
                  std::to_string(b.count) + " points, accuracy " +
                  (b.accuracy ? fmt(*b.accuracy) : std::string("n/a")));
    }
    doc["confidence_bins"] = bins;
  }
  if (!c.out.empty()) {
    const auto dir = out_dir(c);
    std::ofstream(dir / "metrics.json") << doc.dump(2) << '\n';
  }
  report.doc() = doc;
}

void cmd_sweep(const PipelineConfig& c, const Overrides& o, Report& report) {
  const auto param = parse_sweep_param(o.param);
  if (o.grid.empty()) throw UsageError("--grid needs at least one value");

  std::vector<SceneBundle> scenes;
  if (!c.cloud.empty()) {
    const auto classes = resolve_classes(c);
    const int n_classes = static_cast<int>(classes.size());
    SceneBundle b;
    b.cloud = load_ply(c.cloud);
    b.mask = resolve_mask(c, classes);
    b.ground_truth = read_labels(require(c.gt, "--gt"), n_classes);
    check_size(b.ground_truth.size(), b.cloud.size(), c.gt);
    const auto logits = read_lf01(require(c.logits, "--logits"));
    check_size(logits.rows(), b.cloud.size(), c.logits);
    check_size(logits.cols(), n_classes, "logit row (classes)");
    b.pseudo = rank_to_pseudo_labels(apply_scene_mask(logits, b.mask));
    b.partition = c.partition.empty() ? compute_partition(b.cloud, c.superpoints)
                                      : read_partition_json(c.partition);
    check_size(b.partition.point_count(), b.cloud.size(), "partition");
    scenes.push_back(std::move(b));
  } else {
    auto seeds = o.seeds;
    if (seeds.empty()) seeds = o.seed ? std::vector<std::uint64_t>{*o.seed} : standard_seeds();
    scenes.resize(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < seeds.size();) {
        try {
          scenes[i] = synth_bundle(o.scene_preset, o.noise_preset, seeds[i], c.superpoints);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    const int workers = std::min<int>(c.jobs, static_cast<int>(seeds.size()));
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  const auto rows = run_sweep(scenes, param, o.grid, c.stlp_config(), c.jobs);
  const auto csv = sweep_to_csv(rows);
  if (!c.out.empty()) {
    const fs::path path = c.out;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw IoError("cannot write '" + c.out + "'");
    f << csv;
    report.line("wrote " + std::to_string(rows.size()) + " rows (" + sweep_param_name(param) +
                " sweep over " + std::to_string(scenes.size()) + " scenes) -> " + c.out);
  } else {
    report.line(csv.substr(0, csv.size() - 1));
  }
  json jrows = json::array();
  for (const auto& r : rows) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    jrows.push_back({{"x", r.x},
                     {"miou", opt(r.mean.miou)},
                     {"macc", opt(r.mean.macc)},
                     {"labeled_rate", r.mean.labeled_rate},
                     {"label_miou", opt(r.mean.label_miou)}});
  }
  report.doc() = {{"param", sweep_param_name(param)}, {"scenes", scenes.size()}, {"rows", jrows}};
}

void add_paths(CLI::App* sub, Overrides& o, const std::vector<std::string>& which) {
  const std::vector<std::tuple<std::string, std::optional<std::string>*, std::string>> all = {
      {"cloud", &o.cloud, "point cloud PLY"},
      {"logits", &o.logits, "per-point logits (LF01, N x C)"},
      {"views", &o.views, "view manifest JSON"},
      {"prototypes", &o.prototypes, "class prototype embeddings (LF01, C x d)"},
      {"mask", &o.mask, "scene mask JSON (class names present)"},
      {"classes", &o.classes, "class list JSON"},
      {"partition", &o.partition, "superpoint partition JSON"},
      {"gt", &o.gt, "ground-truth labels (PLY or text)"},
      {"labels", &o.labels, "input labels (PLY or text)"},
      {"confidence", &o.confidence, "confidences (LF01, N x 1)"},
  };
  for (const auto& [name, field, help] : all)
    if (std::find(which.begin(), which.end(), name) != which.end())
      sub->add_option("--" + name, *field, help);
}

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "JSON config; flags override its values");
  sub->add_option("--out", o.out, "output location");
  sub->add_option("--seed", o.seed, "seed for all stochastic stages");
  sub->add_option("--jobs", o.jobs, "worker threads across scenes");
  sub->add_flag("--json", o.json, "print a JSON summary on stdout");
}

void add_refine_params(CLI::App* sub, Overrides& o) {
  sub->add_option("--top-v", o.top_v, "CALR retained percent per class (default 30)");
  sub->add_option("--alpha", o.alpha, "GALR overlap threshold (default 0.5)");
}

void add_superpoint_params(CLI::App* sub, Overrides& o) {
  sub->add_option("--angle-threshold", o.angle_threshold,
                  "region-growing normal angle threshold in degrees (default 15)");
  sub->add_option("--min-size", o.min_size, "minimum superpoint size (default 20)");
}

void add_stlp_params(CLI::App* sub, Overrides& o) {
  sub->add_option("--rounds", o.rounds, "self-training rounds (default 2)");
  sub->add_option("--update", o.update, "label update mode: retained or full");
  sub->add_option("--neighbors", o.neighbors, "classifier neighbors (default 15)");
  sub->add_option("--color-weight", o.color_weight, "classifier color weight (default 0.5)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weakly supervised point cloud segmentation toolkit", "wsseg"};
  app.require_subcommand(1);
  Overrides o;

  auto* synth = app.add_subcommand("synth", "generate a synthetic scene with noisy logits");
  add_common(synth, o);
  synth->add_option("--spec", o.spec, "scene/noise/ring spec JSON");
  synth->add_option("--preset", o.scene_preset, "scene preset (room-small, room-large, empty-room)");
  synth->add_option("--noise-preset", o.noise_preset, "logit noise preset (paper-like, clean)");
  synth->add_flag("--no-views", o.no_views, "skip rendering camera views");

  auto* pseudo = app.add_subcommand("pseudo", "rank logits into pseudo labels and confidences");
  add_common(pseudo, o);
  add_paths(pseudo, o, {"cloud", "logits", "views", "prototypes", "mask", "classes"});

  auto* refine = app.add_subcommand("refine", "CALR then GALR refinement of pseudo labels");
  add_common(refine, o);
  add_paths(refine, o, {"cloud", "labels", "confidence", "partition", "classes"});
  add_refine_params(refine, o);
  add_superpoint_params(refine, o);

  auto* stlp = app.add_subcommand("stlp", "self-training with label propagation");
  add_common(stlp, o);
  add_paths(stlp, o, {"cloud", "labels", "partition", "mask", "classes", "gt"});
  add_refine_params(stlp, o);
  add_superpoint_params(stlp, o);
  add_stlp_params(stlp, o);

  auto* inf = app.add_subcommand("infer", "fit the classifier and label every point");
  add_common(inf, o);
  add_paths(inf, o, {"cloud", "labels", "partition", "classes", "gt"});
  add_refine_params(inf, o);
  add_superpoint_params(inf, o);
  add_stlp_params(inf, o);
  inf->add_flag("--no-galr", o.no_galr, "skip the superpoint vote");
  inf->add_flag("--unlabeled-on-reject", o.unlabeled_on_reject,
                "mark rejected superpoints unlabeled instead of keeping raw predictions");

  auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
  add_common(eval, o);
  add_paths(eval, o, {"gt", "classes", "confidence"});
  eval->add_option("--pred", o.pred, "predicted labels (PLY or text)");
  eval->add_option("--bins", o.bins, "confidence bins (quantiles) when --confidence is given");

  auto* sweep = app.add_subcommand("sweep", "sweep V, alpha or T and emit CSV");
  add_common(sweep, o);
  add_paths(sweep, o, {"cloud", "logits", "mask", "classes", "partition", "gt"});
  add_refine_params(sweep, o);
  add_superpoint_params(sweep, o);
  add_stlp_params(sweep, o);
  sweep->add_option("--param", o.param, "V, alpha or T")->required();
  sweep->add_option("--grid", o.grid, "values to evaluate")->required()->delimiter(',');
  sweep->add_option("--preset", o.scene_preset, "scene preset when no --cloud is given");
  sweep->add_option("--noise-preset", o.noise_preset, "logit noise preset");
  sweep->add_option("--seeds", o.seeds, "scene seeds (default 1..5)")->delimiter(',');

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  Report report(out, o.json);
  try {
    if (synth->parsed()) {
      cmd_synth(o, report);
    } else {
      const auto c = effective_config(o);
      if (pseudo->parsed()) cmd_pseudo(c, report);
      else if (refine->parsed()) cmd_refine(c, report);
      else if (stlp->parsed()) cmd_stlp(c, report);
      else if (inf->parsed()) cmd_infer(c, o, report);
      else if (eval->parsed()) cmd_eval(c, o, report);
      else if (sweep->parsed()) cmd_sweep(c, o, report);
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  report.finish();
  return kExitOk;
}

}  // namespace wsseg::cli
