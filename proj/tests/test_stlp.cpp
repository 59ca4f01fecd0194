#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "test_util.hpp"
#include "wsseg/pipeline.hpp"
#include "wsseg/stlp.hpp"
#include "wsseg/synth.hpp"

using namespace wsseg;

namespace {

// Returns a fixed prediction regardless of what it was fitted on.
class StubClassifier final : public Classifier {
 public:
  explicit StubClassifier(Prediction p) : prediction_(std::move(p)) {}
  void fit(const PointCloud&, const LabelField& labels) override {
    ++fits;
    last_fit = labels;
  }
  Prediction predict(const PointCloud&) const override { return prediction_; }
  bool fitted() const override { return fits > 0; }

  int fits = 0;
  LabelField last_fit;

 private:
  Prediction prediction_;
};

SuperpointPartition singletons(Eigen::Index n) {
  return SuperpointPartition::from_assignment(Eigen::VectorXi::LinSpaced(n, 0, static_cast<int>(n - 1)));
}

SuperpointPartition one_block(Eigen::Index n) {
  return SuperpointPartition::from_assignment(Eigen::VectorXi::Zero(n));
}

SceneMask all_classes(int c) { return SceneMask::Constant(c, true); }

Scene small_scene(std::uint64_t seed) {
  auto spec = scene_preset("room-small", seed);
  spec.density = 60.0;
  return generate_scene(spec);
}

// One ground-truth label per generating surface, everything else unlabeled.
LabelField one_seed_per_surface(const Scene& scene) {
  LabelField y(scene.ground_truth.size(), scene.ground_truth.num_classes);
  std::vector<bool> seen(static_cast<std::size_t>(scene.surface.maxCoeff() + 1), false);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const auto s = static_cast<std::size_t>(scene.surface[i]);
    if (!seen[s] && scene.ground_truth.is_labeled(i)) {
      seen[s] = true;
      y[i] = scene.ground_truth[i];
    }
  }
  return y;
}

}  // namespace

TEST_SUITE("label_update") {
  TEST_CASE("fills the most confident open positions per class") {
    LabelField prev(Eigen::VectorXi{{0, -1, -1, -1}}, 2);
    LabelField pred(Eigen::VectorXi{{1, 1, 1, 1}}, 2);
    ConfidenceField conf(4);
    conf << 1.0f, 0.9f, 0.5f, 0.1f;
    const auto out = label_update(prev, pred, conf, all_classes(2), 34.0);
    CHECK(out.labels == Eigen::Vector4i(0, 1, 1, -1));
  }

  TEST_CASE("full mode regenerates every position") {
    LabelField prev(Eigen::VectorXi{{0, 0, -1, -1}}, 2);
    LabelField pred(Eigen::VectorXi{{1, 1, 1, 0}}, 2);
    ConfidenceField conf(4);
    conf << 0.2f, 0.9f, 0.5f, 0.7f;
    const auto out = label_update(prev, pred, conf, all_classes(2), 50.0, UpdateMode::Full);
    CHECK(out.labels == Eigen::Vector4i(-1, 1, 1, 0));
  }

  TEST_CASE("masked classes are never introduced") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = std::uniform_int_distribution<int>(1, 100)(rng);
      const int c = std::uniform_int_distribution<int>(2, 6)(rng);
      SceneMask mask(c);
      for (int k = 0; k < c; ++k) mask[k] = std::bernoulli_distribution(0.5)(rng);
      mask[0] = true;
      LabelField prev(n, c), pred(n, c);
      ConfidenceField conf(n);
      for (int i = 0; i < n; ++i) {
        if (std::bernoulli_distribution(0.3)(rng)) prev[i] = 0;
        pred[i] = std::uniform_int_distribution<int>(0, c - 1)(rng);
        conf[i] = std::uniform_real_distribution<float>(0, 1)(rng);
      }
      for (auto mode : {UpdateMode::Retained, UpdateMode::Full}) {
        const auto out = label_update(prev, pred, conf, mask, 60.0, mode);
        for (int i = 0; i < n; ++i) {
          if (out[i] == kUnlabeled) continue;
          CHECK(mask[out[i]]);
          if (mode == UpdateMode::Retained && prev.is_labeled(i)) CHECK(out[i] == prev[i]);
          if (!prev.is_labeled(i) || mode == UpdateMode::Full) CHECK(out[i] == pred[i]);
        }
      }
    }
  }

  TEST_CASE("size and mask mismatches") {
    LabelField prev(3, 2), pred(4, 2);
    CHECK_THROWS_AS(label_update(prev, pred, ConfidenceField::Zero(4), all_classes(2), 30.0),
                    DataError);
    CHECK_THROWS_AS(label_update(prev, prev, ConfidenceField::Zero(3), all_classes(3), 30.0),
                    DataError);
  }
}

TEST_SUITE("knn classifier") {
  TEST_CASE("one neighbour reproduces the training labels") {
    const auto cloud = test::random_cloud(300, 5);
    LabelField labels(300, 4);
    for (int i = 0; i < 300; ++i) labels[i] = i % 4;
    KnnClassifier knn({1, 0.5, 1e-6});
    knn.fit(cloud, labels);
    const auto p = knn.predict(cloud);
    CHECK(p.labels == labels);
    CHECK((p.confidence.array() == 1.0f).all());
  }

  TEST_CASE("fit learns only from labeled points") {
    const auto cloud = test::random_cloud(50, 6);
    LabelField labels(50, 3);
    for (int i = 0; i < 50; i += 5) labels[i] = 2;
    KnnClassifier knn;
    knn.fit(cloud, labels);
    CHECK(knn.exemplar_count() == 10);
    const auto p = knn.predict(cloud);
    CHECK(p.labels.labeled_count() == 50);
    CHECK((p.labels.labels.array() == 2).all());
  }

  TEST_CASE("use before fit") {
    KnnClassifier knn;
    CHECK_FALSE(knn.fitted());
    const auto cloud = test::random_cloud(5, 1);
    CHECK_THROWS_AS(knn.predict(cloud), NotFittedError);
    CHECK_THROWS_AS(infer(cloud, knn, one_block(5), 0.5), NotFittedError);
  }

  TEST_CASE("colour changes the vote") {
    PointCloud cloud(3);
    cloud.positions << 0.0, 0.1, 0.05, 0, 0, 0, 0, 0, 0;
    cloud.colors.col(0) << 255, 0, 0;
    cloud.colors.col(1) << 0, 0, 255;
    cloud.colors.col(2) << 0, 0, 250;
    KnnClassifier knn({1, 1.0, 1e-6});
    knn.fit(cloud, LabelField(Eigen::VectorXi{{0, 1, -1}}, 2));
    CHECK(knn.predict(cloud).labels[2] == 1);
  }
}

TEST_SUITE("stlp") {
  TEST_CASE("zero rounds pass the input through") {
    const auto scene = small_scene(1);
    const auto y0 = one_seed_per_surface(scene);
    KnnClassifier knn;
    StlpConfig config;
    config.rounds = 0;
    const auto r = stlp_run(scene.cloud, y0, compute_partition(scene.cloud, {}), scene.mask, knn, config);
    CHECK(r.labels == y0);
    CHECK(r.report.empty());
    CHECK(knn.fitted());
  }

  TEST_CASE("a classifier echoing its input is a fixed point") {
    const auto scene = small_scene(2);
    const auto partition = compute_partition(scene.cloud, {});
    // a block-constant, fully labeled field survives galr unchanged
    const auto y = galr(scene.ground_truth, partition, 0.0);
    REQUIRE(y.labeled_count() == y.size());
    StubClassifier stub({y, ConfidenceField::Ones(y.size())});
    StlpConfig config;
    config.rounds = 3;
    for (auto mode : {UpdateMode::Retained, UpdateMode::Full}) {
      config.update = mode;
      config.refine.top_v = 100.0;
      CHECK(stlp_run(scene.cloud, y, partition, scene.mask, stub, config).labels == y);
    }
    config.update = UpdateMode::Retained;
    config.refine.top_v = 30.0;
    CHECK(stlp_run(scene.cloud, y, partition, scene.mask, stub, config).labels == y);
  }

  TEST_CASE("labeled rate grows each round from one seed per surface") {
    const auto scene = small_scene(3);
    const auto y0 = one_seed_per_surface(scene);
    KnnClassifier knn;
    StlpConfig config;
    config.rounds = 4;
    const auto r = stlp_run(scene.cloud, y0, singletons(y0.size()), scene.mask, knn, config);
    REQUIRE(r.report.size() == 4);
    double previous = labeled_rate(y0);
    for (const auto& rep : r.report) {
      CHECK(rep.labeled_rate > previous);
      previous = rep.labeled_rate;
    }
  }

  TEST_CASE("retained mode keeps every earlier label before the block vote") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto scene = small_scene(seed);
      const auto partition = compute_partition(scene.cloud, {});
      const auto y0 = one_seed_per_surface(scene);
      KnnClassifier knn;
      StlpConfig config;
      config.rounds = 3;
      int calls = 0;
      stlp_run(scene.cloud, y0, partition, scene.mask, knn, config, &scene.ground_truth,
               [&](int round, const LabelField& before, const RoundResult& result) {
                 CHECK(round == ++calls);
                 for (Eigen::Index i = 0; i < before.size(); ++i)
                   if (before.is_labeled(i)) CHECK(result.updated[i] == before[i]);
                 for (Eigen::Index i = 0; i < before.size(); ++i)
                   if (!before.is_labeled(i) && result.updated.is_labeled(i))
                     CHECK(scene.mask[result.updated[i]]);
               });
      CHECK(calls == 3);
    }
  }

  TEST_CASE("out-of-mask predictions never become labels") {
    const auto scene = small_scene(4);
    const int masked = [&] {
      for (int c = 0; c < scene.mask.size(); ++c)
        if (!scene.mask[c]) return c;
      return -1;
    }();
    REQUIRE(masked >= 0);
    const auto n = scene.ground_truth.size();
    StubClassifier stub({LabelField(n, scene.ground_truth.num_classes, masked),
                         ConfidenceField::Ones(n)});
    StlpConfig config;
    config.rounds = 2;
    const auto y0 = one_seed_per_surface(scene);
    const auto r = stlp_run(scene.cloud, y0, singletons(n), scene.mask, stub, config);
    CHECK(r.labels == y0);
  }

  TEST_CASE("runs are deterministic") {
    const auto scene = small_scene(5);
    const auto partition = compute_partition(scene.cloud, {});
    const auto y0 = one_seed_per_surface(scene);
    StlpConfig config;
    KnnClassifier a, b;
    const auto ra = stlp_run(scene.cloud, y0, partition, scene.mask, a, config, &scene.ground_truth);
    const auto rb = stlp_run(scene.cloud, y0, partition, scene.mask, b, config, &scene.ground_truth);
    CHECK(ra.labels == rb.labels);
    REQUIRE(ra.report.size() == rb.report.size());
    for (std::size_t t = 0; t < ra.report.size(); ++t)
      CHECK(round_report_to_json(ra.report[t]).dump() == round_report_to_json(rb.report[t]).dump());
  }

  TEST_CASE("empty start and bad config") {
    const auto cloud = test::random_cloud(10, 2);
    KnnClassifier knn;
    StlpConfig config;
    CHECK_THROWS_AS(stlp_run(cloud, LabelField(10, 2), one_block(10), all_classes(2), knn, config),
                    DataError);
    config.rounds = -1;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  }

  TEST_CASE("report rows") {
    RoundReport r;
    r.round = 2;
    r.labeled_rate = 0.5;
    CHECK(round_report_to_json(r).dump() == R"({"labeled_rate":0.5,"round":2})");
    SegmentationScore s;
    s.miou = 0.25;
    s.macc = 0.5;
    s.per_class_iou = {0.25, std::nullopt};
    r.score = s;
    CHECK(round_report_to_json(r).dump() ==
          R"({"labeled_rate":0.5,"macc":0.5,"miou":0.25,"per_class_iou":[0.25,null],"round":2})");
  }
}

TEST_SUITE("infer") {
  Prediction sixty_forty() {
    Prediction p{LabelField(Eigen::VectorXi{{0, 0, 0, 1, 1}}, 2), ConfidenceField::Ones(5)};
    return p;
  }

  TEST_CASE("majority block takes one label") {
    StubClassifier stub(sixty_forty());
    stub.fit(PointCloud(5), LabelField(5, 2));
    const PointCloud cloud(5);
    CHECK(infer(cloud, stub, one_block(5), 0.5).labels == Eigen::VectorXi::Zero(5));
  }

  TEST_CASE("rejected blocks fall back to the raw prediction or stay unlabeled") {
    StubClassifier stub(sixty_forty());
    stub.fit(PointCloud(5), LabelField(5, 2));
    const PointCloud cloud(5);
    CHECK(infer(cloud, stub, one_block(5), 0.7) == sixty_forty().labels);
    InferOptions opts;
    opts.unlabeled_on_reject = true;
    CHECK(infer(cloud, stub, one_block(5), 0.7, opts).labeled_count() == 0);
    opts.use_galr = false;
    CHECK(infer(cloud, stub, one_block(5), 0.5, opts) == sixty_forty().labels);
  }
}
