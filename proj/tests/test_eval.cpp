#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "wsseg/errors.hpp"
#include "wsseg/metrics.hpp"

using namespace wsseg;

namespace {

LabelField field(std::initializer_list<int> v, int classes) {
  Eigen::VectorXi x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int c : v) x[i++] = c;
  return {x, classes};
}

}  // namespace

TEST_SUITE("miou") {
  TEST_CASE("three point example") {
    const auto s = score(field({0, 1, 1}, 2), field({0, 0, 1}, 2));
    CHECK(*s.per_class_iou[0] == doctest::Approx(0.5));
    CHECK(*s.per_class_iou[1] == doctest::Approx(0.5));
    CHECK(s.miou == doctest::Approx(0.5));
    CHECK(s.macc == doctest::Approx(0.75));
  }

  TEST_CASE("perfect prediction scores one") {
    const auto gt = field({0, 2, 2, 1, 0}, 4);
    const auto s = score(gt, gt);
    CHECK(s.miou == 1.0);
    CHECK(s.macc == 1.0);
    CHECK_FALSE(s.per_class_iou[3].has_value());
  }

  TEST_CASE("unlabeled points are ignored on either side") {
    const auto cm = confusion(field({0, -1, 1, 1}, 2), field({0, 1, -1, 1}, 2));
    CHECK(cm.ignored == 2);
    CHECK(cm.counted() == 2);
    CHECK(miou(cm).miou == 1.0);
  }

  TEST_CASE("class only in the prediction scores zero") {
    const auto s = score(field({0, 1}, 2), field({0, 0}, 2));
    CHECK(*s.per_class_iou[1] == 0.0);
    CHECK_FALSE(s.per_class_recall[1].has_value());
    CHECK(s.macc == doctest::Approx(0.5));
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(confusion(field({0}, 2), field({0, 1}, 2)), DataError);
    CHECK_THROWS_AS(confusion(field({0}, 2), field({0}, 3)), DataError);
    CHECK_THROWS_AS(score(field({-1, -1}, 2), field({0, 1}, 2)), DataError);
  }

  TEST_CASE("matches the set oracle and conserves points") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = std::uniform_int_distribution<int>(1, 300)(rng);
      const int c = std::uniform_int_distribution<int>(1, 8)(rng);
      std::uniform_int_distribution<int> label(-1, c - 1);
      LabelField pred(n, c), gt(n, c);
      for (int i = 0; i < n; ++i) pred[i] = label(rng), gt[i] = label(rng);
      const auto cm = confusion(pred, gt);
      CHECK(cm.counted() + cm.ignored == n);
      for (int k = 0; k < c; ++k) {
        Eigen::Index in_gt = 0;
        for (int i = 0; i < n; ++i) in_gt += gt[i] == k && pred.is_labeled(i);
        CHECK(cm.counts.row(k).sum() == in_gt);
      }
      if (cm.counted() == 0) continue;
      const auto s = miou(cm);
      const auto [iou, recall] = test::set_oracle(pred, gt);
      double sum = 0;
      int count = 0;
      for (int k = 0; k < c; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        REQUIRE(s.per_class_iou[kk].has_value() == iou[kk].has_value());
        if (iou[kk]) {
          CHECK(*s.per_class_iou[kk] == doctest::Approx(*iou[kk]));
          sum += *iou[kk];
          ++count;
        }
        REQUIRE(s.per_class_recall[kk].has_value() == recall[kk].has_value());
        if (recall[kk]) CHECK(*s.per_class_recall[kk] == doctest::Approx(*recall[kk]));
      }
      CHECK(s.miou == doctest::Approx(sum / count));
      CHECK(s.miou >= 0.0);
      CHECK(s.miou <= 1.0);
    }
  }
}

TEST_SUITE("confidence bins") {
  TEST_CASE("fixed edges") {
    const auto labels = field({0, 0, 1, 1, -1}, 2);
    const auto gt = field({0, 1, 1, 1, 0}, 2);
    ConfidenceField conf(5);
    conf << 0.1f, 0.2f, 0.6f, 1.0f, 0.9f;
    const auto bins = confidence_bins(labels, conf, gt, {0.0, 0.5, 1.0});
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].count == 2);
    CHECK(*bins[0].accuracy == doctest::Approx(0.5));
    CHECK(bins[1].count == 2);
    CHECK(*bins[1].accuracy == 1.0);
    CHECK(bins[0].share + bins[1].share == doctest::Approx(1.0));
  }

  TEST_CASE("empty bins have no accuracy") {
    const auto labels = field({0}, 1);
    ConfidenceField conf(1);
    conf << 0.9f;
    const auto bins = confidence_bins(labels, conf, labels, {0.0, 0.5, 1.0});
    CHECK_FALSE(bins[0].accuracy.has_value());
    CHECK(bins[0].share == 0.0);
  }

  TEST_CASE("bad edges") {
    const auto labels = field({0}, 1);
    const ConfidenceField conf = ConfidenceField::Zero(1);
    CHECK_THROWS_AS(confidence_bins(labels, conf, labels, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(confidence_bins(labels, conf, labels, {0.1, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(confidence_bins(labels, conf, labels, {0.0, 0.5, 0.5, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(confidence_bins(labels, conf, field({0, 0}, 1), {0.0, 1.0}), DataError);
  }

  TEST_CASE("quartile edges split labeled points evenly") {
    const int n = 1000;
    LabelField labels(n, 1, 0);
    ConfidenceField conf(n);
    for (int i = 0; i < n; ++i) conf[i] = static_cast<float>(i) / n;
    const auto edges = quantile_edges(labels, conf, 4);
    REQUIRE(edges.size() == 5);
    CHECK(edges[1] == doctest::Approx(0.25));
    CHECK(edges[2] == doctest::Approx(0.5));
    CHECK(edges[3] == doctest::Approx(0.75));
    for (const auto& b : confidence_bins(labels, conf, labels, edges)) CHECK(b.count == n / 4);
  }

  TEST_CASE("duplicate quantiles collapse") {
    LabelField labels(10, 1, 0);
    const auto edges = quantile_edges(labels, ConfidenceField::Constant(10, 0.5f), 4);
    CHECK(edges == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(quantile_edges(LabelField(3, 1), ConfidenceField::Zero(3), 4) ==
          std::vector<double>{0.0, 1.0});
  }

  TEST_CASE("counts are conserved on random inputs") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = std::uniform_int_distribution<int>(1, 200)(rng);
      LabelField labels(n, 3), gt(n, 3);
      ConfidenceField conf(n);
      std::int64_t scored = 0;
      for (int i = 0; i < n; ++i) {
        labels[i] = std::uniform_int_distribution<int>(-1, 2)(rng);
        gt[i] = std::uniform_int_distribution<int>(-1, 2)(rng);
        conf[i] = std::uniform_real_distribution<float>(0, 1)(rng);
        scored += labels.is_labeled(i) && gt.is_labeled(i);
      }
      const int k = std::uniform_int_distribution<int>(1, 6)(rng);
      std::int64_t total = 0;
      for (const auto& b : confidence_bins(labels, conf, gt, quantile_edges(labels, conf, k)))
        total += b.count;
      CHECK(total == scored);
    }
  }
}

TEST_CASE("labeled rate") {
  CHECK(labeled_rate(field({-1, -1}, 2)) == 0.0);
  CHECK(labeled_rate(field({0, -1}, 2)) == 0.5);
  CHECK(labeled_rate(field({1, 0, 1}, 2)) == 1.0);
  CHECK(labeled_rate(LabelField()) == 0.0);
}

TEST_CASE("json and table output") {
  const auto s = score(field({0, 1, 1}, 3), field({0, 0, 1}, 3));
  const auto j = score_to_json(s, {"floor", "wall", "chair"});
  CHECK(j["miou"].get<double>() == doctest::Approx(0.5));
  CHECK(j["per_class"].size() == 2);
  CHECK(j["per_class"]["wall"]["recall"].get<double>() == 1.0);
  CHECK(score_to_table(s, {"floor", "wall", "chair"}) ==
        "class      IoU      Acc\n"
        "floor     50.0     50.0\n"
        "wall      50.0    100.0\n"
        "mean      50.0     75.0\n");
  CHECK(score_to_json(s, {}).at("per_class").contains("class_0"));
}
