#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>

#include "oracles.hpp"
#include "wsseg/metrics.hpp"
#include "wsseg/pipeline.hpp"
#include "wsseg/refine.hpp"
#include "wsseg/synth.hpp"

using namespace wsseg;

namespace {

SuperpointPartition one_block(Eigen::Index n) {
  return SuperpointPartition::from_assignment(Eigen::VectorXi::Zero(n));
}

}  // namespace

TEST_SUITE("calr") {
  TEST_CASE("ten points at 30 percent keep three") {
    LabelField labels(10, 1, 0);
    ConfidenceField conf(10);
    conf << 0.1f, 0.9f, 0.3f, 0.8f, 0.5f, 0.2f, 0.7f, 0.4f, 0.6f, 0.05f;
    const auto out = calr(labels, conf, 30.0);
    CHECK(out.labeled_count() == 3);
    CHECK(out[1] == 0);
    CHECK(out[3] == 0);
    CHECK(out[6] == 0);
  }

  TEST_CASE("100 percent is the identity") {
    std::mt19937_64 rng(1);
    const auto inst = test::random_refine_instance(rng);
    CHECK(calr(inst.labels, inst.confidence, 100.0) == inst.labels);
  }

  TEST_CASE("small classes survive") {
    LabelField labels(104, 2, 0);
    for (int i = 100; i < 104; ++i) labels[i] = 1;
    ConfidenceField conf = ConfidenceField::LinSpaced(104, 0.0f, 1.0f);
    const auto out = calr(labels, conf, 30.0);
    CHECK((out.labels.array() == 0).count() == 30);
    CHECK((out.labels.array() == 1).count() == 2);
    CHECK(calr_keep_count(4, 30.0) == 2);
    CHECK(calr_keep_count(0, 30.0) == 0);
  }

  TEST_CASE("confidence ties go to the lower index") {
    LabelField labels(4, 1, 0);
    const auto out = calr(labels, ConfidenceField::Constant(4, 0.5f), 50.0);
    CHECK(out.labels == Eigen::Vector4i(0, 0, -1, -1));
  }

  TEST_CASE("cardinality, dominance and no relabelling on random instances") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
      const auto inst = test::random_refine_instance(rng);
      const double v = std::uniform_real_distribution<double>(1.0, 100.0)(rng);
      const auto out = calr(inst.labels, inst.confidence, v);
      for (int c = 0; c < inst.labels.num_classes; ++c) {
        Eigen::Index n = 0, kept = 0;
        float min_kept = 2.0f, max_dropped = -1.0f;
        Eigen::Index last_kept_at_min = -1, first_dropped_at_max = -1;
        for (Eigen::Index i = 0; i < inst.labels.size(); ++i) {
          if (inst.labels[i] != c) continue;
          ++n;
          if (out[i] == c) {
            ++kept;
            if (inst.confidence[i] <= min_kept) min_kept = inst.confidence[i], last_kept_at_min = i;
          } else {
            CHECK(out[i] == kUnlabeled);
            if (inst.confidence[i] > max_dropped) max_dropped = inst.confidence[i], first_dropped_at_max = i;
          }
        }
        CHECK(kept == std::min<Eigen::Index>(n, static_cast<Eigen::Index>(std::ceil(v / 100.0 * n))));
        if (kept > 0 && kept < n) {
          CHECK(min_kept >= max_dropped);
          if (min_kept == max_dropped) CHECK(last_kept_at_min < first_dropped_at_max);
        }
      }
      for (Eigen::Index i = 0; i < inst.labels.size(); ++i)
        if (inst.labels[i] == kUnlabeled) CHECK(out[i] == kUnlabeled);
    }
  }
}

TEST_SUITE("galr") {
  TEST_CASE("three to one passes at 0.5") {
    LabelField labels(Eigen::VectorXi{{0, 0, 0, 1, -1}}, 2);
    CHECK(galr(labels, one_block(5), 0.5).labels == Eigen::VectorXi::Zero(5));
  }

  TEST_CASE("even split fails the strict test") {
    LabelField labels(Eigen::VectorXi{{0, 0, 1, 1}}, 2);
    CHECK(galr(labels, one_block(4), 0.5).labeled_count() == 0);
  }

  TEST_CASE("count ties go to the lower class when alpha allows") {
    LabelField labels(Eigen::VectorXi{{2, 1, 1, 2}}, 3);
    CHECK(galr(labels, one_block(4), 0.3).labels == Eigen::VectorXi::Constant(4, 1));
  }

  TEST_CASE("blocks without labels stay unlabeled") {
    const auto p = SuperpointPartition::from_assignment(Eigen::VectorXi{{0, 0, 1, 1}});
    LabelField labels(Eigen::VectorXi{{1, -1, -1, -1}}, 2);
    CHECK(galr(labels, p, 0.0).labels == Eigen::Vector4i(1, 1, -1, -1));
  }

  TEST_CASE("alpha 1 rejects everything") {
    CHECK(galr(LabelField(6, 2, 1), one_block(6), 1.0).labeled_count() == 0);
  }

  TEST_CASE("equals the brute-force tally, is block constant and idempotent") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      const auto inst = test::random_refine_instance(rng);
      for (double alpha : {0.0, 0.3, 0.5, 0.9}) {
        const auto out = galr(inst.labels, inst.partition, alpha);
        CHECK(out == test::brute_galr(inst.labels, inst.partition, alpha));
        for (const auto& seg : inst.partition.segments())
          for (auto i : seg) CHECK(out[i] == out[seg.front()]);
        CHECK(galr(out, inst.partition, alpha) == out);
        if (alpha == 0.0)
          for (const auto& seg : inst.partition.segments()) {
            bool any = false;
            for (auto i : seg) any = any || inst.labels[i] != kUnlabeled;
            CHECK(any == (out[seg.front()] != kUnlabeled));
          }
      }
    }
  }

  TEST_CASE("permutation equivariance") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
      const auto inst = test::random_refine_instance(rng);
      const auto n = inst.labels.size();
      std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), Eigen::Index{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      LabelField pl(n, inst.labels.num_classes);
      ConfidenceField pc(n);
      Eigen::VectorXi pa(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto j = perm[static_cast<std::size_t>(i)];
        pl[i] = inst.labels[j];
        // distinct confidences keep the index tie rule out of the picture
        pc[i] = static_cast<float>(j) / static_cast<float>(n);
        pa[i] = inst.partition.assignment()[j];
      }
      ConfidenceField c(n);
      for (Eigen::Index j = 0; j < n; ++j) c[j] = static_cast<float>(j) / static_cast<float>(n);
      const auto pp = SuperpointPartition::from_assignment(pa);
      const RefineParams params{30.0, 0.5};
      const auto out = refine_pipeline(inst.labels, c, inst.partition, params);
      const auto pout = refine_pipeline(pl, pc, pp, params);
      for (Eigen::Index i = 0; i < n; ++i) CHECK(pout[i] == out[perm[static_cast<std::size_t>(i)]]);
    }
  }
}

TEST_SUITE("refine_pipeline") {
  TEST_CASE("identity path") {
    LabelField labels(12, 3, 2);
    CHECK(refine_pipeline(labels, ConfidenceField::Random(12).cwiseAbs(), one_block(12),
                          {100.0, 0.5}) == labels);
  }

  TEST_CASE("alpha 1 leaves nothing") {
    LabelField labels(12, 3, 2);
    CHECK(refine_pipeline(labels, ConfidenceField::Constant(12, 0.5f), one_block(12), {100.0, 1.0})
              .labeled_count() == 0);
  }

  TEST_CASE("parameter ranges") {
    CHECK_THROWS_AS((RefineParams{0.0, 0.5}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((RefineParams{101.0, 0.5}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((RefineParams{30.0, 1.5}.validate()), std::invalid_argument);
    CHECK_NOTHROW((RefineParams{100.0, 0.0}.validate()));
  }

  TEST_CASE("synthetic room with 20 percent label noise") {
    const auto scene = generate_scene(scene_preset("room-small", 3));
    std::mt19937_64 rng(5);
    std::bernoulli_distribution flip(0.2);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    LabelField noisy = scene.ground_truth;
    ConfidenceField conf(noisy.size());
    const auto present = scene.mask;
    std::vector<int> classes;
    for (int c = 0; c < present.size(); ++c)
      if (present[c]) classes.push_back(c);
    std::uniform_int_distribution<std::size_t> pick(0, classes.size() - 1);
    for (Eigen::Index i = 0; i < noisy.size(); ++i) {
      conf[i] = u(rng);
      if (flip(rng)) {
        noisy[i] = classes[pick(rng)];
        conf[i] *= 0.5f;
      }
    }
    const auto partition = compute_partition(scene.cloud, {});
    const auto refined = refine_pipeline(noisy, conf, partition, {});
    auto accuracy = [&](const LabelField& l) {
      const auto cm = confusion(l, scene.ground_truth);
      return double(cm.counts.trace()) / double(cm.counted());
    };
    CHECK(accuracy(refined) > accuracy(noisy));
  }
}
