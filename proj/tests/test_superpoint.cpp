#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "test_util.hpp"
#include "wsseg/errors.hpp"
#include "wsseg/normals.hpp"
#include "wsseg/pipeline.hpp"
#include "wsseg/superpoint.hpp"
#include "wsseg/synth.hpp"

using namespace wsseg;

namespace {

void check_valid(const SuperpointPartition& p, Eigen::Index n) {
  REQUIRE(p.point_count() == n);
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  for (int s = 0; s < p.segment_count(); ++s) {
    CHECK_FALSE(p.segment(s).empty());
    for (auto i : p.segment(s)) {
      ++seen[static_cast<std::size_t>(i)];
      CHECK(p.assignment()[i] == s);
    }
  }
  for (int c : seen) CHECK(c == 1);
}

// Grid on z = 0 for x in [0, 1], plus grid on x = 0 for z in (0, 1].
struct TwoPlanes {
  PointCloud cloud;
  NormalField normals;
  std::vector<int> plane;
};

TwoPlanes two_planes(int steps) {
  TwoPlanes t;
  const double h = 1.0 / steps;
  std::vector<Eigen::Vector3d> pts, nrm;
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; j <= steps; ++j) {
      pts.emplace_back(i * h, j * h, 0.0);
      nrm.emplace_back(0, 0, 1);
      t.plane.push_back(0);
    }
  for (int k = 1; k <= steps; ++k)
    for (int j = 0; j <= steps; ++j) {
      pts.emplace_back(0.0, j * h, k * h);
      nrm.emplace_back(1, 0, 0);
      t.plane.push_back(1);
    }
  const auto n = static_cast<Eigen::Index>(pts.size());
  t.cloud = PointCloud(n);
  t.normals.normals.resize(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t.cloud.positions.col(i) = pts[static_cast<std::size_t>(i)];
    t.normals.normals.col(i) = nrm[static_cast<std::size_t>(i)];
  }
  return t;
}

Scene small_scene(std::uint64_t seed) {
  auto spec = scene_preset("room-small", seed);
  spec.density = 60.0;
  return generate_scene(spec);
}

}  // namespace

TEST_CASE("single plane is one segment") {
  PointCloud cloud(400);
  for (int i = 0; i < 400; ++i) cloud.positions.col(i) << i % 20 * 0.05, i / 20 * 0.05, 0.0;
  const auto index = build_index(cloud);
  OversegmentParams params;
  params.angle_threshold_deg = 10.0;
  const auto p = oversegment(cloud, estimate_normals(cloud, index), index, params);
  CHECK(p.segment_count() == 1);
  check_valid(p, 400);
}

TEST_CASE("two perpendicular planes with analytic normals split at the crease") {
  const auto t = two_planes(20);
  const auto index = build_index(t.cloud);
  OversegmentParams params;
  params.angle_threshold_deg = 10.0;
  params.min_size = 1;
  const auto p = oversegment(t.cloud, t.normals, index, params);
  REQUIRE(p.segment_count() == 2);
  const int first = p.assignment()[0];
  for (Eigen::Index i = 0; i < t.cloud.size(); ++i)
    CHECK((p.assignment()[i] == first) == (t.plane[static_cast<std::size_t>(i)] == 0));
}

TEST_CASE("two planes with estimated normals agree away from the crease") {
  const auto t = two_planes(20);
  const auto index = build_index(t.cloud);
  OversegmentParams params;
  params.angle_threshold_deg = 10.0;
  params.min_size = 1;
  const auto p = oversegment(t.cloud, estimate_normals(t.cloud, index, 8), index, params);
  // the biggest segment on each plane, judged away from the crease
  const int a = p.assignment()[20 * 21 + 20];  // x = 1, y = 1, z = 0
  const int b = p.assignment()[t.cloud.size() - 1];  // x = 0, y = 1, z = 1
  CHECK(a != b);
  for (Eigen::Index i = 0; i < t.cloud.size(); ++i) {
    const Eigen::Vector3d q = t.cloud.positions.col(i);
    if (q.x() > 0.15 && q.z() == 0.0) CHECK(p.assignment()[i] == a);
    if (q.z() > 0.15) CHECK(p.assignment()[i] == b);
  }
}

TEST_CASE("180 degrees floods a connected graph") {
  const auto t = two_planes(10);
  const auto index = build_index(t.cloud);
  OversegmentParams params;
  params.angle_threshold_deg = 180.0;
  params.edge_length_percentile = 100.0;
  CHECK(oversegment(t.cloud, t.normals, index, params).segment_count() == 1);
}

TEST_CASE("random inputs always give a valid, deterministic partition") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = std::uniform_int_distribution<Eigen::Index>(1, 300)(rng);
    const auto cloud = test::random_cloud(n, rng());
    NormalField normals;
    normals.normals.resize(3, n);
    for (Eigen::Index i = 0; i < n; ++i)
      normals.normals.col(i) = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
    OversegmentParams params;
    params.angle_threshold_deg = std::uniform_real_distribution<double>(1, 90)(rng);
    params.adjacency_k = std::uniform_int_distribution<int>(1, 12)(rng);
    params.min_size = std::uniform_int_distribution<int>(1, 30)(rng);
    const auto index = build_index(cloud);
    const auto p = oversegment(cloud, normals, index, params);
    check_valid(p, n);
    CHECK(oversegment(cloud, normals, index, params) == p);
  }
}

// Small-segment merging is left out: fragments that merge away at a low
// threshold can unite into one segment above min_size at a higher one.
TEST_CASE("raising the angle threshold never adds flooded regions") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto scene = small_scene(seed);
    const auto index = build_index(scene.cloud);
    const auto normals = estimate_normals(scene.cloud, index);
    int previous = std::numeric_limits<int>::max();
    for (double angle : {5.0, 10.0, 15.0, 30.0, 60.0, 90.0}) {
      OversegmentParams params;
      params.angle_threshold_deg = angle;
      params.min_size = 1;
      const int u = oversegment(scene.cloud, normals, index, params).segment_count();
      CHECK_MESSAGE(u <= previous, "seed " << seed << " angle " << angle);
      previous = u;
    }
  }
}

TEST_CASE("rotating cloud and normals together keeps the assignment") {
  std::mt19937_64 rng(4);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto scene = small_scene(seed);
    const auto index = build_index(scene.cloud);
    const auto normals = estimate_normals(scene.cloud, index);
    const auto p = oversegment(scene.cloud, normals, index);

    const Eigen::Matrix3d r = test::random_rotation(rng);
    const auto moved = transformed(scene.cloud, r, Eigen::Vector3d(1, 2, 3));
    NormalField moved_normals = normals;
    moved_normals.normals = r * normals.normals;
    CHECK(oversegment(moved, moved_normals, build_index(moved)) == p);
  }
}

TEST_CASE("parameter and size errors") {
  const auto cloud = test::random_cloud(10, 1);
  const auto index = build_index(cloud);
  NormalField normals;
  normals.normals = Eigen::Matrix3Xd::Zero(3, 9);
  CHECK_THROWS_AS(oversegment(cloud, normals, index), DataError);
  normals.normals = Eigen::Matrix3Xd::Zero(3, 10);
  normals.normals.row(2).setOnes();
  OversegmentParams params;
  params.angle_threshold_deg = 0.0;
  CHECK_THROWS_AS(oversegment(cloud, normals, index, params), std::invalid_argument);
  params.angle_threshold_deg = 15.0;
  params.adjacency_k = 0;
  CHECK_THROWS_AS(oversegment(cloud, normals, index, params), std::invalid_argument);
}

TEST_SUITE("partition") {
  TEST_CASE("stats") {
    auto single = SuperpointPartition::from_assignment(Eigen::VectorXi::Zero(7));
    auto s = partition_stats(single);
    CHECK(s.segment_count == 1);
    CHECK(s.size_histogram == std::map<Eigen::Index, int>{{7, 1}});

    const auto p = SuperpointPartition::from_assignment(
        Eigen::VectorXi{{0, 0, 0, 1, 1, 1, 2, 2, 2, 2}});
    s = partition_stats(p);
    CHECK(s.median_size == 3);
    CHECK(s.min_size == 3);
    CHECK(s.max_size == 4);
  }

  TEST_CASE("random partitions recount to N") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = std::uniform_int_distribution<int>(1, 200)(rng);
      const int u = std::uniform_int_distribution<int>(1, n)(rng);
      Eigen::VectorXi a(n);
      for (int i = 0; i < n; ++i) a[i] = i < u ? i : std::uniform_int_distribution<int>(0, u - 1)(rng);
      std::shuffle(a.data(), a.data() + n, rng);
      const auto p = SuperpointPartition::from_assignment(a);
      const auto s = partition_stats(p);
      Eigen::Index total = 0;
      for (const auto& [size, count] : s.size_histogram) total += size * count;
      CHECK(total == n);
      CHECK(s.segment_count == u);
    }
  }

  TEST_CASE("ids must be dense") {
    CHECK_THROWS_AS(SuperpointPartition::from_assignment(Eigen::VectorXi{{0, 2}}), DataError);
    CHECK_THROWS_AS(SuperpointPartition::from_assignment(Eigen::VectorXi{{0, -1}}), DataError);
  }

  TEST_CASE("JSON round trip") {
    const auto dir = test::scratch_dir("superpoint_json");
    const auto p = SuperpointPartition::from_assignment(Eigen::VectorXi{{1, 0, 1, 2}});
    const auto path = (dir / "p.json").string();
    write_partition_json(p, path);
    CHECK(test::read_file(path) == "{\"assignment\":[1,0,1,2],\"n\":4,\"u\":3}\n");
    CHECK(read_partition_json(path) == p);

    test::write_file(dir / "bad_n.json", R"({"n": 3, "u": 1, "assignment": [0, 0]})");
    CHECK_THROWS_AS(read_partition_json((dir / "bad_n.json").string()), DataError);
    test::write_file(dir / "bad_u.json", R"({"n": 2, "u": 3, "assignment": [0, 0]})");
    CHECK_THROWS_AS(read_partition_json((dir / "bad_u.json").string()), DataError);
    test::write_file(dir / "broken.json", R"({"n": 2,)");
    CHECK_THROWS_AS(read_partition_json((dir / "broken.json").string()), FormatError);
  }
}

TEST_CASE("default pipeline gives object-scale blocks on the preset") {
  const auto scene = generate_scene(scene_preset("room-small", 1));
  const auto p = compute_partition(scene.cloud, {});
  CHECK(p.segment_count() >= 10);
  CHECK(p.segment_count() <= 200);
  // most points share a segment with points of their own surface
  Eigen::Index pure = 0;
  for (const auto& seg : p.segments()) {
    std::map<int, Eigen::Index> counts;
    for (auto i : seg) ++counts[scene.ground_truth[i]];
    Eigen::Index best = 0;
    for (const auto& [c, k] : counts) best = std::max(best, k);
    pure += best;
  }
  CHECK(double(pure) / scene.cloud.size() > 0.9);
}
