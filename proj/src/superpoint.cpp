#include "wsseg/superpoint.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <queue>
#include <stdexcept>

#include <json.hpp>

#include "wsseg/errors.hpp"

namespace wsseg {

SuperpointPartition SuperpointPartition::from_assignment(Eigen::VectorXi assignment) {
  SuperpointPartition p;
  const int max_id = assignment.size() > 0 ? assignment.maxCoeff() : -1;
  if (assignment.size() > 0 && assignment.minCoeff() < 0)
    throw DataError("partition: negative segment id");
  p.segments_.resize(static_cast<std::size_t>(max_id + 1));
  for (Eigen::Index i = 0; i < assignment.size(); ++i)
    p.segments_[static_cast<std::size_t>(assignment[i])].push_back(i);
  for (std::size_t s = 0; s < p.segments_.size(); ++s)
    if (p.segments_[s].empty())
      throw DataError("partition: segment id " + std::to_string(s) + " has no points");
  p.assignment_ = std::move(assignment);
  return p;
}

namespace {

struct Graph {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;  // unique, i < j
  std::vector<double> lengths;
};

Graph knn_graph(const PointCloud& cloud, const SpatialIndex& index, int k) {
  Graph g;
  const Eigen::Index n = cloud.size();
  g.edges.reserve(static_cast<std::size_t>(n * k));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto nbrs = index.k_nearest(cloud.positions.col(i), k + 1);
    int taken = 0;
    for (const auto& nb : nbrs) {
      if (nb.index == i) continue;
      if (taken++ == k) break;
      g.edges.emplace_back(std::min(i, nb.index), std::max(i, nb.index));
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  g.lengths.reserve(g.edges.size());
  for (const auto& [a, b] : g.edges)
    g.lengths.push_back((cloud.positions.col(a) - cloud.positions.col(b)).norm());
  return g;
}

// Nearest-rank percentile.
double percentile(std::vector<double> values, double pct) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto m = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * m));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

// Compressed adjacency lists over a subset of edges.
struct Csr {
  std::vector<std::size_t> offsets;
  std::vector<Eigen::Index> targets;
};

template <typename Keep>
Csr to_csr(Eigen::Index n, const Graph& g, Keep keep) {
  Csr csr;
  csr.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (!keep(e)) continue;
    ++csr.offsets[static_cast<std::size_t>(g.edges[e].first) + 1];
    ++csr.offsets[static_cast<std::size_t>(g.edges[e].second) + 1];
  }
  std::partial_sum(csr.offsets.begin(), csr.offsets.end(), csr.offsets.begin());
  csr.targets.resize(csr.offsets.back());
  std::vector<std::size_t> fill(csr.offsets.begin(), csr.offsets.end() - 1);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (!keep(e)) continue;
    const auto [a, b] = g.edges[e];
    csr.targets[fill[static_cast<std::size_t>(a)]++] = b;
    csr.targets[fill[static_cast<std::size_t>(b)]++] = a;
  }
  return csr;
}

}  // namespace

SuperpointPartition oversegment(const PointCloud& cloud, const NormalField& normals,
                                const SpatialIndex& index, const OversegmentParams& params) {
  const Eigen::Index n = cloud.size();
  if (normals.size() != n)
    throw DataError("oversegment: " + std::to_string(normals.size()) + " normals for " +
                    std::to_string(n) + " points");
  if (index.size() != n) throw std::invalid_argument("oversegment: index/cloud size mismatch");
  if (!(params.angle_threshold_deg > 0.0 && params.angle_threshold_deg <= 180.0))
    throw std::invalid_argument("oversegment: angle threshold must be in (0, 180]");
  if (params.adjacency_k < 1) throw std::invalid_argument("oversegment: adjacency_k must be >= 1");

  const Graph graph = knn_graph(cloud, index, params.adjacency_k);
  const double gate = percentile(graph.lengths, params.edge_length_percentile);
  const bool any_angle = params.angle_threshold_deg >= 90.0;
  const double min_cos = std::cos(params.angle_threshold_deg * std::numbers::pi / 180.0);

  const Csr flood = to_csr(n, graph, [&](std::size_t e) {
    if (graph.lengths[e] > gate) return false;
    if (any_angle) return true;
    const auto [a, b] = graph.edges[e];
    return std::abs(normals.normals.col(a).dot(normals.normals.col(b))) >= min_cos;
  });

  // Flood fill; ids follow seed order.
  const bool use_curvature = normals.curvature.size() == n;
  auto spreads = [&](Eigen::Index p) {
    return !use_curvature || normals.curvature[p] <= params.max_curvature;
  };
  auto edges_of = [](const Csr& csr, Eigen::Index p) {
    const auto u = static_cast<std::size_t>(p);
    return std::pair{csr.offsets[u], csr.offsets[u + 1]};
  };
  Eigen::VectorXi seg = Eigen::VectorXi::Constant(n, -1);
  int count = 0;
  std::vector<Eigen::Index> stack;
  for (Eigen::Index seed = 0; seed < n; ++seed) {
    if (seg[seed] >= 0) continue;
    seg[seed] = count;
    stack.assign(1, seed);
    while (!stack.empty()) {
      const Eigen::Index p = stack.back();
      stack.pop_back();
      if (!spreads(p)) continue;
      for (auto [e, end] = edges_of(flood, p); e < end; ++e) {
        const Eigen::Index q = flood.targets[e];
        if (seg[q] < 0) {
          seg[q] = count;
          stack.push_back(q);
        }
      }
    }
    ++count;
  }

  // Merge undersized segments, ascending id, over the full k-NN graph.
  if (params.min_size > 1 && count > 1) {
    const Csr adjacency = to_csr(n, graph, [](std::size_t) { return true; });
    Eigen::VectorXi size = Eigen::VectorXi::Zero(count);
    for (Eigen::Index i = 0; i < n; ++i) ++size[seg[i]];
    std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(count));
    for (Eigen::Index i = 0; i < n; ++i) members[static_cast<std::size_t>(seg[i])].push_back(i);
    Eigen::VectorXi parent = Eigen::VectorXi::LinSpaced(count, 0, count - 1);
    auto find = [&](int s) {
      while (parent[s] != s) s = parent[s] = parent[parent[s]];
      return s;
    };
    Eigen::VectorXi shared = Eigen::VectorXi::Zero(count);
    std::vector<int> touched;
    for (int s = 0; s < count; ++s) {
      if (size[s] >= params.min_size) continue;
      touched.clear();
      for (const Eigen::Index p : members[static_cast<std::size_t>(s)]) {
        for (auto [e, end] = edges_of(adjacency, p); e < end; ++e) {
          const int t = find(seg[adjacency.targets[e]]);
          if (t != s && shared[t]++ == 0) touched.push_back(t);
        }
      }
      if (touched.empty()) continue;
      int best = touched.front();
      for (const int t : touched)
        if (shared[t] > shared[best] || (shared[t] == shared[best] && t < best)) best = t;
      for (const int t : touched) shared[t] = 0;
      parent[s] = best;
      size[best] += size[s];
      auto& dst = members[static_cast<std::size_t>(best)];
      auto& own = members[static_cast<std::size_t>(s)];
      dst.insert(dst.end(), own.begin(), own.end());
      own = {};
    }
    for (auto& s : seg) s = find(s);
  }

  // Dense ids in order of first appearance.
  Eigen::VectorXi assignment(n);
  Eigen::VectorXi remap = Eigen::VectorXi::Constant(count, -1);
  int next = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    int& id = remap[seg[i]];
    if (id < 0) id = next++;
    assignment[i] = id;
  }
  return SuperpointPartition::from_assignment(std::move(assignment));
}

PartitionStats partition_stats(const SuperpointPartition& partition) {
  PartitionStats s;
  s.segment_count = partition.segment_count();
  std::vector<Eigen::Index> sizes;
  for (const auto& seg : partition.segments()) {
    const auto sz = static_cast<Eigen::Index>(seg.size());
    sizes.push_back(sz);
    ++s.size_histogram[sz];
  }
  if (sizes.empty()) return s;
  std::sort(sizes.begin(), sizes.end());
  s.min_size = sizes.front();
  s.max_size = sizes.back();
  s.median_size = sizes[(sizes.size() - 1) / 2];
  return s;
}

SuperpointPartition read_partition_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path, e.what(), e.byte, "byte");
  }
  try {
    const auto n = j.at("n").get<Eigen::Index>();
    const auto u = j.at("u").get<int>();
    const auto ids = j.at("assignment").get<std::vector<int>>();
    if (static_cast<Eigen::Index>(ids.size()) != n)
      throw DataError(path + ": assignment length " + std::to_string(ids.size()) +
                      " != n " + std::to_string(n));
    Eigen::VectorXi a(n);
    for (Eigen::Index i = 0; i < n; ++i) a[i] = ids[static_cast<std::size_t>(i)];
    auto p = SuperpointPartition::from_assignment(std::move(a));
    if (p.segment_count() != u)
      throw DataError(path + ": declared u=" + std::to_string(u) + " but found " +
                      std::to_string(p.segment_count()) + " segments");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_partition_json(const SuperpointPartition& partition, const std::string& path) {
  nlohmann::json j;
  j["n"] = partition.point_count();
  j["u"] = partition.segment_count();
  j["assignment"] = std::vector<int>(partition.assignment().begin(), partition.assignment().end());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump() << '\n';
}

}  // namespace wsseg
