#pragma once

#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "perc/geometry.hpp"
#include "perc/lattice.hpp"

// Distance statistics: chemical distances inside a region, shortest and
// lowest crossing lengths, the radial distance, and the first dyadic scale
// connecting the origin to e1.

namespace perc {

struct DistanceResult {
  std::optional<int> value;
  std::optional<LatticePath> witness;
  bool has_value() const { return value.has_value(); }
};

// Least number of edges in any open path from A to B inside the region.
// The witness geodesic breaks ties by the (y,x) order of the endpoint and
// by the EdgeId order of predecessor edges, so it is reproducible.
inline DistanceResult chem_dist(const BondConfig& cfg, std::span<const Vertex> a,
                                std::span<const Vertex> b, const VertexMask& region) {
  const Box& box = cfg.box();
  std::vector<uint8_t> allowed(box.vertex_count(), 0);
  for (int y = -box.radius(); y <= box.radius(); ++y)
    for (int x = -box.radius(); x <= box.radius(); ++x)
      if (region.test({x, y})) allowed[box.vertex_index({x, y})] = 1;
  for (const Vertex& v : a)
    if (!box.contains(v)) throw std::out_of_range("chem_dist: vertex outside box");
  for (const Vertex& v : b)
    if (!box.contains(v)) throw std::out_of_range("chem_dist: vertex outside box");
  auto path = geodesic_connector(cfg, a, b, allowed);
  DistanceResult r;
  if (path) {
    r.value = static_cast<int>(path->edge_count());
    r.witness = std::move(*path);
  }
  return r;
}

inline DistanceResult chem_dist(const BondConfig& cfg, Vertex a, Vertex b,
                                const VertexMask& region) {
  const Vertex aa[1] = {a}, bb[1] = {b};
  return chem_dist(cfg, std::span<const Vertex>(aa, 1), std::span<const Vertex>(bb, 1),
                   region);
}

// Multi-source BFS distance over open edges restricted to a sub-box of the
// host; works on lazy views. Returns -1 when not connected.
template <typename Cfg>
int restricted_open_distance(const Cfg& cfg, std::span<const Vertex> sources,
                             std::span<const Vertex> targets, Vertex center, int m) {
  const Box& box = cfg.box();
  const int n = box.radius();
  auto inside = [&](const Vertex& v) {
    return std::abs(v.x - center.x) <= m && std::abs(v.y - center.y) <= m &&
           std::abs(v.x) <= n && std::abs(v.y) <= n;
  };
  std::vector<int> dist(box.vertex_count(), -1);
  std::vector<uint8_t> is_target(box.vertex_count(), 0);
  for (const Vertex& v : targets)
    if (box.contains(v)) is_target[box.vertex_index(v)] = 1;
  std::deque<Vertex> queue;
  for (const Vertex& v : sources) {
    if (!inside(v)) continue;
    std::size_t vi = box.vertex_index(v);
    if (is_target[vi]) return 0;
    if (dist[vi] < 0) {
      dist[vi] = 0;
      queue.push_back(v);
    }
  }
  while (!queue.empty()) {
    Vertex v = queue.front();
    queue.pop_front();
    std::size_t vi = box.vertex_index(v);
    for (int d = 0; d < 4; ++d) {
      Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
      if (!inside(u)) continue;
      std::size_t ui = box.vertex_index(u);
      if (dist[ui] >= 0) continue;
      if (!cfg.open(dir::edge_from(v, d))) continue;
      if (is_target[ui]) return dist[vi] + 1;
      dist[ui] = dist[vi] + 1;
      queue.push_back(u);
    }
  }
  return -1;
}

// (S_n, L_n): length of the shortest open left-right crossing and of the
// lowest crossing. Absent exactly when H_n fails; S_n <= L_n always.
inline std::optional<std::pair<int, int>> crossing_lengths(const BondConfig& cfg) {
  auto low = lowest_crossing_full(cfg);
  if (!low) return std::nullopt;
  const int n = cfg.radius();
  std::vector<Vertex> left, right;
  for (int y = -n; y <= n; ++y) {
    left.push_back({-n, y});
    right.push_back({n, y});
  }
  int s = restricted_open_distance(cfg, left, right, Vertex{0, 0}, n);
  if (s < 0) throw std::logic_error("crossing_lengths: lowest crossing without BFS crossing");
  int l = static_cast<int>(low->path.edge_count());
  if (s > l) throw std::logic_error("crossing_lengths: S_n > L_n");
  return std::make_pair(s, l);
}

// S_{B_n(0)}: chemical distance from the origin to the box boundary; absent
// iff A_n fails.
inline std::optional<int> radial_distance(const BondConfig& cfg) {
  const int n = cfg.radius();
  auto bnd = boundary_vertices(cfg.box(), n);
  const Vertex origin[1] = {Vertex{0, 0}};
  int d = restricted_open_distance(cfg, std::span<const Vertex>(origin, 1), bnd,
                                   Vertex{0, 0}, n);
  if (d < 0) return std::nullopt;
  return d;
}

template <typename Cfg>
std::optional<int> radial_distance_t(const Cfg& cfg) {
  const int n = cfg.box().radius();
  auto bnd = boundary_vertices(cfg.box(), n);
  const Vertex origin[1] = {Vertex{0, 0}};
  int d = restricted_open_distance(cfg, std::span<const Vertex>(origin, 1), bnd,
                                   Vertex{0, 0}, n);
  if (d < 0) return std::nullopt;
  return d;
}

struct DyadicScale {
  int k{0};          // least k >= 1 with 0 <-> e1 inside B_{2^k}, when !censored
  bool censored{false};
};

// D_{e1} on a configuration hosted by B_{2^kmax}. Checks k = 1, 2, ... in
// turn; each box check only touches edges of that sub-box, so lazy views
// stay cheap. Right-censoring at kmax is reported, never dropped.
template <typename Cfg>
DyadicScale dyadic_scale(const Cfg& cfg, int kmax) {
  if (kmax < 1) throw std::invalid_argument("dyadic_scale: kmax must be >= 1");
  if (cfg.box().radius() < (1 << kmax))
    throw std::invalid_argument("dyadic_scale: box smaller than B_{2^kmax}");
  const Vertex origin[1] = {Vertex{0, 0}};
  const Vertex e1[1] = {Vertex{1, 0}};
  for (int k = 1; k <= kmax; ++k) {
    int d = restricted_open_distance(cfg, std::span<const Vertex>(origin, 1),
                                     std::span<const Vertex>(e1, 1), Vertex{0, 0}, 1 << k);
    if (d >= 0) return {k, false};
  }
  return {kmax, true};
}

}  // namespace perc
