#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "perc/arms.hpp"
#include "perc/geometry.hpp"
#include "perc/lattice.hpp"

// Brute-force reference implementations. Everything here recomputes from
// definitions (path enumeration, region floods, disjoint-path packing) and
// stays independent of the production search code it is used to check.

namespace perc::oracle {

// ---------------------------------------------------------------------------
// Self-avoiding open crossings and the minimal-region crossing (tiny boxes).

struct CrossingOracle {
  std::vector<std::vector<Vertex>> crossings;          // all open SA crossings
  std::vector<std::vector<uint8_t>> regions;           // face set below each
  std::optional<std::size_t> minimal;                  // index of minimal region
};

namespace impl {

inline std::vector<uint8_t> region_below(const BondConfig& cfg,
                                         const std::vector<Vertex>& path) {
  const Box& box = cfg.box();
  const int n = box.radius();
  std::vector<uint8_t> on_edge(box.edge_count(), 0);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Vertex &a = path[i], &b = path[i + 1];
    EdgeId e = (b.x == a.x + 1)   ? EdgeId{Orientation::horizontal, a}
               : (a.x == b.x + 1) ? EdgeId{Orientation::horizontal, b}
               : (b.y == a.y + 1) ? EdgeId{Orientation::vertical, a}
                                  : EdgeId{Orientation::vertical, b};
    on_edge[box.edge_index(e)] = 1;
  }
  std::vector<uint8_t> below(box.face_count(), 0);
  std::deque<FaceId> queue;
  for (int i = -n; i <= n - 1; ++i) {
    below[box.face_index(FaceId{i, -n - 1})] = 1;
    queue.push_back(FaceId{i, -n - 1});
  }
  auto in_domain = [&](const FaceId& f) {
    return box.face_interior(f) || (f.j == -n - 1 && f.i >= -n && f.i <= n - 1);
  };
  while (!queue.empty()) {
    FaceId f = queue.front();
    queue.pop_front();
    const FaceId nbrs[4] = {{f.i + 1, f.j}, {f.i - 1, f.j}, {f.i, f.j + 1}, {f.i, f.j - 1}};
    for (const FaceId& g : nbrs) {
      if (!in_domain(g) || below[box.face_index(g)]) continue;
      EdgeId shared = edge_between_faces(f, g);
      if (box.contains(shared) && on_edge[box.edge_index(shared)]) continue;
      below[box.face_index(g)] = 1;
      queue.push_back(g);
    }
  }
  // Drop the virtual strip: keep in-box faces only.
  std::vector<uint8_t> out(box.face_count(), 0);
  for (int i = -n; i <= n - 1; ++i)
    for (int j = -n; j <= n - 1; ++j)
      out[box.face_index(FaceId{i, j})] = below[box.face_index(FaceId{i, j})];
  return out;
}

}  // namespace impl

inline CrossingOracle enumerate_crossings(const BondConfig& cfg) {
  const Box& box = cfg.box();
  const int n = box.radius();
  if (n > 3) throw std::invalid_argument("enumerate_crossings: n too large for brute force");
  CrossingOracle out;

  std::vector<Vertex> path;
  std::vector<uint8_t> used(box.vertex_count(), 0);
  auto dfs = [&](auto&& self, Vertex v) -> void {
    if (v.x == n) out.crossings.push_back(path);
    for (int d = 0; d < 4; ++d) {
      Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
      if (!box.contains(u) || used[box.vertex_index(u)]) continue;
      if (!cfg.open(dir::edge_from(v, d))) continue;
      used[box.vertex_index(u)] = 1;
      path.push_back(u);
      self(self, u);
      path.pop_back();
      used[box.vertex_index(u)] = 0;
    }
  };
  for (int y = -n; y <= n; ++y) {
    Vertex start{-n, y};
    used[box.vertex_index(start)] = 1;
    path.push_back(start);
    dfs(dfs, start);
    path.pop_back();
    used[box.vertex_index(start)] = 0;
  }

  out.regions.reserve(out.crossings.size());
  for (const auto& c : out.crossings) out.regions.push_back(impl::region_below(cfg, c));
  if (!out.crossings.empty()) {
    // Minimal region first; among crossings sharing it (they differ only by
    // zero-area runs along the left wall), fewest edges. That choice must be
    // unique or the minimal crossing is ill-defined.
    auto size_of = [&](std::size_t k) {
      std::size_t s = 0;
      for (uint8_t b : out.regions[k]) s += b;
      return s;
    };
    std::size_t best = 0;
    std::size_t best_size = size_of(0);
    for (std::size_t k = 1; k < out.crossings.size(); ++k) {
      std::size_t s = size_of(k);
      if (s < best_size || (s == best_size && out.crossings[k].size() < out.crossings[best].size())) {
        best = k;
        best_size = s;
      }
    }
    for (std::size_t k = 0; k < out.crossings.size(); ++k) {
      for (std::size_t f = 0; f < out.regions[k].size(); ++f)
        if (out.regions[best][f] && !out.regions[k][f])
          throw std::logic_error("enumerate_crossings: minimal region not nested");
      if (k != best && out.regions[k] == out.regions[best] &&
          out.crossings[k].size() == out.crossings[best].size())
        throw std::logic_error("enumerate_crossings: minimal crossing not unique");
    }
    out.minimal = best;
  }
  return out;
}

// Shortest crossing length by plain BFS, for (S_n, L_n) cross-checks.
inline std::optional<int> shortest_crossing_length(const BondConfig& cfg) {
  const Box& box = cfg.box();
  const int n = box.radius();
  std::vector<int> dist(box.vertex_count(), -1);
  std::deque<Vertex> queue;
  for (int y = -n; y <= n; ++y) {
    dist[box.vertex_index({-n, y})] = 0;
    queue.push_back({-n, y});
  }
  while (!queue.empty()) {
    Vertex v = queue.front();
    queue.pop_front();
    if (v.x == n) return dist[box.vertex_index(v)];
    for (int d = 0; d < 4; ++d) {
      Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
      if (!box.contains(u) || dist[box.vertex_index(u)] >= 0) continue;
      if (!cfg.open(dir::edge_from(v, d))) continue;
      dist[box.vertex_index(u)] = dist[box.vertex_index(v)] + 1;
      queue.push_back(u);
    }
  }
  return std::nullopt;
}

inline std::optional<int> pair_distance_bfs(const BondConfig& cfg, Vertex a, Vertex b) {
  const Box& box = cfg.box();
  std::vector<int> dist(box.vertex_count(), -1);
  std::deque<Vertex> queue{a};
  dist[box.vertex_index(a)] = 0;
  while (!queue.empty()) {
    Vertex v = queue.front();
    queue.pop_front();
    if (v == b) return dist[box.vertex_index(v)];
    for (int d = 0; d < 4; ++d) {
      Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
      if (!box.contains(u) || dist[box.vertex_index(u)] >= 0) continue;
      if (!cfg.open(dir::edge_from(v, d))) continue;
      dist[box.vertex_index(u)] = dist[box.vertex_index(v)] + 1;
      queue.push_back(u);
    }
  }
  return std::nullopt;
}

inline std::optional<int> radial_distance_bfs(const BondConfig& cfg) {
  const Box& box = cfg.box();
  const int n = box.radius();
  std::vector<int> dist(box.vertex_count(), -1);
  std::deque<Vertex> queue{{0, 0}};
  dist[box.vertex_index({0, 0})] = 0;
  while (!queue.empty()) {
    Vertex v = queue.front();
    queue.pop_front();
    if (std::max(std::abs(v.x), std::abs(v.y)) == n) return dist[box.vertex_index(v)];
    for (int d = 0; d < 4; ++d) {
      Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
      if (!box.contains(u) || dist[box.vertex_index(u)] >= 0) continue;
      if (!cfg.open(dir::edge_from(v, d))) continue;
      dist[box.vertex_index(u)] = dist[box.vertex_index(v)] + 1;
      queue.push_back(u);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Disjoint-path packing oracle for arm events.

namespace impl {

struct ArmSlot {
  ArmColor color;
  std::vector<std::pair<double, double>> landing_pos;  // filled when placed
};

// Exact angular comparison of positions around the center (counterclockwise
// from the positive x-axis). Positions are doubled coordinates so faces
// ((2i+1, 2j+1)) and vertices ((2x, 2y)) live on one integer grid; parities
// differ, so distinct landings never tie.
struct AngularKey {
  long long x, y;  // doubled, relative to center
};

inline int quadrant(const AngularKey& k) {
  if (k.x > 0 && k.y >= 0) return 0;
  if (k.x <= 0 && k.y > 0) return 1;
  if (k.x < 0 && k.y <= 0) return 2;
  return 3;
}

inline bool angular_less(const AngularKey& a, const AngularKey& b) {
  int qa = quadrant(a), qb = quadrant(b);
  if (qa != qb) return qa < qb;
  long long cross = a.x * b.y - a.y * b.x;
  return cross > 0;
}

struct PackingState {
  const BondConfig* cfg;
  Vertex center;
  int m;
  int min_y;  // vertex rows >= min_y; faces j >= min_y (full plane: INT_MIN)
  EdgeId anchor;
  bool anchored;  // true: edge anchor with endpoint exemptions
  std::vector<uint8_t> used_vertex;
  std::vector<uint8_t> used_face;
  std::vector<std::pair<AngularKey, ArmColor>> landings;
};

inline bool vertex_allowed(const PackingState& st, const Vertex& v) {
  const Box& box = st.cfg->box();
  return box.contains(v) && std::abs(v.x - st.center.x) <= st.m &&
         std::abs(v.y - st.center.y) <= st.m && v.y >= st.min_y;
}
inline bool face_allowed(const PackingState& st, const FaceId& f) {
  const Box& box = st.cfg->box();
  return box.face_in_grid(f) && std::abs(f.i - st.center.x) <= st.m &&
         std::abs(f.j - st.center.y) <= st.m && f.j >= st.min_y;
}
inline bool vertex_on_ring(const PackingState& st, const Vertex& v) {
  return std::max(std::abs(v.x - st.center.x), std::abs(v.y - st.center.y)) == st.m;
}
inline bool face_on_ring(const PackingState& st, const FaceId& f) {
  return std::max(std::abs(f.i - st.center.x), std::abs(f.j - st.center.y)) == st.m;
}

// Can `src` still reach the ring through unused vertices/faces? Used to
// prune dead branches early.
inline bool open_reachable(const PackingState& st, const Vertex& src,
                           const std::vector<Vertex>& exempt) {
  if (vertex_on_ring(st, src)) return true;
  const Box& box = st.cfg->box();
  std::vector<uint8_t> seen(box.vertex_count(), 0);
  std::deque<Vertex> q{src};
  seen[box.vertex_index(src)] = 1;
  while (!q.empty()) {
    Vertex v = q.front();
    q.pop_front();
    for (int d = 0; d < 4; ++d) {
      Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
      if (!vertex_allowed(st, u) || seen[box.vertex_index(u)]) continue;
      EdgeId e = dir::edge_from(v, d);
      if (st.anchored && e == st.anchor) continue;
      if (!st.cfg->open(e)) continue;
      bool ex = false;
      for (const Vertex& w : exempt) ex = ex || (w == u);
      if (!ex && st.used_vertex[box.vertex_index(u)]) continue;
      if (vertex_on_ring(st, u)) return true;
      seen[box.vertex_index(u)] = 1;
      q.push_back(u);
    }
  }
  return false;
}

inline bool closed_reachable(const PackingState& st, const FaceId& src,
                             const std::vector<FaceId>& exempt) {
  if (face_on_ring(st, src)) return true;
  const Box& box = st.cfg->box();
  std::vector<uint8_t> seen(box.face_count(), 0);
  std::deque<FaceId> q{src};
  seen[box.face_index(src)] = 1;
  while (!q.empty()) {
    FaceId f = q.front();
    q.pop_front();
    const FaceId nbrs[4] = {{f.i + 1, f.j}, {f.i - 1, f.j}, {f.i, f.j + 1}, {f.i, f.j - 1}};
    for (const FaceId& g : nbrs) {
      if (!face_allowed(st, g) || seen[box.face_index(g)]) continue;
      EdgeId e = edge_between_faces(f, g);
      if (!box.contains(e)) continue;
      if (st.anchored && e == st.anchor) continue;
      if (st.cfg->open(e)) continue;
      bool ex = false;
      for (const FaceId& w : exempt) ex = ex || (w == g);
      if (!ex && st.used_face[box.face_index(g)]) continue;
      if (face_on_ring(st, g)) return true;
      seen[box.face_index(g)] = 1;
      q.push_back(g);
    }
  }
  return false;
}

}  // namespace impl

// Exhaustive packing check of an edge-anchored arm event: enumerate families
// of vertex-disjoint arms (disjoint away from the anchor's endpoints per
// color class), then accept if some family's landing order around the center
// reads the spec cyclically. Exponential; intended for m <= 4.
inline bool packing_edge_arm_event(const BondConfig& cfg, const EdgeId& e, int m,
                                   const ArmSpec& spec) {
  const Box& box = cfg.box();
  const Vertex a = e.base, b = edge_other_end(e);
  const FaceId fa = face_below(e), fb = face_above(e);
  impl::PackingState st;
  st.cfg = &cfg;
  st.center = e.base;
  st.m = m;
  st.min_y = spec.region == ArmRegion::upper_half_plane ? e.base.y
                                                        : std::numeric_limits<int>::min();
  st.anchor = e;
  st.anchored = true;
  st.used_vertex.assign(box.vertex_count(), 0);
  st.used_face.assign(box.face_count(), 0);

  const int n_open = spec.count(ArmColor::open);
  const int n_closed = spec.count(ArmColor::closed);
  const std::vector<Vertex> open_exempt{a, b};
  const std::vector<FaceId> closed_exempt{fa, fb};

  // Check whether the landing multiset realizes the cyclic word.
  auto landings_match = [&]() {
    auto sorted = st.landings;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& p, const auto& q) { return impl::angular_less(p.first, q.first); });
    const std::size_t j = spec.colors.size();
    for (std::size_t r = 0; r < j; ++r) {
      bool ok = true;
      for (std::size_t i = 0; i < j && ok; ++i)
        ok = (sorted[(i + r) % j].second == spec.colors[i]);
      if (ok) return true;
    }
    return false;
  };

  // Place closed arms first (usually rarer), then open arms; each arm is a
  // self-avoiding open/closed path from an anchor endpoint, truncated at the
  // first ring contact.
  std::vector<Vertex> open_path;
  std::vector<FaceId> closed_path;

  auto place_open = [&](auto&& self, int remaining) -> bool {
    if (remaining == 0) return landings_match();
    // Prune: some endpoint must still reach the ring through unused vertices.
    if (!impl::open_reachable(st, a, open_exempt) &&
        !impl::open_reachable(st, b, open_exempt))
      return false;
    for (const Vertex& src : open_exempt) {
      if (!impl::vertex_allowed(st, src)) continue;
      if (impl::vertex_on_ring(st, src)) {
        // Zero-length arm landing at the source.
        std::size_t si = box.vertex_index(src);
        if (st.used_vertex[si]) continue;
        st.used_vertex[si] = 1;
        st.landings.push_back(
            {{2LL * (src.x - st.center.x), 2LL * (src.y - st.center.y)}, ArmColor::open});
        bool ok = self(self, remaining - 1);
        st.landings.pop_back();
        st.used_vertex[si] = 0;
        if (ok) return true;
        continue;
      }
      // DFS over self-avoiding open paths from src.
      auto dfs = [&](auto&& dfs_ref, Vertex v) -> bool {
        for (int d = 0; d < 4; ++d) {
          Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
          if (!impl::vertex_allowed(st, u)) continue;
          EdgeId step = dir::edge_from(v, d);
          if (step == e || !cfg.open(step)) continue;
          bool exempt = (u == a) || (u == b);
          std::size_t ui = box.vertex_index(u);
          if (!exempt && st.used_vertex[ui]) continue;
          bool on_path = false;
          for (const Vertex& w : open_path) on_path = on_path || (w == u);
          if (on_path || u == src) continue;
          if (impl::vertex_on_ring(st, u)) {
            if (st.used_vertex[ui]) continue;  // landings are never shared
            st.used_vertex[ui] = 1;
            st.landings.push_back(
                {{2LL * (u.x - st.center.x), 2LL * (u.y - st.center.y)}, ArmColor::open});
            for (const Vertex& w : open_path)
              if (!(w == a) && !(w == b)) st.used_vertex[box.vertex_index(w)] = 1;
            bool ok = self(self, remaining - 1);
            for (const Vertex& w : open_path)
              if (!(w == a) && !(w == b)) st.used_vertex[box.vertex_index(w)] = 0;
            st.landings.pop_back();
            st.used_vertex[ui] = 0;
            if (ok) return true;
            continue;
          }
          open_path.push_back(u);
          bool ok = dfs_ref(dfs_ref, u);
          open_path.pop_back();
          if (ok) return true;
        }
        return false;
      };
      if (dfs(dfs, src)) return true;
    }
    return false;
  };

  auto place_closed = [&](auto&& self, int remaining) -> bool {
    if (remaining == 0) return place_open(place_open, n_open);
    if (!impl::closed_reachable(st, fa, closed_exempt) &&
        !impl::closed_reachable(st, fb, closed_exempt))
      return false;
    for (const FaceId& src : closed_exempt) {
      if (!impl::face_allowed(st, src)) continue;
      if (impl::face_on_ring(st, src)) {
        std::size_t si = box.face_index(src);
        if (st.used_face[si]) continue;
        st.used_face[si] = 1;
        st.landings.push_back({{2LL * (src.i - st.center.x) + 1,
                                2LL * (src.j - st.center.y) + 1},
                               ArmColor::closed});
        bool ok = self(self, remaining - 1);
        st.landings.pop_back();
        st.used_face[si] = 0;
        if (ok) return true;
        continue;
      }
      auto dfs = [&](auto&& dfs_ref, FaceId f) -> bool {
        const FaceId nbrs[4] = {{f.i + 1, f.j}, {f.i - 1, f.j}, {f.i, f.j + 1}, {f.i, f.j - 1}};
        for (const FaceId& g : nbrs) {
          if (!impl::face_allowed(st, g)) continue;
          EdgeId step = edge_between_faces(f, g);
          if (!box.contains(step)) continue;
          if (step == e || cfg.open(step)) continue;
          bool exempt = (g == fa) || (g == fb);
          std::size_t gi = box.face_index(g);
          if (!exempt && st.used_face[gi]) continue;
          bool on_path = false;
          for (const FaceId& w : closed_path) on_path = on_path || (w == g);
          if (on_path || g == src) continue;
          if (impl::face_on_ring(st, g)) {
            if (st.used_face[gi]) continue;
            st.used_face[gi] = 1;
            st.landings.push_back({{2LL * (g.i - st.center.x) + 1,
                                    2LL * (g.j - st.center.y) + 1},
                                   ArmColor::closed});
            for (const FaceId& w : closed_path)
              if (!(w == fa) && !(w == fb)) st.used_face[box.face_index(w)] = 1;
            bool ok = self(self, remaining - 1);
            for (const FaceId& w : closed_path)
              if (!(w == fa) && !(w == fb)) st.used_face[box.face_index(w)] = 0;
            st.landings.pop_back();
            st.used_face[gi] = 0;
            if (ok) return true;
            continue;
          }
          closed_path.push_back(g);
          bool ok = dfs_ref(dfs_ref, g);
          closed_path.pop_back();
          if (ok) return true;
        }
        return false;
      };
      if (dfs(dfs, src)) return true;
    }
    return false;
  };

  return place_closed(place_closed, n_closed);
}

// ---------------------------------------------------------------------------
// Exhaustive statistics over the 4096 configurations of B_1.

struct EnumStats1 {
  double p_h1{0};
  double e_s1_given_h1{0};
  double p_a1{0};
  double e_sb1_given_a1{0};
};

inline EnumStats1 enumerate_stats1() {
  EnumStats1 st;
  uint64_t n_h = 0, n_a = 0, sum_s = 0, sum_r = 0;
  enumerate_configs(1, [&](const BondConfig& cfg) {
    if (auto s = shortest_crossing_length(cfg)) {
      ++n_h;
      sum_s += static_cast<uint64_t>(*s);
    }
    if (auto r = radial_distance_bfs(cfg)) {
      ++n_a;
      sum_r += static_cast<uint64_t>(*r);
    }
  });
  st.p_h1 = static_cast<double>(n_h) / 4096.0;
  st.e_s1_given_h1 = static_cast<double>(sum_s) / static_cast<double>(n_h);
  st.p_a1 = static_cast<double>(n_a) / 4096.0;
  st.e_sb1_given_a1 = static_cast<double>(sum_r) / static_cast<double>(n_a);
  return st;
}

// All open self-avoiding paths from the origin to the boundary (tiny boxes).
inline std::vector<std::vector<Vertex>> open_radial_paths(const BondConfig& cfg) {
  const Box& box = cfg.box();
  const int n = box.radius();
  if (n > 2) throw std::invalid_argument("open_radial_paths: n too large for brute force");
  std::vector<std::vector<Vertex>> out;
  std::vector<Vertex> path{{0, 0}};
  std::vector<uint8_t> used(box.vertex_count(), 0);
  used[box.vertex_index({0, 0})] = 1;
  auto dfs = [&](auto&& self, Vertex v) -> void {
    if (std::max(std::abs(v.x), std::abs(v.y)) == n) {
      out.push_back(path);
      return;  // truncated at first boundary contact
    }
    for (int d = 0; d < 4; ++d) {
      Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
      if (!box.contains(u) || used[box.vertex_index(u)]) continue;
      if (!cfg.open(dir::edge_from(v, d))) continue;
      used[box.vertex_index(u)] = 1;
      path.push_back(u);
      self(self, u);
      path.pop_back();
      used[box.vertex_index(u)] = 0;
    }
  };
  dfs(dfs, Vertex{0, 0});
  return out;
}

// The only self-avoiding circuit surrounding the origin inside B_1 is the
// square through the eight neighbors.
inline bool square_circuit_open(const BondConfig& cfg) {
  const EdgeId square[8] = {
      {Orientation::horizontal, {-1, -1}}, {Orientation::horizontal, {0, -1}},
      {Orientation::horizontal, {-1, 1}},  {Orientation::horizontal, {0, 1}},
      {Orientation::vertical, {-1, -1}},   {Orientation::vertical, {-1, 0}},
      {Orientation::vertical, {1, -1}},    {Orientation::vertical, {1, 0}},
  };
  for (const EdgeId& e : square)
    if (!cfg.open(e)) return false;
  return true;
}

}  // namespace perc::oracle
