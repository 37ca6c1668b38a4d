#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "perc/lattice.hpp"

// Canonical geometric objects of a configuration: connectivity, the lowest
// crossing with its below-region, the innermost-circuit decomposition, and
// the radial path hugging the canonical closed dual path out of the origin.

namespace perc {

enum class LatticeKind : uint8_t { primal, dual };

// Ordered vertex/edge sequence. Dual paths store face coordinates (i,j)
// for the dual vertex (i+1/2, j+1/2), and each dual edge is identified by
// the primal edge it crosses.
struct LatticePath {
  LatticeKind lattice{LatticeKind::primal};
  std::vector<Vertex> vertices;
  std::vector<EdgeId> edges;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t edge_count() const { return edges.size(); }
  bool empty() const { return vertices.empty(); }
};

struct Circuit {
  LatticePath path;  // closed: first vertex repeated as last
  bool around_origin{false};
};

namespace dir {
// 0=E, 1=N, 2=W, 3=S
inline constexpr int dx[4] = {1, 0, -1, 0};
inline constexpr int dy[4] = {0, 1, 0, -1};
inline int right_of(int h) { return (h + 3) & 3; }
inline int left_of(int h) { return (h + 1) & 3; }
inline int opposite(int h) { return (h + 2) & 3; }

inline EdgeId edge_from(const Vertex& v, int d) {
  switch (d) {
    case 0: return {Orientation::horizontal, v};
    case 1: return {Orientation::vertical, v};
    case 2: return {Orientation::horizontal, {v.x - 1, v.y}};
    default: return {Orientation::vertical, {v.x, v.y - 1}};
  }
}
}  // namespace dir

// Region of vertices used to restrict path searches.
class VertexMask {
 public:
  explicit VertexMask(const Box& box, bool value = false)
      : box_(box), bits_(box.vertex_count(), value ? 1 : 0) {}

  static VertexMask all(const Box& box) { return VertexMask(box, true); }

  // B_m(center) intersected with the host box.
  static VertexMask sub_box(const Box& box, Vertex center, int m) {
    VertexMask mask(box);
    for (int y = std::max(center.y - m, -box.radius()); y <= std::min(center.y + m, box.radius()); ++y)
      for (int x = std::max(center.x - m, -box.radius()); x <= std::min(center.x + m, box.radius()); ++x)
        mask.set({x, y});
    return mask;
  }

  const Box& box() const { return box_; }
  void set(const Vertex& v, bool b = true) { bits_[box_.vertex_index(v)] = b; }
  bool test(const Vertex& v) const {
    return box_.contains(v) && bits_[box_.vertex_index(v)];
  }

 private:
  Box box_;
  std::vector<uint8_t> bits_;
};

// {A <->_region B}: open path inside the region joining A to B.
inline bool connected(const BondConfig& cfg, std::span<const Vertex> a,
                      std::span<const Vertex> b, const VertexMask& region) {
  if (a.empty() || b.empty()) throw std::invalid_argument("connected: empty vertex set");
  const Box& box = cfg.box();
  std::vector<uint8_t> target(box.vertex_count(), 0), seen(box.vertex_count(), 0);
  for (const Vertex& v : b) {
    if (!box.contains(v)) throw std::out_of_range("connected: vertex outside box");
    target[box.vertex_index(v)] = 1;
  }
  std::deque<Vertex> queue;
  for (const Vertex& v : a) {
    if (!box.contains(v)) throw std::out_of_range("connected: vertex outside box");
    if (!region.test(v)) continue;
    std::size_t i = box.vertex_index(v);
    if (target[i]) return true;
    if (!seen[i]) {
      seen[i] = 1;
      queue.push_back(v);
    }
  }
  while (!queue.empty()) {
    Vertex v = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
      if (!box.contains(u) || !region.test(u)) continue;
      std::size_t ui = box.vertex_index(u);
      if (seen[ui]) continue;
      if (!cfg.open(dir::edge_from(v, d))) continue;
      if (target[ui]) return true;
      seen[ui] = 1;
      queue.push_back(u);
    }
  }
  return false;
}

inline bool connected(const BondConfig& cfg, Vertex a, std::span<const Vertex> b,
                      const VertexMask& region) {
  const Vertex arr[1] = {a};
  return connected(cfg, std::span<const Vertex>(arr, 1), b, region);
}

inline std::vector<Vertex> boundary_vertices(const Box&, int m) {
  std::vector<Vertex> out;
  for (int x = -m; x <= m; ++x) {
    out.push_back({x, -m});
    if (m > 0) out.push_back({x, m});
  }
  for (int y = -m + 1; y <= m - 1; ++y) {
    out.push_back({-m, y});
    out.push_back({m, y});
  }
  return out;
}

namespace detail {

// Depth-first wall walk over open edges with per-directed-edge marks
// (Tremaux). Preference order "right turn, straight, left turn" keeps the
// followed wall on the walker's right; retreats pop the trail, so the trail
// at success is the wall-hugging route. The trail may revisit a vertex that
// is still active; callers loop-erase.
struct WalkFrame {
  Vertex v;
  int8_t heading;
  int8_t k;
  bool initial;
};

inline std::vector<Vertex> loop_erase(const std::vector<WalkFrame>& trail, const Box& box) {
  std::vector<Vertex> out;
  std::unordered_map<std::size_t, std::size_t> pos;
  out.reserve(trail.size());
  for (const WalkFrame& f : trail) {
    std::size_t key = box.vertex_index(f.v);
    auto it = pos.find(key);
    if (it != pos.end()) {
      for (std::size_t i = it->second + 1; i < out.size(); ++i)
        pos.erase(box.vertex_index(out[i]));
      out.resize(it->second + 1);
    } else {
      pos.emplace(key, out.size());
      out.push_back(f.v);
    }
  }
  return out;
}

// stop semantics: with immediate_stop, the walk ends the first time it
// pushes a stop vertex. Otherwise a stop vertex ends the walk only once its
// own continuations are exhausted, so the walk can dive back into the box
// and pinch off pockets against the far wall before settling on an
// endpoint.
template <typename OpenFn, typename StopFn, typename AllowFn>
std::optional<std::vector<Vertex>> wall_walk(const Box& box, Vertex start,
                                             std::span<const int> initial_prefs,
                                             OpenFn&& edge_open, StopFn&& stop,
                                             AllowFn&& move_allowed, bool immediate_stop,
                                             std::vector<uint8_t>& dir_mark) {
  if (stop(start) && immediate_stop) return std::vector<Vertex>{start};
  std::vector<WalkFrame> trail;
  trail.push_back({start, 0, 0, true});
  while (!trail.empty()) {
    WalkFrame& top = trail.back();
    int n_prefs = top.initial ? static_cast<int>(initial_prefs.size()) : 3;
    if (top.k >= n_prefs) {
      if (!immediate_stop && stop(top.v)) return loop_erase(trail, box);
      trail.pop_back();
      continue;
    }
    int d;
    if (top.initial) {
      d = initial_prefs[top.k];
    } else {
      int h = top.heading;
      d = top.k == 0 ? dir::right_of(h) : (top.k == 1 ? h : dir::left_of(h));
    }
    ++top.k;
    Vertex u{top.v.x + dir::dx[d], top.v.y + dir::dy[d]};
    EdgeId e = dir::edge_from(top.v, d);
    if (!box.contains(e)) continue;
    if (!move_allowed(top.v, d)) continue;
    std::size_t mark = box.vertex_index(top.v) * 4 + d;
    if (dir_mark[mark]) continue;
    if (!edge_open(e)) continue;
    dir_mark[mark] = 1;
    trail.push_back({u, static_cast<int8_t>(d), 0, false});
    if (immediate_stop && stop(u)) return loop_erase(trail, box);
  }
  return std::nullopt;
}

}  // namespace detail

// Lowest crossing plus the region bookkeeping the detour machinery needs.
struct LowestCrossing {
  LatticePath path;                    // left side to right side
  std::vector<uint8_t> below_face;     // padded face grid: B(l_n) as faces
  std::vector<uint8_t> below_vertex;   // vertices strictly inside B(l_n)
  std::vector<uint8_t> path_vertex;    // vertex flags
  std::vector<uint8_t> path_edge;      // edge index flags
  std::vector<std::size_t> path_pos;   // vertex index -> position on path (or npos)

  bool on_path(const Box& box, const Vertex& v) const {
    return box.contains(v) && path_vertex[box.vertex_index(v)];
  }
  bool on_path(const Box& box, const EdgeId& e) const {
    return box.contains(e) && path_edge[box.edge_index(e)];
  }
  bool vertex_below(const Box& box, const Vertex& v) const {
    return box.contains(v) && below_vertex[box.vertex_index(v)];
  }
  bool face_below(const Box& box, const FaceId& f) const {
    return box.face_in_grid(f) && below_face[box.face_index(f)];
  }
};

inline LatticePath path_from_vertices(std::vector<Vertex> vs,
                                      LatticeKind kind = LatticeKind::primal) {
  LatticePath p;
  p.lattice = kind;
  p.vertices = std::move(vs);
  p.edges.reserve(p.vertices.empty() ? 0 : p.vertices.size() - 1);
  for (std::size_t i = 0; i + 1 < p.vertices.size(); ++i) {
    const Vertex& a = p.vertices[i];
    const Vertex& b = p.vertices[i + 1];
    int ddx = b.x - a.x, ddy = b.y - a.y;
    if (std::abs(ddx) + std::abs(ddy) != 1)
      throw std::invalid_argument("path_from_vertices: step not unit");
    if (ddx == 1) p.edges.push_back({Orientation::horizontal, a});
    else if (ddx == -1) p.edges.push_back({Orientation::horizontal, b});
    else if (ddy == 1) p.edges.push_back({Orientation::vertical, a});
    else p.edges.push_back({Orientation::vertical, b});
  }
  return p;
}

inline std::optional<LowestCrossing> lowest_crossing_full(const BondConfig& cfg) {
  const Box& box = cfg.box();
  const int n = box.radius();
  std::vector<uint8_t> dir_mark(box.vertex_count() * 4, 0);
  auto open_fn = [&](const EdgeId& e) { return cfg.open(e); };
  auto stop_fn = [&](const Vertex& v) { return v.x == n; };
  // Runs along a side wall with the hand outside the box never reduce the
  // region: up the right wall and down the left wall are forbidden.
  auto allow_fn = [&](const Vertex& v, int d) {
    if (v.x == n && d == 1) return false;
    if (v.x == -n && d == 3) return false;
    return true;
  };
  // The walker enters from outside the left wall heading east, hand on the
  // wall below; entries are tried bottom to top, so the first success hugs
  // the union of the bottom side and the closed dual clusters attached to it.
  static constexpr int entry_prefs[3] = {3, 0, 1};  // S, E, N
  std::optional<std::vector<Vertex>> walk;
  for (int y0 = -n; y0 <= n && !walk; ++y0)
    walk = detail::wall_walk(box, Vertex{-n, y0}, std::span<const int>(entry_prefs, 3),
                             open_fn, stop_fn, allow_fn, false, dir_mark);
  if (!walk) return std::nullopt;
  // Runs along the side walls at the two ends enclose no area; the
  // canonical crossing starts at the last vertex of the left-wall run and
  // ends at the first vertex of the terminal right-wall run.
  std::size_t first = 0;
  while (first + 1 < walk->size() && (*walk)[first + 1].x == -n) ++first;
  if (first > 0) walk->erase(walk->begin(), walk->begin() + static_cast<std::ptrdiff_t>(first));
  while (walk->size() >= 2 && (*walk)[walk->size() - 2].x == n) walk->pop_back();

  LowestCrossing low;
  low.path = path_from_vertices(std::move(*walk));
  low.path_vertex.assign(box.vertex_count(), 0);
  low.path_edge.assign(box.edge_count(), 0);
  low.path_pos.assign(box.vertex_count(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < low.path.vertices.size(); ++i) {
    low.path_vertex[box.vertex_index(low.path.vertices[i])] = 1;
    low.path_pos[box.vertex_index(low.path.vertices[i])] = i;
  }
  for (const EdgeId& e : low.path.edges) low.path_edge[box.edge_index(e)] = 1;

  // B(l_n) as faces: flood from a virtual strip of faces below the box,
  // crossing only edges not on the path. Side and top ring faces are not in
  // the flood domain; the region is confined to the square.
  low.below_face.assign(box.face_count(), 0);
  std::deque<FaceId> fq;
  for (int i = -n; i <= n - 1; ++i) {
    FaceId f{i, -n - 1};
    low.below_face[box.face_index(f)] = 1;
    fq.push_back(f);
  }
  auto face_in_domain = [&](const FaceId& f) {
    return box.face_interior(f) || (f.j == -n - 1 && f.i >= -n && f.i <= n - 1);
  };
  while (!fq.empty()) {
    FaceId f = fq.front();
    fq.pop_front();
    const FaceId nbrs[4] = {{f.i + 1, f.j}, {f.i - 1, f.j}, {f.i, f.j + 1}, {f.i, f.j - 1}};
    for (const FaceId& g : nbrs) {
      if (!face_in_domain(g) || low.below_face[box.face_index(g)]) continue;
      EdgeId shared = edge_between_faces(f, g);
      if (box.contains(shared) && low.path_edge[box.edge_index(shared)]) continue;
      low.below_face[box.face_index(g)] = 1;
      fq.push_back(g);
    }
  }

  // Vertices strictly inside B(l_n): reachable from the bottom side without
  // touching a path vertex. Edge states are irrelevant, the region is
  // geometric.
  low.below_vertex.assign(box.vertex_count(), 0);
  std::deque<Vertex> vq;
  for (int x = -n; x <= n; ++x) {
    Vertex v{x, -n};
    if (!low.path_vertex[box.vertex_index(v)]) {
      low.below_vertex[box.vertex_index(v)] = 1;
      vq.push_back(v);
    }
  }
  while (!vq.empty()) {
    Vertex v = vq.front();
    vq.pop_front();
    for (int d = 0; d < 4; ++d) {
      Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
      if (!box.contains(u)) continue;
      std::size_t ui = box.vertex_index(u);
      if (low.below_vertex[ui] || low.path_vertex[ui]) continue;
      low.below_vertex[ui] = 1;
      vq.push_back(u);
    }
  }
  return low;
}

inline std::optional<LatticePath> lowest_crossing(const BondConfig& cfg) {
  auto full = lowest_crossing_full(cfg);
  if (!full) return std::nullopt;
  return std::move(full->path);
}

namespace detail {

// Closed dual cluster grown from seed faces. Growth stays on in-box faces;
// stepping onto the outer ring through a closed wall edge is an escape and
// is recorded rather than expanded.
struct DualCluster {
  std::vector<uint8_t> in_region;  // padded face grid flags
  bool escaped{false};
};

template <typename Cfg>
DualCluster grow_dual_cluster(const Cfg& cfg, std::vector<FaceId> seeds,
                              const std::vector<uint8_t>* blocked = nullptr) {
  const Box& box = cfg.box();
  DualCluster cl;
  cl.in_region.assign(box.face_count(), 0);
  std::deque<FaceId> queue;
  for (const FaceId& f : seeds) {
    if (!box.face_interior(f)) {
      cl.escaped = true;
      continue;
    }
    std::size_t fi = box.face_index(f);
    if (cl.in_region[fi]) continue;
    if (blocked && (*blocked)[fi]) continue;
    cl.in_region[fi] = 1;
    queue.push_back(f);
  }
  while (!queue.empty()) {
    FaceId f = queue.front();
    queue.pop_front();
    const FaceId nbrs[4] = {{f.i + 1, f.j}, {f.i - 1, f.j}, {f.i, f.j + 1}, {f.i, f.j - 1}};
    for (const FaceId& g : nbrs) {
      EdgeId shared = edge_between_faces(f, g);
      if (!box.contains(shared)) continue;
      if (cfg.open(shared)) continue;
      if (!box.face_interior(g)) {
        cl.escaped = true;
        continue;
      }
      std::size_t gi = box.face_index(g);
      if (cl.in_region[gi]) continue;
      if (blocked && (*blocked)[gi]) continue;
      cl.in_region[gi] = 1;
      queue.push_back(g);
    }
  }
  return cl;
}

// Add enclosed pockets: complement faces not 4-connected to the outer ring
// through complement faces. After filling, the region boundary is a simple
// closed curve of open edges.
inline void fill_pockets(const Box& box, std::vector<uint8_t>& region) {
  std::vector<uint8_t> outside(box.face_count(), 0);
  std::deque<FaceId> queue;
  const int n = box.radius();
  for (int i = -n - 1; i <= n; ++i)
    for (int j = -n - 1; j <= n; ++j) {
      if (i > -n - 1 && i < n && j > -n - 1 && j < n) continue;  // ring only
      FaceId f{i, j};
      std::size_t fi = box.face_index(f);
      if (!region[fi]) {
        outside[fi] = 1;
        queue.push_back(f);
      }
    }
  while (!queue.empty()) {
    FaceId f = queue.front();
    queue.pop_front();
    const FaceId nbrs[4] = {{f.i + 1, f.j}, {f.i - 1, f.j}, {f.i, f.j + 1}, {f.i, f.j - 1}};
    for (const FaceId& g : nbrs) {
      if (!box.face_in_grid(g)) continue;
      std::size_t gi = box.face_index(g);
      if (outside[gi] || region[gi]) continue;
      outside[gi] = 1;
      queue.push_back(g);
    }
  }
  for (std::size_t i = 0; i < region.size(); ++i)
    if (!region[i] && !outside[i]) region[i] = 1;
}

// Counterclockwise boundary trace of a filled region (region kept on the
// left). Valid when the region is pocket-free, so the boundary is simple.
inline Circuit trace_region_boundary(const Box& box, const std::vector<uint8_t>& region) {
  const int n = box.radius();
  auto in_region = [&](int i, int j) {
    FaceId f{i, j};
    return box.face_in_grid(f) && region[box.face_index(f)];
  };
  FaceId f0{0, 0};
  bool found = false;
  for (int j = -n; j <= n - 1 && !found; ++j)
    for (int i = -n; i <= n - 1 && !found; ++i)
      if (in_region(i, j)) {
        f0 = {i, j};
        found = true;
      }
  if (!found) throw std::logic_error("trace_region_boundary: empty region");

  Vertex start{f0.i, f0.j};
  std::vector<Vertex> verts{start};
  Vertex v = start;
  int h = 0;  // east along the bottom of f0
  do {
    // Faces ahead-left / ahead-right of heading h at v decide the turn.
    int al_i, al_j, ar_i, ar_j;
    switch (h) {
      case 0: al_i = v.x; al_j = v.y; ar_i = v.x; ar_j = v.y - 1; break;
      case 1: al_i = v.x - 1; al_j = v.y; ar_i = v.x; ar_j = v.y; break;
      case 2: al_i = v.x - 1; al_j = v.y - 1; ar_i = v.x - 1; ar_j = v.y; break;
      default: al_i = v.x; al_j = v.y - 1; ar_i = v.x - 1; ar_j = v.y - 1; break;
    }
    int next;
    if (in_region(ar_i, ar_j)) next = dir::right_of(h);      // region bulges right
    else if (in_region(al_i, al_j)) next = h;                // edge continues
    else next = dir::left_of(h);                             // region turns left
    v = Vertex{v.x + dir::dx[next], v.y + dir::dy[next]};
    h = next;
    verts.push_back(v);
  } while (!(v == start));
  Circuit c;
  c.path = path_from_vertices(std::move(verts));
  c.around_origin = true;
  return c;
}

inline std::vector<FaceId> origin_faces() {
  return {{-1, -1}, {0, -1}, {-1, 0}, {0, 0}};
}

// The twelve dual edges incident to the origin's dual neighbors, identified
// by the primal edges they cross, in EdgeId order.
inline std::vector<EdgeId> origin_incident_dual_edges() {
  return {
      {Orientation::horizontal, {-1, -1}}, {Orientation::horizontal, {0, -1}},
      {Orientation::horizontal, {-1, 0}},  {Orientation::horizontal, {0, 0}},
      {Orientation::horizontal, {-1, 1}},  {Orientation::horizontal, {0, 1}},
      {Orientation::vertical, {-1, -1}},   {Orientation::vertical, {0, -1}},
      {Orientation::vertical, {1, -1}},    {Orientation::vertical, {-1, 0}},
      {Orientation::vertical, {0, 0}},     {Orientation::vertical, {1, 0}},
  };
}

}  // namespace detail

struct CircuitDecomposition {
  int K{0};
  std::vector<Circuit> circuits;        // innermost first
  std::vector<LatticePath> connectors;  // K+1 of them
};

// Deterministic shortest open connector between two vertex sets, restricted
// to `allowed` vertices. Ties break by the (y,x) order of the endpoint and
// by edge order along the search, so witnesses are reproducible.
inline std::optional<LatticePath> geodesic_connector(const BondConfig& cfg,
                                                     std::span<const Vertex> sources,
                                                     std::span<const Vertex> targets,
                                                     const std::vector<uint8_t>& allowed) {
  const Box& box = cfg.box();
  std::vector<int> dist(box.vertex_count(), -1);
  std::vector<int> parent(box.vertex_count(), -1);
  std::vector<uint8_t> is_target(box.vertex_count(), 0);
  for (const Vertex& v : targets) is_target[box.vertex_index(v)] = 1;

  std::vector<Vertex> srcs(sources.begin(), sources.end());
  std::sort(srcs.begin(), srcs.end(), yx_less);
  std::deque<Vertex> queue;
  int best = -1;
  Vertex best_v{};
  for (const Vertex& v : srcs) {
    std::size_t vi = box.vertex_index(v);
    if (!allowed[vi]) continue;
    if (is_target[vi] && best < 0) {
      best = 0;
      best_v = v;
    }
    if (dist[vi] < 0) {
      dist[vi] = 0;
      queue.push_back(v);
    }
  }
  // Incident edges in EdgeId order: W, E, S, N.
  static constexpr int edge_order[4] = {2, 0, 3, 1};
  while (!queue.empty() && best != 0) {
    Vertex v = queue.front();
    queue.pop_front();
    std::size_t vi = box.vertex_index(v);
    if (best >= 0 && dist[vi] + 1 > best) break;
    for (int d : edge_order) {
      Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
      if (!box.contains(u)) continue;
      std::size_t ui = box.vertex_index(u);
      if (!allowed[ui] || dist[ui] >= 0) continue;
      if (!cfg.open(dir::edge_from(v, d))) continue;
      dist[ui] = dist[vi] + 1;
      parent[ui] = static_cast<int>(vi);
      if (is_target[ui]) {
        if (best < 0 || dist[ui] < best) {
          best = dist[ui];
          best_v = u;
        } else if (dist[ui] == best && yx_less(u, best_v)) {
          best_v = u;
        }
      }
      queue.push_back(u);
    }
  }
  if (best < 0) return std::nullopt;
  std::vector<Vertex> rev{best_v};
  std::size_t cur = box.vertex_index(best_v);
  while (parent[cur] >= 0) {
    cur = static_cast<std::size_t>(parent[cur]);
    const int side = box.side();
    rev.push_back({static_cast<int>(cur % side) - box.radius(),
                   static_cast<int>(cur / side) - box.radius()});
  }
  std::reverse(rev.begin(), rev.end());
  return path_from_vertices(std::move(rev));
}

// Canonical closed dual path from the origin's dual neighborhood to the
// boundary, built by a left-hand wall walk over closed dual edges starting
// at the smallest closed incident edge. Exposed for tests; the radial path
// construction keys its chirality off this path's first step.
inline std::optional<LatticePath> canonical_origin_dual_path(const BondConfig& cfg) {
  const Box& box = cfg.box();
  auto is_origin_face = [](const FaceId& f) {
    return f.i >= -1 && f.i <= 0 && f.j >= -1 && f.j <= 0;
  };
  struct Frame {
    FaceId f;
    int8_t heading;
    int8_t k;
    bool initial;
  };
  auto face_step = [](const FaceId& f, int d) {
    return FaceId{f.i + dir::dx[d], f.j + dir::dy[d]};
  };

  // Left-hand ordered DFS over closed dual edges; faces play the role of
  // vertices. Stops on the first step onto the outer face ring. The four
  // dual neighbors of the origin can sit in separate closed clusters, so
  // incident edges are tried in order until one escapes.
  std::optional<std::vector<FaceId>> found;
  for (const EdgeId& e0 : detail::origin_incident_dual_edges()) {
    if (!cfg.closed(e0)) continue;
    FaceId fa = face_below(e0), fb = face_above(e0);
    FaceId start = fa, other = fb;
    if (is_origin_face(fa) && is_origin_face(fb)) {
      if (fb.j < fa.j || (fb.j == fa.j && fb.i < fa.i)) std::swap(start, other);
    } else if (!is_origin_face(fa)) {
      std::swap(start, other);
    }
    int h0 = 0;
    for (int d = 0; d < 4; ++d)
      if (face_step(start, d) == other) h0 = d;

    std::vector<uint8_t> mark(box.face_count() * 4, 0);
    std::vector<Frame> trail;
    trail.push_back({start, static_cast<int8_t>(h0), 0, true});
    while (!trail.empty() && !found) {
      Frame& top = trail.back();
      if (top.k >= (top.initial ? 4 : 3)) {
        trail.pop_back();
        continue;
      }
      int h = top.heading;
      int d;
      if (top.initial) {
        const int order[4] = {h, dir::left_of(h), dir::opposite(h), dir::right_of(h)};
        d = order[top.k];
      } else {
        d = top.k == 0 ? dir::left_of(h) : (top.k == 1 ? h : dir::right_of(h));
      }
      ++top.k;
      FaceId g = face_step(top.f, d);
      EdgeId crossing = edge_between_faces(top.f, g);
      if (!box.contains(crossing) || cfg.open(crossing)) continue;
      std::size_t m = box.face_index(top.f) * 4 + d;
      if (mark[m]) continue;
      mark[m] = 1;
      if (!box.face_interior(g)) {
        std::vector<FaceId> faces;
        faces.reserve(trail.size() + 1);
        for (const Frame& fr : trail) faces.push_back(fr.f);
        faces.push_back(g);
        found = std::move(faces);
        break;
      }
      trail.push_back({g, static_cast<int8_t>(d), 0, false});
    }
    if (found) break;
  }
  if (!found) return std::nullopt;

  // Loop-erase on faces, then emit as a dual path.
  std::vector<FaceId> erased;
  std::unordered_map<std::size_t, std::size_t> pos;
  for (const FaceId& f : *found) {
    std::size_t key = box.face_index(f);
    auto it = pos.find(key);
    if (it != pos.end()) {
      for (std::size_t i = it->second + 1; i < erased.size(); ++i)
        pos.erase(box.face_index(erased[i]));
      erased.resize(it->second + 1);
    } else {
      pos.emplace(key, erased.size());
      erased.push_back(f);
    }
  }
  LatticePath p;
  p.lattice = LatticeKind::dual;
  for (const FaceId& f : erased) p.vertices.push_back({f.i, f.j});
  for (std::size_t i = 0; i + 1 < erased.size(); ++i)
    p.edges.push_back(edge_between_faces(erased[i], erased[i + 1]));
  return p;
}

// sigma~_n on A_n with no open circuit around the origin: the open radial
// path swept first counterclockwise from the canonical closed dual path,
// i.e. hugging that path's cluster on the walker's right.
inline LatticePath leftmost_radial_path(const BondConfig& cfg) {
  const Box& box = cfg.box();
  const int n = box.radius();
  auto bnd = boundary_vertices(box, n);
  if (!connected(cfg, Vertex{0, 0}, bnd, VertexMask::all(box)))
    throw std::invalid_argument("leftmost_radial_path: origin not connected to boundary");
  auto cluster = detail::grow_dual_cluster(cfg, detail::origin_faces());
  if (!cluster.escaped)
    throw std::invalid_argument("leftmost_radial_path: an open circuit surrounds the origin");

  auto dual = canonical_origin_dual_path(cfg);
  if (!dual || dual->vertices.empty())
    throw std::logic_error("leftmost_radial_path: no canonical dual path");
  FaceId f0{dual->vertices.front().x, dual->vertices.front().y};
  int h0;
  if (f0.i == 0 && f0.j == 0) h0 = 1;        // NE face: head north
  else if (f0.i == -1 && f0.j == 0) h0 = 2;  // NW: west
  else if (f0.i == -1 && f0.j == -1) h0 = 3; // SW: south
  else h0 = 0;                               // SE: east

  const int initial[4] = {h0, dir::left_of(h0), dir::opposite(h0), dir::right_of(h0)};
  std::vector<uint8_t> dir_mark(box.vertex_count() * 4, 0);
  auto open_fn = [&](const EdgeId& e) { return cfg.open(e); };
  auto stop_fn = [&](const Vertex& v) {
    return std::max(std::abs(v.x), std::abs(v.y)) == n;
  };
  auto allow_fn = [](const Vertex&, int) { return true; };
  auto walk = detail::wall_walk(box, Vertex{0, 0}, std::span<const int>(initial, 4),
                                open_fn, stop_fn, allow_fn, true, dir_mark);
  if (!walk) throw std::logic_error("leftmost_radial_path: walk failed on A_n");
  return path_from_vertices(std::move(*walk));
}

// Iterated innermost-circuit peeling. Circuit k+1 is the boundary of the
// closed dual cluster grown from all faces touching circuit k (so it is
// vertex-disjoint from circuit k); escape through the box wall ends the
// peeling. Connectors are deterministic open geodesics between consecutive
// circuits.
inline CircuitDecomposition innermost_circuits(const BondConfig& cfg) {
  const Box& box = cfg.box();
  const int n = box.radius();
  auto bnd = boundary_vertices(box, n);
  if (!connected(cfg, Vertex{0, 0}, bnd, VertexMask::all(box)))
    throw std::invalid_argument("innermost_circuits: origin not connected to boundary");

  CircuitDecomposition out;
  std::vector<std::vector<uint8_t>> interiors;  // filled face region per circuit
  auto cluster = detail::grow_dual_cluster(cfg, detail::origin_faces());
  if (cluster.escaped) {
    out.K = 0;
    out.connectors.push_back(leftmost_radial_path(cfg));
    return out;
  }

  std::vector<uint8_t> region = cluster.in_region;
  while (true) {
    detail::fill_pockets(box, region);
    out.circuits.push_back(detail::trace_region_boundary(box, region));
    interiors.push_back(region);

    // Seed every face incident to a vertex of the new circuit; the next
    // circuit then cannot share a vertex with this one.
    std::vector<FaceId> seeds;
    bool wall = false;
    for (const Vertex& v : out.circuits.back().path.vertices) {
      const FaceId fs[4] = {{v.x - 1, v.y - 1}, {v.x, v.y - 1}, {v.x - 1, v.y}, {v.x, v.y}};
      for (const FaceId& f : fs) {
        if (!box.face_interior(f)) {
          wall = true;
          continue;
        }
        if (!region[box.face_index(f)]) seeds.push_back(f);
      }
    }
    if (wall) break;  // next circuit would need vertices outside the box
    auto next = detail::grow_dual_cluster(cfg, seeds, &region);
    if (next.escaped) break;
    for (const FaceId& f : seeds) region[box.face_index(f)] = 1;
    for (std::size_t i = 0; i < region.size(); ++i)
      if (next.in_region[i]) region[i] = 1;
  }
  out.K = static_cast<int>(out.circuits.size());

  // Vertex flags for the closed interior of each circuit: corners of
  // interior faces plus the circuit itself.
  auto interior_close = [&](std::size_t k) {
    std::vector<uint8_t> flags(box.vertex_count(), 0);
    for (int i = -n; i <= n - 1; ++i)
      for (int j = -n; j <= n - 1; ++j)
        if (interiors[k][box.face_index(FaceId{i, j})])
          for (const Vertex& v :
               {Vertex{i, j}, Vertex{i + 1, j}, Vertex{i, j + 1}, Vertex{i + 1, j + 1}})
            flags[box.vertex_index(v)] = 1;
    return flags;
  };
  std::vector<std::vector<uint8_t>> closures;
  closures.reserve(interiors.size());
  for (std::size_t k = 0; k < interiors.size(); ++k) closures.push_back(interior_close(k));

  // Connectors: origin -> C_1, C_k -> C_{k+1}, C_K -> boundary. Allowed
  // vertices: the closed interior of the outer circuit minus the strict
  // interior of the inner one.
  for (int k = 0; k <= out.K; ++k) {
    std::vector<Vertex> sources, targets;
    if (k == 0) sources.push_back({0, 0});
    else sources = out.circuits[k - 1].path.vertices;
    if (k < out.K) targets = out.circuits[k].path.vertices;
    else targets = bnd;

    std::vector<uint8_t> allowed;
    if (k < out.K) allowed = closures[k];
    else allowed.assign(box.vertex_count(), 1);
    if (k > 0) {
      std::vector<uint8_t> inner = closures[k - 1];
      for (const Vertex& v : out.circuits[k - 1].path.vertices)
        inner[box.vertex_index(v)] = 0;
      for (std::size_t i = 0; i < allowed.size(); ++i)
        if (inner[i]) allowed[i] = 0;
    }
    auto conn = geodesic_connector(cfg, sources, targets, allowed);
    if (!conn)
      throw std::logic_error("innermost_circuits: missing connector on A_n");
    out.connectors.push_back(std::move(*conn));
  }
  return out;
}

// Ray cast from just north-east of v: circuit vertical edges at v's row,
// strictly to the right, toggle the parity. Vertices on the circuit are
// classified as not surrounded.
inline bool circuit_surrounds(const Circuit& c, const Vertex& v) {
  int crossings = 0;
  for (const EdgeId& e : c.path.edges)
    if (e.orient == Orientation::vertical && e.base.y == v.y && e.base.x >= v.x + 1)
      ++crossings;
  for (const Vertex& u : c.path.vertices)
    if (u == v) return false;
  return crossings % 2 == 1;
}

}  // namespace perc
