#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "perc/geometry.hpp"
#include "perc/lattice.hpp"

// Shielded detours around the lowest crossing and the shortcut crossing
// assembled from a disjoint family of them.
//
// A detour is a triple (P, Q, R): P an open arc leaving the lowest crossing
// vertically at two flat vertices, Q the detoured subpath of the crossing,
// R a closed dual arc shielding P from above. The five validity conditions
// are checked one by one so failures are reportable.

namespace perc {

struct ShieldedDetour {
  LatticePath detour;    // P: w_0 .. w_M, open, first/last steps vertical
  LatticePath detoured;  // Q: subpath of the lowest crossing from w_0 to w_M
  LatticePath shield;    // R: closed dual path over P
  EdgeId anchor{};
};

struct DetourReport {
  bool ok{false};
  std::vector<int> failed;  // indices of violated conditions, 1..5
};

// Width of the boundary collar excluded from detour anchoring.
inline int lambda_margin(int n, double alpha3 = 0.3) {
  return static_cast<int>(std::ceil(std::pow(static_cast<double>(n), alpha3 / 2.0)));
}

inline bool edge_in_lambda(const Box& box, const EdgeId& e, int margin) {
  const int lim = box.radius() - margin;
  const Vertex u = e.base, v = edge_other_end(e);
  return std::max(std::abs(u.x), std::abs(u.y)) <= lim &&
         std::max(std::abs(v.x), std::abs(v.y)) <= lim;
}

inline int default_detour_budget(double eps) {
  return 2 * static_cast<int>(std::ceil(1.0 / eps)) * 16;
}

namespace detail {

inline bool strictly_inside(const Box& box, const Vertex& v) {
  return std::max(std::abs(v.x), std::abs(v.y)) <= box.radius() - 1;
}

inline std::optional<std::size_t> edge_position(const Box& box, const LowestCrossing& low,
                                                const EdgeId& e) {
  if (!box.contains(e) || !low.path_edge[box.edge_index(e)]) return std::nullopt;
  // The edge joins consecutive path vertices; its position is the smaller
  // of their positions.
  std::size_t pa = low.path_pos[box.vertex_index(e.base)];
  std::size_t pb = low.path_pos[box.vertex_index(edge_other_end(e))];
  return std::min(pa, pb);
}

}  // namespace detail

inline DetourReport verify_shielded_detour(const BondConfig& cfg, const LowestCrossing& low,
                                           const ShieldedDetour& cand, double eps) {
  const Box& box = cfg.box();
  const LatticePath& P = cand.detour;
  const LatticePath& Q = cand.detoured;
  const LatticePath& R = cand.shield;
  for (const Vertex& v : P.vertices)
    if (!box.contains(v)) throw std::out_of_range("verify_shielded_detour: vertex outside box");
  if (P.vertices.size() < 2 || Q.vertices.size() < 2)
    throw std::invalid_argument("verify_shielded_detour: degenerate candidate");

  DetourReport rep;
  const Vertex w0 = P.vertices.front(), wM = P.vertices.back();

  // 1. Interior vertices of P above the lowest crossing: neither inside
  //    B(l_n) nor on l_n itself.
  bool c1 = true;
  for (std::size_t i = 1; i + 1 < P.vertices.size(); ++i) {
    const Vertex& v = P.vertices[i];
    if (low.vertex_below(box, v) || low.on_path(box, v)) c1 = false;
  }
  if (!c1) rep.failed.push_back(1);

  // 2. Flat horizontal pieces of l_n at both ends, vertical first and last
  //    steps of P.
  auto on_low = [&](const EdgeId& e) { return low.on_path(box, e); };
  bool c2 = box.contains(EdgeId{Orientation::horizontal, {w0.x - 1, w0.y}}) &&
            box.contains(EdgeId{Orientation::horizontal, w0}) &&
            box.contains(EdgeId{Orientation::horizontal, {wM.x - 1, wM.y}}) &&
            box.contains(EdgeId{Orientation::horizontal, wM}) &&
            on_low({Orientation::horizontal, {w0.x - 1, w0.y}}) &&
            on_low({Orientation::horizontal, w0}) &&
            on_low({Orientation::horizontal, {wM.x - 1, wM.y}}) &&
            on_low({Orientation::horizontal, wM});
  if (c2) {
    c2 = (P.vertices[1] == Vertex{w0.x, w0.y + 1}) &&
         (P.vertices[P.vertices.size() - 2] == Vertex{wM.x, wM.y + 1});
  }
  if (!c2) rep.failed.push_back(2);

  // 3. Q u P is a closed circuit strictly inside the box: P self-avoiding
  //    and open, Q the subpath of l_n from w_0 to w_M containing the anchor,
  //    interiors disjoint, no vertex on the box boundary.
  bool c3 = true;
  {
    std::vector<std::size_t> seen;
    for (const Vertex& v : P.vertices) seen.push_back(box.vertex_index(v));
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) c3 = false;
    for (const EdgeId& e : P.edges)
      if (!cfg.open(e)) c3 = false;
    std::size_t p0 = low.path_pos[box.vertex_index(w0)];
    std::size_t p1 = low.path_pos[box.vertex_index(wM)];
    if (p0 == static_cast<std::size_t>(-1) || p1 == static_cast<std::size_t>(-1) ||
        p0 >= p1)
      c3 = false;
    else {
      if (Q.vertices.size() != p1 - p0 + 1) c3 = false;
      else
        for (std::size_t i = 0; i < Q.vertices.size(); ++i)
          if (!(Q.vertices[i] == low.path.vertices[p0 + i])) c3 = false;
      auto epos = detail::edge_position(box, low, cand.anchor);
      if (!epos || *epos < p0 || *epos >= p1) c3 = false;
    }
    for (const Vertex& v : P.vertices)
      if (!detail::strictly_inside(box, v)) c3 = false;
    for (const Vertex& v : Q.vertices)
      if (!detail::strictly_inside(box, v)) c3 = false;
  }
  if (!c3) rep.failed.push_back(3);

  // 4. Shield: closed dual self-avoiding path from w_0 + (-e1+e2)/2 to
  //    w_M + (e1+e2)/2, vertical first and last edges, above B(l_n).
  bool c4 = R.lattice == LatticeKind::dual && R.vertices.size() >= 2;
  if (c4) {
    c4 = (R.vertices.front() == Vertex{w0.x - 1, w0.y}) &&
         (R.vertices.back() == Vertex{wM.x, wM.y});
    if (c4) {
      // A vertical dual edge crosses a horizontal primal edge.
      c4 = R.edges.front().orient == Orientation::horizontal &&
           R.edges.back().orient == Orientation::horizontal;
    }
    std::vector<std::size_t> seen;
    for (std::size_t i = 0; c4 && i < R.vertices.size(); ++i) {
      FaceId f{R.vertices[i].x, R.vertices[i].y};
      if (!box.face_interior(f) || low.face_below(box, f)) c4 = false;
      else seen.push_back(box.face_index(f));
      if (i + 1 < R.vertices.size()) {
        FaceId g{R.vertices[i + 1].x, R.vertices[i + 1].y};
        if (std::abs(f.i - g.i) + std::abs(f.j - g.j) != 1) c4 = false;
        else {
          EdgeId crossing = edge_between_faces(f, g);
          if (!box.contains(crossing) || cfg.open(crossing)) c4 = false;
          else if (!(R.edges[i] == crossing)) c4 = false;
        }
      }
    }
    if (c4) {
      std::sort(seen.begin(), seen.end());
      if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) c4 = false;
    }
  }
  if (!c4) rep.failed.push_back(4);

  // 5. #P <= eps * #Q in vertex counts.
  if (!(static_cast<double>(P.vertices.size()) <=
        eps * static_cast<double>(Q.vertices.size())))
    rep.failed.push_back(5);

  rep.ok = rep.failed.empty();
  return rep;
}

// Detour search context for one configuration: closed dual clusters of the
// region above the lowest crossing, flat-vertex flags, and edge positions.
class DetourFinder {
 public:
  DetourFinder(const BondConfig& cfg, const LowestCrossing& low) : cfg_(cfg), low_(low) {
    const Box& box = cfg.box();
    const int n = box.radius();
    face_cluster_.assign(box.face_count(), -1);
    int next_label = 0;
    for (int j = -n; j <= n - 1; ++j)
      for (int i = -n; i <= n - 1; ++i) {
        FaceId f{i, j};
        std::size_t fi = box.face_index(f);
        if (face_cluster_[fi] >= 0 || low_.below_face[fi]) continue;
        // Closed dual cluster above the crossing.
        std::deque<FaceId> queue{f};
        face_cluster_[fi] = next_label;
        while (!queue.empty()) {
          FaceId g = queue.front();
          queue.pop_front();
          const FaceId nbrs[4] = {{g.i + 1, g.j}, {g.i - 1, g.j}, {g.i, g.j + 1}, {g.i, g.j - 1}};
          for (const FaceId& h : nbrs) {
            if (!box.face_interior(h)) continue;
            std::size_t hi = box.face_index(h);
            if (face_cluster_[hi] >= 0 || low_.below_face[hi]) continue;
            EdgeId shared = edge_between_faces(g, h);
            if (!box.contains(shared) || cfg.open(shared)) continue;
            face_cluster_[hi] = next_label;
            queue.push_back(h);
          }
        }
        ++next_label;
      }

    const auto& path = low.path.vertices;
    flat_pos_.assign(path.size(), 0);
    for (std::size_t i = 1; i + 1 < path.size(); ++i)
      if (low.path.edges[i - 1].orient == Orientation::horizontal &&
          low.path.edges[i].orient == Orientation::horizontal)
        flat_pos_[i] = 1;
  }

  // First verified detour around e in the canonical order: shortest P
  // first, then smaller start vertex, then smaller end vertex under (y,x).
  std::optional<ShieldedDetour> find(const EdgeId& e, double eps, int budget,
                                     int margin) const {
    const Box& box = cfg_.box();
    if (!box.contains(e) || !low_.on_path(box, e))
      throw std::invalid_argument("find_detour: anchor not on the lowest crossing");
    if (!edge_in_lambda(box, e, margin))
      throw std::invalid_argument("find_detour: anchor outside the interior window");
    auto epos_opt = detail::edge_position(box, low_, e);
    const std::size_t epos = *epos_opt;
    const auto& path = low_.path.vertices;

    auto in_budget = [&](const Vertex& v) {
      return std::abs(v.x - e.base.x) <= budget && std::abs(v.y - e.base.y) <= budget;
    };
    auto above_ok = [&](const Vertex& v) {
      return box.contains(v) && detail::strictly_inside(box, v) && in_budget(v) &&
             !low_.vertex_below(box, v) && !low_.on_path(box, v);
    };

    // Candidate flat start/end vertices on the two sides of the anchor.
    struct FlatEnd {
      Vertex w;
      std::size_t pos;
      Vertex up;
    };
    std::vector<FlatEnd> starts, ends;
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
      if (!flat_pos_[i]) continue;
      const Vertex w = path[i];
      if (!in_budget(w) || !detail::strictly_inside(box, w)) continue;
      const Vertex up{w.x, w.y + 1};
      if (!above_ok(up)) continue;
      if (!cfg_.open(EdgeId{Orientation::vertical, w})) continue;
      if (i <= epos) starts.push_back({w, i, up});
      else ends.push_back({w, i, up});
    }
    if (starts.empty() || ends.empty()) return std::nullopt;
    std::sort(starts.begin(), starts.end(),
              [](const FlatEnd& a, const FlatEnd& b) { return yx_less(a.w, b.w); });

    // Multi-source BFS over the open region above the crossing, with
    // minimum-start labels propagated along the shortest-path DAG.
    std::vector<int> dist(box.vertex_count(), -1);
    std::vector<int> label(box.vertex_count(), -1);
    std::deque<Vertex> queue;
    std::vector<Vertex> order;
    for (std::size_t s = 0; s < starts.size(); ++s) {
      std::size_t vi = box.vertex_index(starts[s].up);
      if (dist[vi] == 0) continue;  // two flats sharing an up vertex: keep first
      dist[vi] = 0;
      label[vi] = static_cast<int>(s);
      queue.push_back(starts[s].up);
    }
    static constexpr int edge_order[4] = {2, 0, 3, 1};  // W, E, S, N
    while (!queue.empty()) {
      Vertex v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (int d : edge_order) {
        Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
        if (!above_ok(u)) continue;
        std::size_t ui = box.vertex_index(u);
        if (dist[ui] >= 0) continue;
        if (!cfg_.open(dir::edge_from(v, d))) continue;
        dist[ui] = dist[box.vertex_index(v)] + 1;
        queue.push_back(u);
      }
    }
    for (const Vertex& v : order) {
      std::size_t vi = box.vertex_index(v);
      if (dist[vi] == 0) continue;
      int best = std::numeric_limits<int>::max();
      for (int d : edge_order) {
        Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
        if (!above_ok(u)) continue;
        std::size_t ui = box.vertex_index(u);
        if (dist[ui] != dist[vi] - 1 || label[ui] < 0) continue;
        if (!cfg_.open(dir::edge_from(v, d))) continue;
        best = std::min(best, label[ui]);
      }
      if (best < std::numeric_limits<int>::max()) label[vi] = best;
    }

    struct Candidate {
      std::size_t len;  // #P vertices
      int start_label;
      Vertex wm;
      std::size_t end_pos;
    };
    std::vector<Candidate> cands;
    for (const FlatEnd& fe : ends) {
      std::size_t vi = box.vertex_index(fe.up);
      if (dist[vi] < 0 || label[vi] < 0) continue;
      cands.push_back({static_cast<std::size_t>(dist[vi]) + 3, label[vi], fe.w, fe.pos});
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.len != b.len) return a.len < b.len;
      if (a.start_label != b.start_label) return a.start_label < b.start_label;
      return yx_less(a.wm, b.wm);
    });

    for (const Candidate& cand : cands) {
      const FlatEnd& s = starts[static_cast<std::size_t>(cand.start_label)];
      const Vertex w0 = s.w, wM = cand.wm;
      const std::size_t p0 = s.pos, p1 = cand.end_pos;
      const std::size_t q_verts = p1 - p0 + 1;
      if (!(static_cast<double>(cand.len) <= eps * static_cast<double>(q_verts))) continue;
      if (!shield_exists(w0, wM)) continue;

      // Reconstruct P: walk the shortest-path DAG backward from the end,
      // restricted to this start label, smallest (y,x) predecessor first.
      std::vector<Vertex> rev{Vertex{wM.x, wM.y + 1}};
      bool broken = false;
      while (true) {
        Vertex v = rev.back();
        std::size_t vi = box.vertex_index(v);
        if (dist[vi] == 0) {
          if (label[vi] != cand.start_label) broken = true;
          break;
        }
        Vertex next{};
        bool found = false;
        for (int d : edge_order) {
          Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
          if (!above_ok(u)) continue;
          std::size_t ui = box.vertex_index(u);
          if (dist[ui] != dist[vi] - 1 || label[ui] != cand.start_label) continue;
          if (!cfg_.open(dir::edge_from(v, d))) continue;
          if (!found || yx_less(u, next)) {
            next = u;
            found = true;
          }
        }
        if (!found) {
          broken = true;
          break;
        }
        rev.push_back(next);
      }
      if (broken || !(rev.back() == s.up)) continue;
      std::vector<Vertex> pverts{w0};
      for (auto it = rev.rbegin(); it != rev.rend(); ++it) pverts.push_back(*it);
      pverts.push_back(wM);

      ShieldedDetour det;
      det.anchor = e;
      det.detour = path_from_vertices(std::move(pverts));
      std::vector<Vertex> qverts(path.begin() + static_cast<std::ptrdiff_t>(p0),
                                 path.begin() + static_cast<std::ptrdiff_t>(p1) + 1);
      det.detoured = path_from_vertices(std::move(qverts));
      auto shield = build_shield(w0, wM);
      if (!shield) continue;
      det.shield = std::move(*shield);
      if (verify_shielded_detour(cfg_, low_, det, eps).ok) return det;
    }
    return std::nullopt;
  }

 private:
  bool shield_exists(const Vertex& w0, const Vertex& wM) const {
    const Box& box = cfg_.box();
    const FaceId start{w0.x - 1, w0.y}, finish{wM.x, wM.y};
    const FaceId up_s{w0.x - 1, w0.y + 1}, up_f{wM.x, wM.y + 1};
    for (const FaceId& f : {start, finish, up_s, up_f}) {
      if (!box.face_interior(f)) return false;
      if (low_.below_face[box.face_index(f)]) return false;
    }
    const EdgeId first{Orientation::horizontal, {w0.x - 1, w0.y + 1}};
    const EdgeId last{Orientation::horizontal, {wM.x, wM.y + 1}};
    if (!box.contains(first) || !box.contains(last)) return false;
    if (cfg_.open(first) || cfg_.open(last)) return false;
    return face_cluster_[box.face_index(up_s)] >= 0 &&
           face_cluster_[box.face_index(up_s)] == face_cluster_[box.face_index(up_f)];
  }

  // Closed dual path NW(w0) -> up -> ... -> down -> NE(wM). Interior stays
  // clear of the two corner faces so the shield is self-avoiding.
  std::optional<LatticePath> build_shield(const Vertex& w0, const Vertex& wM) const {
    const Box& box = cfg_.box();
    const FaceId start{w0.x - 1, w0.y}, finish{wM.x, wM.y};
    const FaceId from{w0.x - 1, w0.y + 1}, to{wM.x, wM.y + 1};
    std::vector<int> prev(box.face_count(), -2);
    std::deque<FaceId> queue{from};
    prev[box.face_index(from)] = -1;
    auto blocked = [&](const FaceId& f) { return f == start || f == finish; };
    bool reached = (from == to);
    while (!queue.empty() && !reached) {
      FaceId f = queue.front();
      queue.pop_front();
      const FaceId nbrs[4] = {{f.i + 1, f.j}, {f.i - 1, f.j}, {f.i, f.j + 1}, {f.i, f.j - 1}};
      for (const FaceId& g : nbrs) {
        if (!box.face_interior(g) || blocked(g)) continue;
        std::size_t gi = box.face_index(g);
        if (prev[gi] != -2 || low_.below_face[gi]) continue;
        EdgeId shared = edge_between_faces(f, g);
        if (!box.contains(shared) || cfg_.open(shared)) continue;
        prev[gi] = static_cast<int>(box.face_index(f));
        if (g == to) {
          reached = true;
          break;
        }
        queue.push_back(g);
      }
    }
    if (!reached) return std::nullopt;
    std::vector<FaceId> faces{to};
    while (!(faces.back() == from)) {
      int p = prev[box.face_index(faces.back())];
      int side = box.face_grid_side();
      faces.push_back(FaceId{p % side - box.radius() - 1, p / side - box.radius() - 1});
    }
    std::reverse(faces.begin(), faces.end());
    faces.insert(faces.begin(), start);
    faces.push_back(finish);
    LatticePath r;
    r.lattice = LatticeKind::dual;
    for (const FaceId& f : faces) r.vertices.push_back({f.i, f.j});
    for (std::size_t i = 0; i + 1 < faces.size(); ++i)
      r.edges.push_back(edge_between_faces(faces[i], faces[i + 1]));
    return r;
  }

  const BondConfig& cfg_;
  const LowestCrossing& low_;
  std::vector<int> face_cluster_;
  std::vector<uint8_t> flat_pos_;
};

inline std::optional<ShieldedDetour> find_detour(const BondConfig& cfg,
                                                 const LowestCrossing& low, const EdgeId& e,
                                                 double eps, int budget, int margin) {
  return DetourFinder(cfg, low).find(e, eps, budget, margin);
}

struct DetourPlan {
  std::vector<ShieldedDetour> selected;  // the disjoint subcollection
  LatticePath sigma;
  std::size_t detoured_edges{0};  // sum of #E(Q) over the selection
};

// Greedy maximal selection by decreasing detoured length (ties by anchor
// order), skipping candidates whose detoured segment meets one already
// chosen; then splice. Splice failures indicate an unverified detour and
// are reported as errors.
inline DetourPlan build_shortcut(const BondConfig& cfg, const LowestCrossing& low,
                                 const std::vector<ShieldedDetour>& detours) {
  const Box& box = cfg.box();
  struct Item {
    const ShieldedDetour* det;
    std::size_t p0, p1, qlen;
    std::size_t anchor_idx;
  };
  std::vector<Item> items;
  for (const ShieldedDetour& d : detours) {
    if (d.detour.vertices.size() < 2)
      throw std::logic_error("build_shortcut: malformed detour");
    std::size_t p0 = low.path_pos[box.vertex_index(d.detour.vertices.front())];
    std::size_t p1 = low.path_pos[box.vertex_index(d.detour.vertices.back())];
    if (p0 == static_cast<std::size_t>(-1) || p1 == static_cast<std::size_t>(-1) || p0 >= p1)
      throw std::logic_error("build_shortcut: detour endpoints not on the crossing");
    // Equal detours collapse to one.
    bool dup = false;
    for (const Item& it : items)
      if (it.p0 == p0 && it.p1 == p1 && it.det->detour.vertices == d.detour.vertices)
        dup = true;
    if (dup) continue;
    items.push_back({&d, p0, p1, p1 - p0, box.edge_index(d.anchor)});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.qlen != b.qlen) return a.qlen > b.qlen;
    return a.anchor_idx < b.anchor_idx;
  });

  std::vector<Item> chosen;
  for (const Item& it : items) {
    bool overlap = false;
    for (const Item& c : chosen)
      overlap = overlap || !(it.p1 < c.p0 || c.p1 < it.p0);
    if (!overlap) chosen.push_back(it);
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const Item& a, const Item& b) { return a.p0 < b.p0; });

  DetourPlan plan;
  std::vector<Vertex> verts;
  const auto& path = low.path.vertices;
  std::size_t i = 0;
  std::size_t next = 0;
  while (i < path.size()) {
    verts.push_back(path[i]);
    if (next < chosen.size() && chosen[next].p0 == i) {
      const LatticePath& P = chosen[next].det->detour;
      for (std::size_t k = 1; k < P.vertices.size(); ++k) verts.push_back(P.vertices[k]);
      i = chosen[next].p1 + 1;
      ++next;
    } else {
      ++i;
    }
  }
  LatticePath sigma = path_from_vertices(std::move(verts));

  // The spliced crossing must be open, self-avoiding, a horizontal
  // crossing, and no longer than the lowest crossing.
  std::vector<std::size_t> seen;
  for (const Vertex& v : sigma.vertices) seen.push_back(box.vertex_index(v));
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw std::logic_error("build_shortcut: spliced crossing self-intersects");
  for (const EdgeId& e : sigma.edges)
    if (!cfg.open(e)) throw std::logic_error("build_shortcut: spliced crossing not open");
  if (sigma.vertices.front().x != -box.radius() || sigma.vertices.back().x != box.radius())
    throw std::logic_error("build_shortcut: spliced path is not a crossing");
  std::size_t expect = low.path.edge_count();
  for (const Item& c : chosen) {
    expect -= c.qlen;
    expect += c.det->detour.edge_count();
    plan.detoured_edges += c.qlen;
    plan.selected.push_back(*c.det);
  }
  if (sigma.edge_count() != expect || sigma.edge_count() > low.path.edge_count())
    throw std::logic_error("build_shortcut: spliced length inconsistent");
  plan.sigma = std::move(sigma);
  return plan;
}

}  // namespace perc
