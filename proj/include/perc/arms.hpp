#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "perc/estimator.hpp"
#include "perc/geometry.hpp"
#include "perc/lattice.hpp"

// Arm events. Open arms live on the primal lattice, closed-dual arms on the
// dual; the two never collide, so an event reduces to per-color families of
// vertex-disjoint paths plus a cyclic-order constraint. For edge-anchored
// events the cyclic order of a non-crossing family equals the cyclic order
// of its first steps around the edge, which splits into four blocks (two
// endpoints, two dual endpoints); realizability is then a small enumeration
// of block sizes, each checked by a unit-capacity max-flow.

namespace perc {

enum class ArmColor : uint8_t { open, closed };

enum class ArmRegion : uint8_t { full_plane, upper_half_plane };

struct ArmSpec {
  std::vector<ArmColor> colors;  // cyclic order is significant
  ArmRegion region{ArmRegion::full_plane};

  static ArmSpec parse(std::string_view s, ArmRegion region = ArmRegion::full_plane) {
    ArmSpec spec;
    spec.region = region;
    for (char ch : s) {
      if (ch == 'o' || ch == 'O') spec.colors.push_back(ArmColor::open);
      else if (ch == 'c' || ch == 'C') spec.colors.push_back(ArmColor::closed);
      else throw std::invalid_argument("ArmSpec: expected a string over {o,c}");
    }
    if (spec.colors.empty()) throw std::invalid_argument("ArmSpec: empty");
    return spec;
  }

  int count(ArmColor c) const {
    return static_cast<int>(std::count(colors.begin(), colors.end(), c));
  }
  std::string to_string() const {
    std::string s;
    for (ArmColor c : colors) s += (c == ArmColor::open ? 'o' : 'c');
    return s;
  }
};

struct AnnulusQuery {
  int inner{1};
  int outer{1};
  Vertex center{0, 0};
};

namespace detail {

// Unit-capacity max-flow (BFS augmentation). Node splitting is done by the
// callers; flows here never exceed six units.
struct FlowGraph {
  int n{0};
  std::vector<int> head;
  std::vector<int> to, nxt, cap;

  explicit FlowGraph(int nodes) : n(nodes), head(nodes, -1) {}

  void add_arc(int u, int v, int c) {
    to.push_back(v); nxt.push_back(head[u]); cap.push_back(c);
    head[u] = static_cast<int>(to.size()) - 1;
    to.push_back(u); nxt.push_back(head[v]); cap.push_back(0);
    head[v] = static_cast<int>(to.size()) - 1;
  }

  int max_flow(int s, int t, int limit) {
    int flow = 0;
    std::vector<int> prev_arc(n);
    while (flow < limit) {
      std::fill(prev_arc.begin(), prev_arc.end(), -1);
      std::deque<int> queue{s};
      prev_arc[s] = -2;
      bool reached = false;
      while (!queue.empty() && !reached) {
        int u = queue.front();
        queue.pop_front();
        for (int a = head[u]; a >= 0; a = nxt[a]) {
          if (cap[a] <= 0 || prev_arc[to[a]] != -1) continue;
          prev_arc[to[a]] = a;
          if (to[a] == t) { reached = true; break; }
          queue.push_back(to[a]);
        }
      }
      if (!reached) break;
      for (int v = t; v != s;) {
        int a = prev_arc[v];
        --cap[a];
        ++cap[a ^ 1];
        v = to[a ^ 1];
      }
      ++flow;
    }
    return flow;
  }
};

// Does the cyclic word w equal the cyclic block word o^ba c^bf o^bb c^bg?
inline bool cyclic_block_match(const std::vector<ArmColor>& w, int ba, int bf, int bb,
                               int bg) {
  if (ba + bf + bb + bg != static_cast<int>(w.size())) return false;
  std::vector<ArmColor> blocks;
  blocks.reserve(w.size());
  for (int i = 0; i < ba; ++i) blocks.push_back(ArmColor::open);
  for (int i = 0; i < bf; ++i) blocks.push_back(ArmColor::closed);
  for (int i = 0; i < bb; ++i) blocks.push_back(ArmColor::open);
  for (int i = 0; i < bg; ++i) blocks.push_back(ArmColor::closed);
  const std::size_t j = w.size();
  for (std::size_t r = 0; r < j; ++r) {
    bool ok = true;
    for (std::size_t i = 0; i < j && ok; ++i) ok = (w[(i + r) % j] == blocks[i]);
    if (ok) return true;
  }
  return false;
}

// Feasibility of `need_a` + `need_b` vertex-disjoint open paths from the two
// primal sources to the ring at distance m, inside B_m(center) and the
// region constraint. Sources are never routed through; ring vertices absorb.
template <typename Cfg>
bool open_arms_flow(const Cfg& cfg, Vertex center, int m, Vertex a, Vertex b, int need_a,
                    int need_b, const EdgeId* skip, int min_y) {
  if (need_a + need_b == 0) return true;
  const Box& box = cfg.box();
  const int side = 2 * m + 1;
  auto local = [&](const Vertex& v) {
    return (v.y - center.y + m) * side + (v.x - center.x + m);
  };
  auto inside = [&](const Vertex& v) {
    return std::abs(v.x - center.x) <= m && std::abs(v.y - center.y) <= m &&
           box.contains(v) && v.y >= min_y;
  };
  auto ring = [&](const Vertex& v) {
    return std::max(std::abs(v.x - center.x), std::abs(v.y - center.y)) == m;
  };
  const int nodes = 2 * side * side + 2;
  const int s = 2 * side * side, t = s + 1;
  FlowGraph g(nodes);
  auto vin = [&](const Vertex& v) { return 2 * local(v); };
  auto vout = [&](const Vertex& v) { return 2 * local(v) + 1; };

  const bool a_ok = inside(a), b_ok = inside(b);
  if ((need_a > 0 && !a_ok) || (need_b > 0 && !b_ok)) return false;
  const bool same_source = (a == b);
  for (int y = std::max(center.y - m, -box.radius()); y <= std::min(center.y + m, box.radius()); ++y)
    for (int x = std::max(center.x - m, -box.radius()); x <= std::min(center.x + m, box.radius()); ++x) {
      Vertex v{x, y};
      if (!inside(v)) continue;
      const bool src = (v == a) || (v == b);
      int capv = 1;
      if (src) capv = same_source ? need_a + need_b : (v == a ? need_a : need_b);
      g.add_arc(vin(v), vout(v), capv);
      if (ring(v)) g.add_arc(vout(v), t, capv);
      if (ring(v) && !src) continue;  // non-source ring vertices absorb
      for (int d = 0; d < 4; ++d) {
        Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
        if (!inside(u)) continue;
        if (u == a || u == b) continue;  // sources are not routed through
        EdgeId e = dir::edge_from(v, d);
        if (skip && e == *skip) continue;
        if (!cfg.open(e)) continue;
        g.add_arc(vout(v), vin(u), 1);
      }
    }
  if (same_source) {
    g.add_arc(s, vin(a), need_a + need_b);
  } else {
    if (need_a > 0) g.add_arc(s, vin(a), need_a);
    if (need_b > 0) g.add_arc(s, vin(b), need_b);
  }
  return g.max_flow(s, t, need_a + need_b) == need_a + need_b;
}

// Closed-dual counterpart on faces; the ring is the set of faces at index
// distance m from the anchor's upper face row, matching partial B_m^*.
template <typename Cfg>
bool closed_arms_flow(const Cfg& cfg, Vertex center, int m, FaceId fa, FaceId fb,
                      int need_a, int need_b, const EdgeId* skip, int min_y) {
  if (need_a + need_b == 0) return true;
  const Box& box = cfg.box();
  const int side = 2 * m + 1;
  auto local = [&](const FaceId& f) {
    return (f.j - center.y + m) * side + (f.i - center.x + m);
  };
  auto inside = [&](const FaceId& f) {
    return std::abs(f.i - center.x) <= m && std::abs(f.j - center.y) <= m &&
           box.face_in_grid(f) && f.j >= min_y;
  };
  auto ring = [&](const FaceId& f) {
    return std::max(std::abs(f.i - center.x), std::abs(f.j - center.y)) == m;
  };
  const int nodes = 2 * side * side + 2;
  const int s = 2 * side * side, t = s + 1;
  FlowGraph g(nodes);
  auto fin = [&](const FaceId& f) { return 2 * local(f); };
  auto fout = [&](const FaceId& f) { return 2 * local(f) + 1; };

  const bool a_ok = inside(fa), b_ok = inside(fb);
  if ((need_a > 0 && !a_ok) || (need_b > 0 && !b_ok)) return false;
  const bool same_source = (fa == fb);
  for (int j = center.y - m; j <= center.y + m; ++j)
    for (int i = center.x - m; i <= center.x + m; ++i) {
      FaceId f{i, j};
      if (!inside(f)) continue;
      const bool src = (f == fa) || (f == fb);
      int capf = 1;
      if (src) capf = same_source ? need_a + need_b : (f == fa ? need_a : need_b);
      g.add_arc(fin(f), fout(f), capf);
      if (ring(f)) g.add_arc(fout(f), t, capf);
      if (ring(f) && !src) continue;
      const FaceId nbrs[4] = {{f.i + 1, f.j}, {f.i - 1, f.j}, {f.i, f.j + 1}, {f.i, f.j - 1}};
      for (const FaceId& u : nbrs) {
        if (!inside(u)) continue;
        if (u == fa || u == fb) continue;
        EdgeId e = edge_between_faces(f, u);
        if (!box.contains(e)) continue;
        if (skip && e == *skip) continue;
        if (cfg.open(e)) continue;
        g.add_arc(fout(f), fin(u), 1);
      }
    }
  if (same_source) {
    g.add_arc(s, fin(fa), need_a + need_b);
  } else {
    if (need_a > 0) g.add_arc(s, fin(fa), need_a);
    if (need_b > 0) g.add_arc(s, fin(fb), need_b);
  }
  return g.max_flow(s, t, need_a + need_b) == need_a + need_b;
}

}  // namespace detail

// Arm event anchored at an edge: open arms from its endpoints, closed dual
// arms from its dual's endpoints, to the boundary of B_m around the edge's
// base, realizable in the cyclic order of the spec, disjoint within each
// color class away from the anchor.
template <typename Cfg>
bool edge_arm_event(const Cfg& cfg, const EdgeId& e, int m, const ArmSpec& spec) {
  const Box& box = cfg.box();
  if (m < 1) throw std::invalid_argument("edge_arm_event: radius must be >= 1");
  if (!box.contains(e)) throw std::out_of_range("edge_arm_event: edge outside box");
  const Vertex center = e.base;
  if (std::abs(center.x) + m > box.radius() || std::abs(center.y) + m > box.radius())
    throw std::invalid_argument("edge_arm_event: B_m(e) exceeds box");

  const Vertex a = e.base;
  const Vertex b = edge_other_end(e);
  const FaceId fb = face_below(e), fa_up = face_above(e);
  const int n_o = spec.count(ArmColor::open);
  const int n_c = spec.count(ArmColor::closed);
  const int min_y = spec.region == ArmRegion::upper_half_plane
                        ? e.base.y
                        : std::numeric_limits<int>::min();

  int open_memo[4][4], closed_memo[4][4];
  for (auto& row : open_memo) std::fill(row, row + 4, -1);
  for (auto& row : closed_memo) std::fill(row, row + 4, -1);
  auto open_ok = [&](int na, int nb) {
    int& memo = open_memo[na][nb];
    if (memo < 0)
      memo = detail::open_arms_flow(cfg, center, m, a, b, na, nb, &e, min_y) ? 1 : 0;
    return memo == 1;
  };
  auto closed_ok = [&](int nf, int ng) {
    int& memo = closed_memo[nf][ng];
    if (memo < 0)
      memo = detail::closed_arms_flow(cfg, center, m, fb, fa_up, nf, ng, &e, min_y) ? 1 : 0;
    return memo == 1;
  };

  // Counterclockwise block order around the edge: base endpoint, below/west
  // face, other endpoint, above/east face.
  for (int ba = 0; ba <= std::min(3, n_o); ++ba) {
    int bb = n_o - ba;
    if (bb > 3) continue;
    for (int bf = 0; bf <= std::min(3, n_c); ++bf) {
      int bg = n_c - bf;
      if (bg > 3) continue;
      if (!detail::cyclic_block_match(spec.colors, ba, bf, bb, bg)) continue;
      if (open_ok(ba, bb) && closed_ok(bf, bg)) return true;
    }
  }
  return false;
}

// Arm event anchored at a vertex: open arms only (the one-arm event of the
// origin and its multi-arm variants). Mixed or closed colors anchor at an
// edge instead.
template <typename Cfg>
bool vertex_arm_event(const Cfg& cfg, const Vertex& v, int m, const ArmSpec& spec) {
  if (m < 1) throw std::invalid_argument("vertex_arm_event: radius must be >= 1");
  const Box& box = cfg.box();
  if (std::abs(v.x) + m > box.radius() || std::abs(v.y) + m > box.radius())
    throw std::invalid_argument("vertex_arm_event: B_m(v) exceeds box");
  if (spec.count(ArmColor::closed) != 0)
    throw std::invalid_argument("vertex_arm_event: open-only specs supported");
  const int min_y = spec.region == ArmRegion::upper_half_plane
                        ? v.y
                        : std::numeric_limits<int>::min();
  return detail::open_arms_flow(cfg, v, m, v, v, spec.count(ArmColor::open), 0, nullptr,
                                min_y);
}

// Arms crossing the annulus B_outer(center) \ B_inner(center), disjoint per
// color, cyclic order respected. Exact for single-color words and for words
// with exactly one arm of the minority color: a lone minority arm sits in
// one of the gaps left by the majority family, and every cyclic placement
// of a single arm is the same cyclic word. Words needing two or more arms
// of each color interleaved are rejected.
template <typename Cfg>
bool annulus_arm_event(const Cfg& cfg, const AnnulusQuery& q, const ArmSpec& spec) {
  const Box& box = cfg.box();
  if (q.inner < 1 || q.inner > q.outer)
    throw std::invalid_argument("annulus_arm_event: need 1 <= inner <= outer");
  if (std::max(std::abs(q.center.x), std::abs(q.center.y)) + q.outer > box.radius())
    throw std::invalid_argument("annulus_arm_event: annulus exceeds box");
  const int n_o = spec.count(ArmColor::open);
  const int n_c = spec.count(ArmColor::closed);
  if (n_o > 0 && n_c > 0 && std::min(n_o, n_c) > 1)
    throw std::invalid_argument(
        "annulus_arm_event: interleaved multi-arm colors are not supported for annuli");
  const int min_y = spec.region == ArmRegion::upper_half_plane
                        ? q.center.y
                        : std::numeric_limits<int>::min();

  auto open_crossings = [&](int need) {
    if (need == 0) return true;
    const int m = q.inner, n = q.outer;
    const Box& bx = cfg.box();
    const int side = 2 * n + 1;
    auto local = [&](const Vertex& v) {
      return (v.y - q.center.y + n) * side + (v.x - q.center.x + n);
    };
    auto distc = [&](const Vertex& v) {
      return std::max(std::abs(v.x - q.center.x), std::abs(v.y - q.center.y));
    };
    auto inside = [&](const Vertex& v) {
      int d = distc(v);
      return d >= m && d <= n && bx.contains(v) && v.y >= min_y;
    };
    const int nodes = 2 * side * side + 2;
    const int s = 2 * side * side, t = s + 1;
    detail::FlowGraph g(nodes);
    for (int y = q.center.y - n; y <= q.center.y + n; ++y)
      for (int x = q.center.x - n; x <= q.center.x + n; ++x) {
        Vertex v{x, y};
        if (!inside(v)) continue;
        g.add_arc(2 * local(v), 2 * local(v) + 1, 1);
        if (distc(v) == m) g.add_arc(s, 2 * local(v), 1);
        if (distc(v) == n) {
          g.add_arc(2 * local(v) + 1, t, 1);
          continue;
        }
        for (int d = 0; d < 4; ++d) {
          Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
          if (!inside(u) || distc(u) == m) continue;  // inner ring is source-only
          if (!cfg.open(dir::edge_from(v, d))) continue;
          g.add_arc(2 * local(v) + 1, 2 * local(u), 1);
        }
      }
    return g.max_flow(s, t, need) == need;
  };

  auto closed_crossings = [&](int need) {
    if (need == 0) return true;
    const int m = q.inner, n = q.outer;
    const Box& bx = cfg.box();
    const int side = 2 * n + 1;
    auto local = [&](const FaceId& f) {
      return (f.j - q.center.y + n) * side + (f.i - q.center.x + n);
    };
    auto distc = [&](const FaceId& f) {
      return std::max(std::abs(f.i - q.center.x), std::abs(f.j - q.center.y));
    };
    auto inside = [&](const FaceId& f) {
      int d = distc(f);
      return d >= m && d <= n && bx.face_in_grid(f) && f.j >= min_y;
    };
    const int nodes = 2 * side * side + 2;
    const int s = 2 * side * side, t = s + 1;
    detail::FlowGraph g(nodes);
    for (int j = q.center.y - n; j <= q.center.y + n; ++j)
      for (int i = q.center.x - n; i <= q.center.x + n; ++i) {
        FaceId f{i, j};
        if (!inside(f)) continue;
        g.add_arc(2 * local(f), 2 * local(f) + 1, 1);
        if (distc(f) == m) g.add_arc(s, 2 * local(f), 1);
        if (distc(f) == n) {
          g.add_arc(2 * local(f) + 1, t, 1);
          continue;
        }
        const FaceId nbrs[4] = {{f.i + 1, f.j}, {f.i - 1, f.j}, {f.i, f.j + 1},
                                {f.i, f.j - 1}};
        for (const FaceId& u : nbrs) {
          if (!inside(u) || distc(u) == m) continue;
          EdgeId e = edge_between_faces(f, u);
          if (!bx.contains(e) || cfg.open(e)) continue;
          g.add_arc(2 * local(f) + 1, 2 * local(u), 1);
        }
      }
    return g.max_flow(s, t, need) == need;
  };

  return open_crossings(n_o) && closed_crossings(n_c);
}

// Unconditional Monte Carlo estimate of an arm probability. inner = 0
// anchors the event at the origin (single-color specs) or at the edge
// {0, e1} (mixed specs); inner >= 1 asks for annulus crossings. Events are
// monotone in the outer radius, so each trial is screened at doubling radii
// before the full check; lazy views keep rejected trials cheap.
inline EstimatorResult estimate_pi(const ArmSpec& spec, int inner, int outer,
                                   uint64_t trials, uint64_t seed, int threads = 1,
                                   uint64_t stream_offset = 0) {
  if (outer < 1) throw std::invalid_argument("estimate_pi: outer radius must be >= 1");
  if (inner < 0 || inner > outer) throw std::invalid_argument("estimate_pi: bad annulus");
  const int box_n = outer;
  const EdgeId e0{Orientation::horizontal, {0, 0}};
  const bool vertex_anchor = inner == 0 && spec.count(ArmColor::closed) == 0;

  std::vector<int> stages;
  if (inner == 0) {
    for (int r = 2; r < outer; r *= 2) stages.push_back(r);
  } else {
    for (int r = 2 * inner; r < outer; r *= 2) stages.push_back(r);
  }
  stages.push_back(outer);

  auto per_trial = [&](uint64_t t) -> uint8_t {
    LazyBondView view(box_n, 0.5, seed, stream_offset + t);
    for (int r : stages) {
      bool ok;
      if (inner == 0)
        ok = vertex_anchor ? vertex_arm_event(view, Vertex{0, 0}, r, spec)
                           : edge_arm_event(view, e0, r, spec);
      else
        ok = annulus_arm_event(view, AnnulusQuery{inner, r, {0, 0}}, spec);
      if (!ok) return 0;
    }
    return 1;
  };
  auto hits_per_trial = run_trials<uint8_t>(trials, threads, per_trial);
  EstimatorResult res;
  res.trials = trials;
  res.accepted = trials;
  res.seed = seed;
  for (uint8_t h : hits_per_trial) res.hits += h;
  res.phat = trials ? static_cast<double>(res.hits) / static_cast<double>(trials) : 0.0;
  res.stderr_ = binomial_stderr(res.phat, trials);
  return res;
}

}  // namespace perc
