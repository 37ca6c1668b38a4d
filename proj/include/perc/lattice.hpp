#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

// Bond configurations on the box B_n = [-n,n]^2 of the square lattice,
// their planar dual, and the keyed counter RNG used to sample them.

namespace perc {

struct Vertex {
  int x{};
  int y{};
  friend bool operator==(const Vertex&, const Vertex&) = default;
};

// (y,x) order; used everywhere a deterministic vertex order is needed.
inline bool yx_less(const Vertex& a, const Vertex& b) {
  if (a.y != b.y) return a.y < b.y;
  return a.x < b.x;
}

enum class Orientation : uint8_t { horizontal, vertical };

// An edge is named by its lower-left endpoint: a horizontal edge joins
// base to base+e1, a vertical edge joins base to base+e2.
struct EdgeId {
  Orientation orient{Orientation::horizontal};
  Vertex base{};
  friend bool operator==(const EdgeId&, const EdgeId&) = default;
};

inline Vertex edge_other_end(const EdgeId& e) {
  return e.orient == Orientation::horizontal ? Vertex{e.base.x + 1, e.base.y}
                                             : Vertex{e.base.x, e.base.y + 1};
}

// A dual vertex is the center of the unit face [i,i+1]x[j,j+1]; we store
// the integer pair (i,j) and leave the +(1/2,1/2) offset implicit.
struct FaceId {
  int i{};
  int j{};
  friend bool operator==(const FaceId&, const FaceId&) = default;
};

// The two faces separated by an edge; a dual edge joining them crosses it.
inline FaceId face_below(const EdgeId& e) {  // below / west
  return e.orient == Orientation::horizontal ? FaceId{e.base.x, e.base.y - 1}
                                             : FaceId{e.base.x - 1, e.base.y};
}
inline FaceId face_above(const EdgeId& e) {  // above / east
  return FaceId{e.base.x, e.base.y};
}

// The primal edge crossed by the dual edge between two adjacent faces.
inline EdgeId edge_between_faces(const FaceId& a, const FaceId& b) {
  if (a.i == b.i && b.j == a.j + 1) return {Orientation::horizontal, {a.i, a.j + 1}};
  if (a.i == b.i && b.j == a.j - 1) return {Orientation::horizontal, {a.i, a.j}};
  if (a.j == b.j && b.i == a.i + 1) return {Orientation::vertical, {a.i + 1, a.j}};
  if (a.j == b.j && b.i == a.i - 1) return {Orientation::vertical, {a.i, a.j}};
  throw std::invalid_argument("edge_between_faces: faces not adjacent");
}

// Index layout over B_n: horizontal edges first (row-major, y then x),
// then vertical. The index order coincides with the (orientation, y, x)
// total order on EdgeId, and defines the bit layout of the config file
// format.
class Box {
 public:
  explicit Box(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("Box: n must be >= 1");
  }

  int radius() const { return n_; }
  int side() const { return 2 * n_ + 1; }

  std::size_t h_count() const { return static_cast<std::size_t>(side()) * (2 * n_); }
  std::size_t edge_count() const { return 2 * h_count(); }
  std::size_t vertex_count() const { return static_cast<std::size_t>(side()) * side(); }

  bool contains(const Vertex& v) const {
    return v.x >= -n_ && v.x <= n_ && v.y >= -n_ && v.y <= n_;
  }
  bool contains(const EdgeId& e) const {
    return contains(e.base) && contains(edge_other_end(e));
  }

  std::size_t vertex_index(const Vertex& v) const {
    return static_cast<std::size_t>(v.y + n_) * side() + (v.x + n_);
  }

  std::size_t edge_index(const EdgeId& e) const {
    if (!contains(e)) throw std::out_of_range("edge_index: edge outside box");
    if (e.orient == Orientation::horizontal)
      return static_cast<std::size_t>(e.base.y + n_) * (2 * n_) + (e.base.x + n_);
    return h_count() + static_cast<std::size_t>(e.base.y + n_) * side() + (e.base.x + n_);
  }

  EdgeId edge_at(std::size_t idx) const {
    if (idx >= edge_count()) throw std::out_of_range("edge_at: bad index");
    if (idx < h_count()) {
      int y = static_cast<int>(idx / (2 * n_)) - n_;
      int x = static_cast<int>(idx % (2 * n_)) - n_;
      return {Orientation::horizontal, {x, y}};
    }
    std::size_t k = idx - h_count();
    int y = static_cast<int>(k / side()) - n_;
    int x = static_cast<int>(k % side()) - n_;
    return {Orientation::vertical, {x, y}};
  }

  // Face grid padded with one ring outside the in-box faces [-n, n-1]^2,
  // so escape through a box wall is representable.
  int face_grid_side() const { return 2 * n_ + 2; }
  std::size_t face_count() const {
    return static_cast<std::size_t>(face_grid_side()) * face_grid_side();
  }
  bool face_in_grid(const FaceId& f) const {
    return f.i >= -n_ - 1 && f.i <= n_ && f.j >= -n_ - 1 && f.j <= n_;
  }
  bool face_interior(const FaceId& f) const {
    return f.i >= -n_ && f.i <= n_ - 1 && f.j >= -n_ && f.j <= n_ - 1;
  }
  std::size_t face_index(const FaceId& f) const {
    return static_cast<std::size_t>(f.j + n_ + 1) * face_grid_side() + (f.i + n_ + 1);
  }

  friend bool operator==(const Box&, const Box&) = default;

 private:
  int n_;
};

namespace detail {

// Philox4x32-10 (Salmon et al.), keyed on (seed, stream, counter). Used as a
// stateless per-edge generator: trial i is reproducible without generating
// trials 0..i-1, and edge states never depend on evaluation order.
inline uint64_t philox(uint64_t seed, uint64_t stream, uint64_t counter) {
  uint32_t c0 = static_cast<uint32_t>(counter);
  uint32_t c1 = static_cast<uint32_t>(counter >> 32);
  uint32_t c2 = static_cast<uint32_t>(stream);
  uint32_t c3 = static_cast<uint32_t>(stream >> 32);
  uint32_t k0 = static_cast<uint32_t>(seed);
  uint32_t k1 = static_cast<uint32_t>(seed >> 32);
  for (int round = 0; round < 10; ++round) {
    uint64_t p0 = 0xD2511F53ull * c0;
    uint64_t p1 = 0xCD9E8D57ull * c2;
    uint32_t n0 = static_cast<uint32_t>(p1 >> 32) ^ c1 ^ k0;
    uint32_t n1 = static_cast<uint32_t>(p1);
    uint32_t n2 = static_cast<uint32_t>(p0 >> 32) ^ c3 ^ k1;
    uint32_t n3 = static_cast<uint32_t>(p0);
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += 0x9E3779B9u;
    k1 += 0xBB67AE85u;
  }
  return (static_cast<uint64_t>(c0) << 32) | c1;
}

// Open threshold on 64-bit outputs; exact at p = 0, 1/2, 1.
inline uint64_t open_threshold(double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return std::numeric_limits<uint64_t>::max();
  return static_cast<uint64_t>(std::ldexp(p, 64));
}

inline bool keyed_edge_open(uint64_t seed, uint64_t stream, std::size_t edge_idx, double p) {
  if (p >= 1.0) return true;
  return philox(seed, stream, edge_idx) < open_threshold(p);
}

}  // namespace detail

// Immutable open/closed state of every edge of B_n. The dual state of e* is
// tied to the primal state: e* is closed-dual exactly when e is closed.
class BondConfig {
 public:
  BondConfig(Box box, double p, uint64_t seed, uint64_t stream)
      : box_(box),
        p_(p),
        seed_(seed),
        stream_(stream),
        words_((box.edge_count() + 63) / 64, 0) {}

  const Box& box() const { return box_; }
  int radius() const { return box_.radius(); }
  double p() const { return p_; }
  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

  bool open(std::size_t edge_idx) const {
    return (words_[edge_idx >> 6] >> (edge_idx & 63)) & 1;
  }
  bool open(const EdgeId& e) const { return open(box_.edge_index(e)); }
  bool closed(const EdgeId& e) const { return !open(e); }

  // omega*(e*) = omega(e): the dual edge crossing e is open-dual iff e is open.
  bool open_dual(const EdgeId& e) const { return open(e); }
  bool closed_dual(const EdgeId& e) const { return !open(e); }

  std::span<const uint64_t> words() const { return words_; }

  BondConfig with_edge(const EdgeId& e, bool open_state) const {
    BondConfig c = *this;
    c.set(box_.edge_index(e), open_state);
    return c;
  }

  static BondConfig from_words(Box box, std::vector<uint64_t> words, double p,
                               uint64_t seed, uint64_t stream) {
    BondConfig c(box, p, seed, stream);
    if (words.size() != c.words_.size())
      throw std::invalid_argument("from_words: word count mismatch");
    c.words_ = std::move(words);
    c.mask_tail();
    return c;
  }

  friend bool operator==(const BondConfig& a, const BondConfig& b) {
    return a.box_ == b.box_ && a.words_ == b.words_;
  }

 private:
  void set(std::size_t idx, bool v) {
    if (v)
      words_[idx >> 6] |= uint64_t{1} << (idx & 63);
    else
      words_[idx >> 6] &= ~(uint64_t{1} << (idx & 63));
  }
  void mask_tail() {
    std::size_t used = box_.edge_count() & 63;
    if (used) words_.back() &= (uint64_t{1} << used) - 1;
  }

  friend BondConfig sample_config(int, double, uint64_t, uint64_t);
  template <typename F>
  friend void enumerate_configs(int, F&&);
  template <typename F>
  friend void enumerate_subset_configs(int, std::span<const EdgeId>, F&&);

  Box box_;
  double p_;
  uint64_t seed_;
  uint64_t stream_;
  std::vector<uint64_t> words_;
};

// Each edge independently open with probability p; a pure function of
// (n, p, seed, stream) regardless of thread schedule.
inline BondConfig sample_config(int n, double p, uint64_t seed, uint64_t stream) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("sample_config: p outside [0,1]");
  BondConfig c(Box(n), p, seed, stream);
  const std::size_t m = c.box_.edge_count();
  for (std::size_t i = 0; i < m; ++i)
    if (detail::keyed_edge_open(seed, stream, i, p)) c.set(i, true);
  return c;
}

// Same keyed generator, but edge states are materialized on first access.
// Cheap when a detector only inspects a small neighborhood of a large box.
// Not shareable across threads; use one view per trial.
class LazyBondView {
 public:
  LazyBondView(int n, double p, uint64_t seed, uint64_t stream)
      : box_(n), p_(p), seed_(seed), stream_(stream), state_(box_.edge_count(), 0) {}

  const Box& box() const { return box_; }

  bool open(std::size_t idx) const {
    uint8_t s = state_[idx];
    if (s == 0) {
      s = detail::keyed_edge_open(seed_, stream_, idx, p_) ? 1 : 2;
      state_[idx] = s;
    }
    return s == 1;
  }
  bool open(const EdgeId& e) const { return open(box_.edge_index(e)); }
  bool closed(const EdgeId& e) const { return !open(e); }

  BondConfig materialize() const { return sample_config(box_.radius(), p_, seed_, stream_); }

 private:
  Box box_;
  double p_;
  uint64_t seed_;
  uint64_t stream_;
  mutable std::vector<uint8_t> state_;
};

// Exhaustive oracle input: all 2^12 configurations of B_1, in increasing
// order of the bitmask under the edge index order.
template <typename F>
void enumerate_configs(int n, F&& f) {
  if (n != 1)
    throw std::invalid_argument("enumerate_configs: only n=1 (12 edges) is enumerable");
  Box box(n);
  for (uint64_t mask = 0; mask < (uint64_t{1} << box.edge_count()); ++mask) {
    BondConfig c(box, -1.0, 0, mask);
    c.words_[0] = mask;
    f(c);
  }
}

// All 2^k states of a chosen edge subset (k <= 24); edges outside the
// subset stay closed.
template <typename F>
void enumerate_subset_configs(int n, std::span<const EdgeId> subset, F&& f) {
  if (subset.size() > 24)
    throw std::invalid_argument("enumerate_subset_configs: subset larger than 24 edges");
  Box box(n);
  std::vector<std::size_t> idx;
  idx.reserve(subset.size());
  for (const EdgeId& e : subset) idx.push_back(box.edge_index(e));
  for (uint64_t mask = 0; mask < (uint64_t{1} << subset.size()); ++mask) {
    BondConfig c(box, -1.0, 0, mask);
    for (std::size_t b = 0; b < idx.size(); ++b)
      if (mask >> b & 1) c.set(idx[b], true);
    f(c);
  }
}

}  // namespace perc
