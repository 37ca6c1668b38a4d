#include <catch2/catch_amalgamated.hpp>

#include "perc/arms.hpp"
#include "perc/lattice.hpp"
#include "perc/oracle.hpp"

using namespace perc;

namespace {
const EdgeId e0{Orientation::horizontal, {0, 0}};
BondConfig all_open(int n) { return sample_config(n, 1.0, 0, 0); }
}  // namespace

TEST_CASE("all-open box: two open arms exist, any closed arm fails") {
  auto cfg = all_open(4);
  REQUIRE(edge_arm_event(cfg, e0, 2, ArmSpec::parse("oo")));
  REQUIRE(edge_arm_event(cfg, e0, 4, ArmSpec::parse("oo")));
  REQUIRE(!edge_arm_event(cfg, e0, 2, ArmSpec::parse("ooc")));
  REQUIRE(edge_arm_event(cfg, e0, 2, ArmSpec::parse("oooo")));
  REQUIRE(!edge_arm_event(cfg, e0, 2, ArmSpec::parse("ococ")));
}

TEST_CASE("annulus events on the all-open box") {
  auto cfg = all_open(6);
  REQUIRE(annulus_arm_event(cfg, {1, 3, {0, 0}}, ArmSpec::parse("o")));
  REQUIRE(annulus_arm_event(cfg, {2, 6, {0, 0}}, ArmSpec::parse("oo")));
  REQUIRE(!annulus_arm_event(cfg, {1, 3, {0, 0}}, ArmSpec::parse("c")));
  REQUIRE(!annulus_arm_event(cfg, {1, 3, {0, 0}}, ArmSpec::parse("ooc")));
  REQUIRE_THROWS_AS(annulus_arm_event(cfg, {0, 3, {0, 0}}, ArmSpec::parse("o")),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(annulus_arm_event(cfg, {1, 3, {0, 0}}, ArmSpec::parse("ococ")),
                    std::invalid_argument);
}

TEST_CASE("edge detector matches the packing oracle on random configurations") {
  const char* specs[3] = {"ooc", "ococ", "oooo"};
  for (uint64_t t = 0; t < 60; ++t) {
    auto cfg = sample_config(4, 0.5, 333, t);
    for (const char* s : specs) {
      ArmSpec spec = ArmSpec::parse(s);
      for (int m : {2, 3}) {
        bool fast = edge_arm_event(cfg, e0, m, spec);
        bool slow = oracle::packing_edge_arm_event(cfg, e0, m, spec);
        INFO("spec " << s << " m " << m << " trial " << t);
        REQUIRE(fast == slow);
      }
    }
  }
}

TEST_CASE("five-arm detector matches the packing oracle") {
  for (uint64_t t = 0; t < 40; ++t) {
    auto cfg = sample_config(3, 0.5, 757, t);
    bool fast = edge_arm_event(cfg, e0, 2, ArmSpec::parse("ococo"));
    bool slow = oracle::packing_edge_arm_event(cfg, e0, 2, ArmSpec::parse("ococo"));
    INFO("trial " << t);
    REQUIRE(fast == slow);
  }
}

TEST_CASE("half-plane restriction only removes events") {
  int diff = 0;
  for (uint64_t t = 0; t < 50; ++t) {
    auto cfg = sample_config(3, 0.5, 808, t);
    bool full = edge_arm_event(cfg, e0, 3, ArmSpec::parse("ooc"));
    bool half = edge_arm_event(cfg, e0, 3, ArmSpec::parse("ooc", ArmRegion::upper_half_plane));
    if (half) REQUIRE(full);
    if (full != half) ++diff;
    bool slow = oracle::packing_edge_arm_event(
        cfg, e0, 3, ArmSpec::parse("ooc", ArmRegion::upper_half_plane));
    REQUIRE(half == slow);
  }
  REQUIRE(diff > 0);
}

TEST_CASE("arm events are monotone in the radius") {
  for (uint64_t t = 0; t < 50; ++t) {
    auto cfg = sample_config(4, 0.5, 616, t);
    for (const char* s : {"ooc", "ococ"}) {
      ArmSpec spec = ArmSpec::parse(s);
      bool outer = edge_arm_event(cfg, e0, 4, spec);
      bool inner = edge_arm_event(cfg, e0, 2, spec);
      if (outer) REQUIRE(inner);
    }
  }
}

TEST_CASE("color monotonicity: opening edges preserves all-open events") {
  for (uint64_t t = 0; t < 30; ++t) {
    auto cfg = sample_config(3, 0.5, 272, t);
    bool before = edge_arm_event(cfg, e0, 3, ArmSpec::parse("oo"));
    auto mod = cfg;
    for (std::size_t i = 0; i < cfg.box().edge_count(); i += 5)
      mod = mod.with_edge(cfg.box().edge_at(i), true);
    if (before) REQUIRE(edge_arm_event(mod, e0, 3, ArmSpec::parse("oo")));
    bool closed_before = edge_arm_event(cfg, e0, 3, ArmSpec::parse("cc"));
    auto mod2 = cfg;
    for (std::size_t i = 0; i < cfg.box().edge_count(); i += 5)
      mod2 = mod2.with_edge(cfg.box().edge_at(i), false);
    if (closed_before) REQUIRE(edge_arm_event(mod2, e0, 3, ArmSpec::parse("cc")));
  }
}

TEST_CASE("estimate_pi is deterministic and matches the n=1 one-arm probability") {
  auto a = estimate_pi(ArmSpec::parse("o"), 0, 1, 50000, 42, 1);
  auto b = estimate_pi(ArmSpec::parse("o"), 0, 1, 50000, 42, 2);
  REQUIRE(a.hits == b.hits);
  REQUIRE(a.phat == b.phat);
  // P(origin reaches dB_1) = 1 - 2^{-4}
  REQUIRE(std::abs(a.phat - 15.0 / 16.0) <= 3 * a.stderr_ + 1e-9);
}

TEST_CASE("pi4' <= pi4 and pi4 >= pi5 at a small scale") {
  const uint64_t trials = 60000;
  auto pi4 = estimate_pi(ArmSpec::parse("ococ"), 0, 8, trials, 7, 1);
  auto pi4mono = estimate_pi(ArmSpec::parse("oooo"), 0, 8, trials, 7, 1, trials);
  auto pi5 = estimate_pi(ArmSpec::parse("ococo"), 0, 8, trials, 7, 1, 2 * trials);
  REQUIRE(pi4mono.phat <= pi4.phat + 2 * (pi4.stderr_ + pi4mono.stderr_));
  REQUIRE(pi4.phat + 2 * (pi4.stderr_ + pi5.stderr_) >= pi5.phat);
}

TEST_CASE("quasimultiplicativity sanity band for the three-arm probability") {
  const uint64_t trials = 40000;
  int both = 0;
  for (auto [m, n] : {std::pair{4, 16}, std::pair{8, 32}}) {
    uint64_t off = static_cast<uint64_t>(3 * both) * trials;
    auto whole = estimate_pi(ArmSpec::parse("ooc"), 0, n, trials, 3, 1, off);
    auto inner = estimate_pi(ArmSpec::parse("ooc"), 0, m, trials, 3, 1, off + trials);
    auto annulus = estimate_pi(ArmSpec::parse("ooc"), m, n, trials, 3, 1, off + 2 * trials);
    REQUIRE(whole.phat > 0);
    double ratio = inner.phat * annulus.phat / whole.phat;
    INFO("m=" << m << " n=" << n << " ratio=" << ratio);
    REQUIRE(ratio > 0.1);
    REQUIRE(ratio < 10.0);
    ++both;
  }
}
