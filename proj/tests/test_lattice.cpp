#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "perc/io.hpp"
#include "perc/lattice.hpp"

using namespace perc;

TEST_CASE("edge count matches 2*(2n+1)*2n") {
  for (int n = 1; n <= 8; ++n) {
    Box box(n);
    std::size_t count = 0;
    for (int y = -n; y <= n; ++y)
      for (int x = -n; x <= n; ++x) {
        if (box.contains(EdgeId{Orientation::horizontal, {x, y}})) ++count;
        if (box.contains(EdgeId{Orientation::vertical, {x, y}})) ++count;
      }
    REQUIRE(count == box.edge_count());
    REQUIRE(count == static_cast<std::size_t>(2 * (2 * n + 1) * 2 * n));
  }
}

TEST_CASE("edge indexing is a bijection in (orientation, y, x) order") {
  Box box(3);
  std::size_t prev_index = 0;
  for (std::size_t i = 0; i < box.edge_count(); ++i) {
    EdgeId e = box.edge_at(i);
    REQUIRE(box.edge_index(e) == i);
    if (i > 0) REQUIRE(i == prev_index + 1);
    prev_index = i;
  }
  // horizontal block first
  REQUIRE(box.edge_at(0).orient == Orientation::horizontal);
  REQUIRE(box.edge_at(0).base == Vertex{-3, -3});
  REQUIRE(box.edge_at(box.h_count()).orient == Orientation::vertical);
}

TEST_CASE("p=1 opens everything, p=0 closes everything") {
  auto all_open = sample_config(3, 1.0, 99, 5);
  auto all_closed = sample_config(3, 0.0, 99, 5);
  REQUIRE(all_open.box().edge_count() == 84);
  for (std::size_t i = 0; i < 84; ++i) {
    REQUIRE(all_open.open(i));
    REQUIRE(!all_closed.open(i));
  }
}

TEST_CASE("sampling is a pure function of (n, p, seed, stream)") {
  auto a = sample_config(64, 0.5, 7, 3);
  auto b = sample_config(64, 0.5, 7, 3);
  REQUIRE(a == b);
  auto c = sample_config(64, 0.5, 7, 4);
  REQUIRE(!(a == c));
}

TEST_CASE("dual state mirrors primal state") {
  auto cfg = sample_config(2, 0.5, 11, 0);
  for (std::size_t i = 0; i < cfg.box().edge_count(); ++i) {
    EdgeId e = cfg.box().edge_at(i);
    REQUIRE(cfg.closed_dual(e) == !cfg.open(e));
  }
  auto one_closed = sample_config(2, 1.0, 0, 0).with_edge({Orientation::horizontal, {0, 0}}, false);
  REQUIRE(one_closed.closed_dual({Orientation::horizontal, {0, 0}}));
  REQUIRE(one_closed.open_dual({Orientation::horizontal, {1, 0}}));
}

TEST_CASE("enumerate_configs(1) yields 4096 distinct configurations") {
  std::set<uint64_t> masks;
  std::size_t count = 0;
  bool first_all_closed = false, last_all_open = false;
  enumerate_configs(1, [&](const BondConfig& cfg) {
    uint64_t word = cfg.words()[0];
    masks.insert(word);
    if (count == 0) first_all_closed = (word == 0);
    if (count == 4095) last_all_open = (word == 4095);
    ++count;
  });
  REQUIRE(count == 4096);
  REQUIRE(masks.size() == 4096);
  REQUIRE(first_all_closed);
  REQUIRE(last_all_open);
  REQUIRE_THROWS_AS(enumerate_configs(2, [](const BondConfig&) {}), std::invalid_argument);
}

TEST_CASE("subset enumeration keeps other edges closed") {
  std::vector<EdgeId> subset = {{Orientation::horizontal, {0, 0}},
                                {Orientation::vertical, {0, 0}}};
  int count = 0;
  enumerate_subset_configs(2, subset, [&](const BondConfig& cfg) {
    ++count;
    REQUIRE(!cfg.open(EdgeId{Orientation::horizontal, {1, 1}}));
  });
  REQUIRE(count == 4);
}

TEST_CASE("empirical open fraction at p=1/2 within 4 standard deviations") {
  auto cfg = sample_config(256, 0.5, 2024, 0);  // 263168 edges
  std::size_t open_count = 0;
  const std::size_t m = cfg.box().edge_count();
  for (std::size_t i = 0; i < m; ++i) open_count += cfg.open(i);
  double frac = static_cast<double>(open_count) / static_cast<double>(m);
  double sigma = 0.5 / std::sqrt(static_cast<double>(m));
  REQUIRE(std::abs(frac - 0.5) < 4 * sigma);
}

TEST_CASE("config file layout: first edge is the most significant bit") {
  BondConfig cfg = sample_config(1, 0.0, 0, 0).with_edge(Box(1).edge_at(0), true);
  std::string hex = bits_to_hex(cfg);
  REQUIRE(hex == "8000");  // 12 bits pad to 2 bytes
  auto j = config_to_json(cfg);
  REQUIRE(j["n"] == 1);
  auto back = config_from_json(j);
  REQUIRE(back == cfg);
}

TEST_CASE("config JSON round trip on random samples") {
  for (uint64_t t = 0; t < 5; ++t) {
    auto cfg = sample_config(9, 0.5, 31415, t);
    auto back = config_from_json(config_to_json(cfg));
    REQUIRE(back == cfg);
    REQUIRE(back.seed() == cfg.seed());
    REQUIRE(back.p() == cfg.p());
  }
}

TEST_CASE("lazy view agrees with eager sampling") {
  auto eager = sample_config(16, 0.5, 5, 9);
  LazyBondView lazy(16, 0.5, 5, 9);
  for (std::size_t i = 0; i < eager.box().edge_count(); i += 7)
    REQUIRE(lazy.open(i) == eager.open(i));
  REQUIRE(lazy.materialize() == eager);
}
