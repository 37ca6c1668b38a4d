// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria can be selected by number on the command line; the
// default runs all of them.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <set>
#include <string>

#include "perc/harness.hpp"

using namespace perc;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double now_s() {
  using clock = std::chrono::steady_clock;
  static const auto t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

// 1. Monte Carlo vs the 4096-configuration enumeration at n=1.
Outcome criterion1() {
  const uint64_t trials = 1000000;
  const auto exact = oracle::enumerate_stats1();
  auto per_trial = [&](uint64_t t) -> std::pair<int8_t, int8_t> {
    BondConfig cfg = sample_config(1, 0.5, 101, t);
    auto lengths = crossing_lengths(cfg);
    auto rad = radial_distance(cfg);
    return {lengths ? static_cast<int8_t>(lengths->first) : int8_t{-1},
            rad ? static_cast<int8_t>(*rad) : int8_t{-1}};
  };
  auto results = run_trials<std::pair<int8_t, int8_t>>(trials, 1, per_trial);
  uint64_t n_h = 0;
  MeanAccumulator s1, sb1;
  for (auto [s, r] : results) {
    if (s >= 0) {
      ++n_h;
      s1.add(s);
    }
    if (r >= 0) sb1.add(r);
  }
  double ph = static_cast<double>(n_h) / static_cast<double>(trials);
  double se_ph = binomial_stderr(ph, trials);
  bool ok_h = std::abs(ph - exact.p_h1) <= 3 * se_ph;
  bool ok_s = std::abs(s1.mean() - exact.e_s1_given_h1) <= 3 * s1.stderr_();
  bool ok_r = std::abs(sb1.mean() - exact.e_sb1_given_a1) <= 3 * std::max(sb1.stderr_(), 1e-12);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "P(H1) %.6f vs %.6f; E[S1|H1] %.6f vs %.6f; E[SB1|A1] %.6f vs %.6f",
                ph, exact.p_h1, s1.mean(), exact.e_s1_given_h1, sb1.mean(),
                exact.e_sb1_given_a1);
  return {ok_h && ok_s && ok_r, buf};
}

// 2. Production lowest crossing vs the exhaustive minimal-region crossing.
Outcome criterion2() {
  int accepted = 0, mismatches = 0;
  for (uint64_t t = 0; accepted < 200 && t < 2000; ++t) {
    BondConfig cfg = sample_config(2, 0.5, 202, t);
    auto ora = oracle::enumerate_crossings(cfg);
    if (!ora.minimal) continue;
    ++accepted;
    auto prod = lowest_crossing(cfg);
    if (!prod || prod->vertices != ora.crossings[*ora.minimal]) ++mismatches;
  }
  return {accepted == 200 && mismatches == 0,
          std::to_string(accepted) + "/200 configs, " + std::to_string(mismatches) +
              " mismatches"};
}

// 3. Arm detector vs the disjoint-path packing oracle.
Outcome criterion3() {
  const char* specs[3] = {"ooc", "ococ", "oooo"};
  const EdgeId e0{Orientation::horizontal, {0, 0}};
  uint64_t mismatches = 0, checks = 0;
  for (int t = 0; t < 500; ++t) {
    BondConfig cfg = sample_config(4, 0.5, 303, static_cast<uint64_t>(t));
    for (const char* s : specs) {
      ArmSpec spec = ArmSpec::parse(s);
      for (int m : {2, 3, 4}) {
        ++checks;
        if (edge_arm_event(cfg, e0, m, spec) !=
            oracle::packing_edge_arm_event(cfg, e0, m, spec))
          ++mismatches;
      }
    }
  }
  return {mismatches == 0,
          std::to_string(checks) + " checks, " + std::to_string(mismatches) + " mismatches"};
}

// 4. Five-arm universality: pi5(2n)/pi5(n) within [0.15, 0.40] for n in {8,16}.
Outcome criterion4() {
  const uint64_t trials = 1000000;
  auto spec = ArmSpec::parse("ococo");
  auto p8 = estimate_pi(spec, 0, 8, trials, 404, 1);
  auto p16 = estimate_pi(spec, 0, 16, trials, 404, 1, trials);
  auto p32 = estimate_pi(spec, 0, 32, trials, 404, 1, 2 * trials);
  double r16 = p16.phat / p8.phat;
  double r32 = p32.phat / p16.phat;
  bool ok = r16 >= 0.15 && r16 <= 0.40 && r32 >= 0.15 && r32 <= 0.40;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "pi5(8)=%.3g pi5(16)=%.3g pi5(32)=%.3g ratios %.3f %.3f (band [0.15,0.40])",
                p8.phat, p16.phat, p32.phat, r16, r32);
  return {ok, buf};
}

// 5. Dyadic scale band against the four-arm probability, and the
//    divergent-second-moment signature.
Outcome criterion5() {
  const uint64_t trials = 1000000;
  auto st = run_dtail(6, trials, 505, 1);
  bool ok = true;
  std::string detail;
  for (const auto& row : st.rows) {
    if (row.k >= 2 && row.k <= 5) {
      if (!(row.ratio >= 0.05 && row.ratio <= 20.0)) ok = false;
      detail += "k" + std::to_string(row.k) + " ratio " + csv_double(row.ratio) + "; ";
    }
    if (row.k >= 2 && row.k <= 6) {
      if (!(row.scaled >= 0.01)) ok = false;
    }
  }
  double min_scaled = 1e9;
  for (const auto& row : st.rows)
    if (row.k >= 2 && row.k <= 6) min_scaled = std::min(min_scaled, row.scaled);
  detail += "min scaled " + csv_double(min_scaled);
  return {ok, detail};
}

// 6. Shortcut invariant suite at n=64, eps=0.5, 1000 accepted samples.
Outcome criterion6() {
  const int n = 64;
  const double eps = 0.5;
  const int margin = lambda_margin(n);
  const int budget = default_detour_budget(eps);
  int accepted = 0;
  uint64_t violations = 0, detours_total = 0;
  for (uint64_t t = 0; accepted < 1000 && t < 4000; ++t) {
    BondConfig cfg = sample_config(n, 0.5, 606, t);
    auto low = lowest_crossing_full(cfg);
    if (!low) continue;
    ++accepted;
    DetourFinder finder(cfg, *low);
    std::vector<ShieldedDetour> found;
    for (const EdgeId& e : low->path.edges) {
      if (!edge_in_lambda(cfg.box(), e, margin)) continue;
      if (auto det = finder.find(e, eps, budget, margin)) found.push_back(std::move(*det));
    }
    DetourPlan plan;
    try {
      plan = build_shortcut(cfg, *low, found);
    } catch (const std::exception&) {
      ++violations;
      continue;
    }
    detours_total += plan.selected.size();
    auto lengths = crossing_lengths(cfg);
    int sigma = static_cast<int>(plan.sigma.edge_count());
    if (!(lengths->first <= sigma && sigma <= lengths->second)) ++violations;
    if (plan.sigma.vertices.front().x != -n || plan.sigma.vertices.back().x != n) ++violations;
    for (const EdgeId& e : plan.sigma.edges)
      if (!cfg.open(e)) ++violations;
    for (std::size_t a = 0; a < plan.selected.size(); ++a) {
      const auto& da = plan.selected[a];
      if (static_cast<double>(da.detour.vertex_count()) >
          eps * static_cast<double>(da.detoured.vertex_count()))
        ++violations;
      if (!verify_shielded_detour(cfg, *low, da, eps).ok) ++violations;
      for (std::size_t b = a + 1; b < plan.selected.size(); ++b)
        for (const Vertex& u : da.detoured.vertices)
          for (const Vertex& v : plan.selected[b].detoured.vertices)
            if (u == v) ++violations;
    }
  }
  return {accepted == 1000 && violations == 0,
          std::to_string(accepted) + "/1000 accepted, " + std::to_string(violations) +
              " violations, " + std::to_string(detours_total) + " detours selected"};
}

// 7. Three disjoint arms along the radial path on A_32 with no circuit.
Outcome criterion7() {
  const int n = 32;
  int accepted = 0;
  uint64_t violations = 0, edges_checked = 0;
  auto ring = boundary_vertices(Box(n), n);
  auto spec = ArmSpec::parse("ooc");
  for (uint64_t t = 0; accepted < 100 && t < 100000; ++t) {
    LazyBondView view(n, 0.5, 707, t);
    if (!origin_connected_staged(view, n)) continue;
    BondConfig cfg = view.materialize();
    auto cluster = detail::grow_dual_cluster(cfg, detail::origin_faces());
    if (!cluster.escaped) continue;  // an open circuit surrounds the origin
    ++accepted;
    auto sigma = leftmost_radial_path(cfg);
    for (const EdgeId& e : sigma.edges) {
      const Vertex a = e.base, b = edge_other_end(e);
      int d0 = std::min(std::max(std::abs(a.x), std::abs(a.y)),
                        std::max(std::abs(b.x), std::abs(b.y)));
      int dn = std::min(n - std::max(std::abs(a.x), std::abs(a.y)),
                        n - std::max(std::abs(b.x), std::abs(b.y)));
      int k = std::min(d0, dn);
      if (k < 1) continue;
      ++edges_checked;
      if (!edge_arm_event(cfg, e, k, spec)) ++violations;
    }
  }
  return {accepted == 100 && violations == 0,
          std::to_string(accepted) + "/100 samples, " + std::to_string(edges_checked) +
              " edges checked, " + std::to_string(violations) + " violations"};
}

// 8. Trend checks: S_n/L_n strictly decreasing, radial ratio bounded.
Outcome criterion8() {
  auto c32 = run_crossing(32, 0.0, 500, 808, 1);
  auto c64 = run_crossing(64, 0.0, 500, 808, 1);
  auto c128 = run_crossing(128, 0.0, 500, 808, 1);
  bool ok = c32.accepted >= 200 && c64.accepted >= 200 && c128.accepted >= 200;
  bool decreasing = c32.mean_s_over_l > c64.mean_s_over_l &&
                    c64.mean_s_over_l > c128.mean_s_over_l;
  auto r32 = run_radial(32, 6000, 809, 1);
  auto r128 = run_radial(128, 6000, 809, 1);
  bool bounded = r128.ratio <= 1.5 * r32.ratio;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "S/L: %.4f > %.4f > %.4f; ratio32 %.3f ratio128 %.3f (<= 1.5x)",
                c32.mean_s_over_l, c64.mean_s_over_l, c128.mean_s_over_l, r32.ratio,
                r128.ratio);
  return {ok && decreasing && bounded, buf};
}

// 9. Byte-identical study output across repeats and thread counts.
Outcome criterion9() {
  bool ok = true;
  auto c1 = run_crossing(16, 0.5, 60, 909, 1);
  auto c2 = run_crossing(16, 0.5, 60, 909, 3);
  ok = ok && c1.to_csv() == c2.to_csv() && c1.per_trial_csv() == c2.per_trial_csv();
  auto r1 = run_radial(16, 2000, 909, 1);
  auto r2 = run_radial(16, 2000, 909, 2);
  ok = ok && r1.to_csv() == r2.to_csv();
  auto d1 = run_dtail(4, 50000, 909, 1);
  auto d2 = run_dtail(4, 50000, 909, 4);
  ok = ok && d1.to_csv() == d2.to_csv();
  auto p1 = run_pt2pt(1, 3, 5000, 909, 1);
  auto p2 = run_pt2pt(1, 3, 5000, 909, 2);
  ok = ok && p1.to_csv() == p2.to_csv();
  auto e1 = estimate_pi(ArmSpec::parse("ooc"), 0, 16, 20000, 909, 1);
  auto e2 = estimate_pi(ArmSpec::parse("ooc"), 0, 16, 20000, 909, 3);
  ok = ok && e1.hits == e2.hits;
  return {ok, ok ? "all study outputs byte-identical" : "output differs across thread counts"};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "all") == 0) continue;
    wanted.insert(std::atoi(argv[i]));
  }
  struct Entry {
    int id;
    const char* name;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {1, "n=1 oracle equivalence (1e6 trials)", criterion1},
      {2, "lowest-crossing oracle (200 configs at n=2)", criterion2},
      {3, "arm-detector oracle (500 configs, 9 spec/radius pairs)", criterion3},
      {4, "five-arm universality band", criterion4},
      {5, "dyadic tail vs four-arm band", criterion5},
      {6, "shortcut invariant suite (n=64, eps=0.5)", criterion6},
      {7, "three-arm property along the radial path (n=32)", criterion7},
      {8, "trend checks (S/L decreasing, radial ratio bounded)", criterion8},
      {9, "deterministic output across thread counts", criterion9},
  };
  int failures = 0;
  for (const Entry& e : entries) {
    if (!wanted.empty() && !wanted.count(e.id)) continue;
    double t0 = now_s();
    Outcome out = e.fn();
    double dt = now_s() - t0;
    std::printf("[%s] criterion %d: %s  (%.1fs)  %s\n", out.pass ? "PASS" : "FAIL", e.id,
                e.name, dt, out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures ? 1 : 0;
}
