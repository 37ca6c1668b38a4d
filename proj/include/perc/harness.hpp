#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "perc/arms.hpp"
#include "perc/distance.hpp"
#include "perc/estimator.hpp"
#include "perc/geometry.hpp"
#include "perc/io.hpp"
#include "perc/lattice.hpp"
#include "perc/oracle.hpp"
#include "perc/shortcut.hpp"

// Conditional Monte Carlo studies at desk scale, their CSV/JSON emission,
// and the oracle verification suite. Every study is a deterministic function
// of its parameters and seed: trials use per-trial streams, per-trial values
// land in trial-indexed buffers, and reduction is serial.

namespace perc {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kMaxBoxRadius = 4096;

namespace csv {

class Builder {
 public:
  explicit Builder(std::string header) { out_ = std::move(header) + "\n"; }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ += ',';
      out_ += cells[i];
    }
    out_ += '\n';
  }
  const std::string& text() const { return out_; }

 private:
  std::string out_;
};

inline std::string num(uint64_t v) { return std::to_string(v); }
inline std::string num(int v) { return std::to_string(v); }
inline std::string num(double v) { return csv_double(v); }

}  // namespace csv

// Staged check of the one-arm event 0 <-> dB_n on a lazy view; rejected
// trials rarely look past a small neighborhood of the origin.
template <typename Cfg>
bool origin_connected_staged(const Cfg& cfg, int n) {
  const Vertex origin[1] = {Vertex{0, 0}};
  for (int r = 2; r < n; r *= 2) {
    auto ring = boundary_vertices(cfg.box(), r);
    if (restricted_open_distance(cfg, std::span<const Vertex>(origin, 1), ring,
                                 Vertex{0, 0}, r) < 0)
      return false;
  }
  auto ring = boundary_vertices(cfg.box(), n);
  return restricted_open_distance(cfg, std::span<const Vertex>(origin, 1), ring,
                                  Vertex{0, 0}, n) >= 0;
}

// ---------------------------------------------------------------------------
// Radial study: E[S_{B_n} | A_n] against n^2 pi_3(n).

struct RadialStudy {
  int n{};
  uint64_t trials{}, accepted{};
  double mean_s{}, se_s{};
  EstimatorResult pi3;
  double ratio{}, se_ratio{};
  uint64_t seed{};

  std::string to_csv() const {
    csv::Builder b("n,trials,accepted,acceptance,mean_S,se_S,pi3_hat,se_pi3,ratio,se_ratio,seed");
    b.row({csv::num(n), csv::num(trials), csv::num(accepted),
           csv::num(static_cast<double>(accepted) / static_cast<double>(trials)),
           csv::num(mean_s), csv::num(se_s), csv::num(pi3.phat), csv::num(pi3.stderr_),
           csv::num(ratio), csv::num(se_ratio), csv::num(seed)});
    return b.text();
  }
  nlohmann::json to_json() const {
    return {{"n", n},           {"trials", trials},   {"accepted", accepted},
            {"mean_S", mean_s}, {"se_S", se_s},       {"pi3_hat", pi3.phat},
            {"se_pi3", pi3.stderr_}, {"ratio", ratio}, {"se_ratio", se_ratio},
            {"seed", seed}};
  }
};

inline RadialStudy run_radial(int n, uint64_t trials, uint64_t seed, int threads = 1,
                              double p = 0.5) {
  if (n < 1 || n > kMaxBoxRadius) throw std::invalid_argument("run_radial: bad n");
  if (trials < 1) throw std::invalid_argument("run_radial: trials must be >= 1");
  auto per_trial = [&](uint64_t t) -> int {
    LazyBondView view(n, p, seed, t);
    if (!origin_connected_staged(view, n)) return -1;
    auto d = radial_distance_t(view);
    return d ? *d : -1;
  };
  auto results = run_trials<int>(trials, threads, per_trial);
  RadialStudy st;
  st.n = n;
  st.trials = trials;
  st.seed = seed;
  MeanAccumulator acc;
  for (int r : results)
    if (r >= 0) acc.add(static_cast<double>(r));
  st.accepted = acc.count;
  if (st.accepted == 0) throw std::runtime_error("run_radial: no accepted trials");
  st.mean_s = acc.mean();
  st.se_s = acc.stderr_();
  st.pi3 = estimate_pi(ArmSpec::parse("ooc"), 0, n, trials, seed, threads, trials);
  const double denom = static_cast<double>(n) * n * st.pi3.phat;
  st.ratio = denom > 0 ? st.mean_s / denom : 0.0;
  if (denom > 0 && st.mean_s > 0 && st.pi3.phat > 0) {
    double rel = std::sqrt(std::pow(st.se_s / st.mean_s, 2) +
                           std::pow(st.pi3.stderr_ / st.pi3.phat, 2));
    st.se_ratio = st.ratio * rel;
  }
  return st;
}

// ---------------------------------------------------------------------------
// Crossing study on H_n: S_n, L_n, and the spliced shortcut.

struct CrossingTrial {
  uint64_t trial{};
  int s{}, l{}, sigma{};
  int num_detours{};
  int detoured_edges{};
};

struct CrossingStudy {
  int n{};
  double eps{};
  uint64_t trials{}, accepted{};
  std::vector<CrossingTrial> rows;
  double mean_s{}, mean_l{}, mean_s_over_l{}, mean_sigma_over_l{};
  uint64_t seed{};
  bool acceptance_warning{false};

  std::string per_trial_csv() const {
    csv::Builder b("trial,Sn,Ln,sigma_len,num_detours,detoured_edges");
    for (const CrossingTrial& r : rows)
      b.row({csv::num(r.trial), csv::num(r.s), csv::num(r.l), csv::num(r.sigma),
             csv::num(r.num_detours), csv::num(r.detoured_edges)});
    return b.text();
  }
  std::string to_csv() const {
    csv::Builder b(
        "n,eps,trials,accepted,acceptance,mean_S,mean_L,mean_S_over_L,mean_sigma_over_L,seed");
    b.row({csv::num(n), csv::num(eps), csv::num(trials), csv::num(accepted),
           csv::num(static_cast<double>(accepted) / static_cast<double>(trials)),
           csv::num(mean_s), csv::num(mean_l), csv::num(mean_s_over_l),
           csv::num(mean_sigma_over_l), csv::num(seed)});
    return b.text();
  }
  nlohmann::json to_json() const {
    return {{"n", n},
            {"eps", eps},
            {"trials", trials},
            {"accepted", accepted},
            {"mean_S", mean_s},
            {"mean_L", mean_l},
            {"mean_S_over_L", mean_s_over_l},
            {"mean_sigma_over_L", mean_sigma_over_l},
            {"acceptance_warning", acceptance_warning},
            {"seed", seed}};
  }
};

// One accepted H_n trial: lengths plus the detour plan at this eps.
inline std::optional<CrossingTrial> crossing_trial(const BondConfig& cfg, double eps,
                                                   uint64_t trial, int budget_override = 0) {
  auto low = lowest_crossing_full(cfg);
  if (!low) return std::nullopt;
  auto lengths = crossing_lengths(cfg);
  CrossingTrial row;
  row.trial = trial;
  row.s = lengths->first;
  row.l = lengths->second;
  row.sigma = row.l;
  if (eps > 0.0) {
    const int n = cfg.radius();
    const int margin = lambda_margin(n);
    const int budget = budget_override > 0 ? budget_override : default_detour_budget(eps);
    DetourFinder finder(cfg, *low);
    std::vector<ShieldedDetour> found;
    for (const EdgeId& e : low->path.edges) {
      if (!edge_in_lambda(cfg.box(), e, margin)) continue;
      if (auto det = finder.find(e, eps, budget, margin)) found.push_back(std::move(*det));
    }
    auto plan = build_shortcut(cfg, *low, found);
    row.sigma = static_cast<int>(plan.sigma.edge_count());
    row.num_detours = static_cast<int>(plan.selected.size());
    row.detoured_edges = static_cast<int>(plan.detoured_edges);
  }
  if (!(row.s <= row.sigma && row.sigma <= row.l))
    throw std::logic_error("crossing_trial: S <= sigma <= L violated");
  return row;
}

inline CrossingStudy run_crossing(int n, double eps, uint64_t trials, uint64_t seed,
                                  int threads = 1) {
  if (n < 1 || n > kMaxBoxRadius) throw std::invalid_argument("run_crossing: bad n");
  if (eps < 0.0 || eps > 1.0)
    throw std::invalid_argument("run_crossing: eps must lie in [0, 1]");
  auto per_trial = [&](uint64_t t) -> CrossingTrial {
    BondConfig cfg = sample_config(n, 0.5, seed, t);
    auto row = crossing_trial(cfg, eps, t);
    if (!row) return CrossingTrial{t, -1, -1, -1, 0, 0};
    return *row;
  };
  auto results = run_trials<CrossingTrial>(trials, threads, per_trial);
  CrossingStudy st;
  st.n = n;
  st.eps = eps;
  st.trials = trials;
  st.seed = seed;
  MeanAccumulator ms, ml, msl, msig;
  for (const CrossingTrial& r : results) {
    if (r.s < 0) continue;
    st.rows.push_back(r);
    ms.add(r.s);
    ml.add(r.l);
    msl.add(static_cast<double>(r.s) / static_cast<double>(r.l));
    msig.add(static_cast<double>(r.sigma) / static_cast<double>(r.l));
  }
  st.accepted = ms.count;
  if (st.accepted == 0) throw std::runtime_error("run_crossing: no accepted trials");
  st.mean_s = ms.mean();
  st.mean_l = ml.mean();
  st.mean_s_over_l = msl.mean();
  st.mean_sigma_over_l = msig.mean();
  double rate = static_cast<double>(st.accepted) / static_cast<double>(trials);
  st.acceptance_warning = (n >= 8 && n <= 256) && (rate < 0.3 || rate > 0.7);
  return st;
}

// ---------------------------------------------------------------------------
// Dyadic connection scale tail.

struct DtailRow {
  int k{};
  uint64_t hits{};
  double phat{};
  double scaled{};   // 2^{2(k-1)} phat
  double pi4_hat{};
  double ratio{};    // phat / pi4_hat
};

struct DtailStudy {
  int kmax{};
  uint64_t trials{};
  std::vector<DtailRow> rows;
  uint64_t censored{};
  double censored_frac{};
  uint64_t seed{};

  std::string to_csv() const {
    csv::Builder b("k,hits,phat,scaled_phat,pi4_hat,ratio,censored_frac,trials,seed");
    for (const DtailRow& r : rows)
      b.row({csv::num(r.k), csv::num(r.hits), csv::num(r.phat), csv::num(r.scaled),
             csv::num(r.pi4_hat), csv::num(r.ratio), csv::num(censored_frac),
             csv::num(trials), csv::num(seed)});
    return b.text();
  }
  nlohmann::json to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const DtailRow& r : rows)
      rows_json.push_back({{"k", r.k},
                           {"hits", r.hits},
                           {"phat", r.phat},
                           {"scaled_phat", r.scaled},
                           {"pi4_hat", r.pi4_hat},
                           {"ratio", r.ratio}});
    return {{"kmax", kmax},
            {"trials", trials},
            {"rows", rows_json},
            {"censored_frac", censored_frac},
            {"seed", seed}};
  }
};

inline DtailStudy run_dtail(int kmax, uint64_t trials, uint64_t seed, int threads = 1) {
  if (kmax < 1 || kmax > 8) throw std::invalid_argument("run_dtail: kmax must be in 1..8");
  const int n = 1 << kmax;
  auto per_trial = [&](uint64_t t) -> int8_t {
    LazyBondView view(n, 0.5, seed, t);
    const Vertex origin[1] = {Vertex{0, 0}};
    const Vertex e1[1] = {Vertex{1, 0}};
    for (int k = 1; k <= kmax; ++k) {
      int d = restricted_open_distance(view, std::span<const Vertex>(origin, 1),
                                       std::span<const Vertex>(e1, 1), Vertex{0, 0},
                                       1 << k);
      if (d >= 0) {
        if (d < (1 << (k - 1)) && k > 1)
          throw std::logic_error("run_dtail: distance below 2^{k-1} on {D=k}");
        return static_cast<int8_t>(k);
      }
    }
    return -1;  // censored at kmax
  };
  auto results = run_trials<int8_t>(trials, threads, per_trial);
  DtailStudy st;
  st.kmax = kmax;
  st.trials = trials;
  st.seed = seed;
  std::vector<uint64_t> counts(static_cast<std::size_t>(kmax) + 1, 0);
  for (int8_t r : results) {
    if (r < 0) ++st.censored;
    else ++counts[static_cast<std::size_t>(r)];
  }
  st.censored_frac = static_cast<double>(st.censored) / static_cast<double>(trials);
  for (int k = 1; k <= kmax; ++k) {
    DtailRow row;
    row.k = k;
    row.hits = counts[static_cast<std::size_t>(k)];
    row.phat = static_cast<double>(row.hits) / static_cast<double>(trials);
    row.scaled = std::ldexp(row.phat, 2 * (k - 1));
    auto pi4 = estimate_pi(ArmSpec::parse("ococ"), 0, 1 << (k - 1), trials, seed, threads,
                           trials * static_cast<uint64_t>(k));
    row.pi4_hat = pi4.phat;
    row.ratio = pi4.phat > 0 ? row.phat / pi4.phat : 0.0;
    st.rows.push_back(row);
  }
  return st;
}

// ---------------------------------------------------------------------------
// Point-to-point tail with the confining dual circuit scale.

struct Pt2ptStudy {
  int d{}, padding{};
  uint64_t trials{}, accepted{};
  double pi3_d{};
  std::vector<std::pair<double, double>> tail;       // lambda -> phat
  std::vector<std::pair<int, double>> k_at_least;    // L -> P(K >= L | accepted)
  double censored_k_frac{};
  uint64_t seed{};

  std::string to_csv() const {
    csv::Builder b("kind,key,count,phat");
    for (const auto& [lambda, phat] : tail)
      b.row({"tail", csv::num(lambda),
             csv::num(static_cast<uint64_t>(std::llround(phat * static_cast<double>(accepted)))),
             csv::num(phat)});
    for (const auto& [k, phat] : k_at_least)
      b.row({"K_at_least", csv::num(k),
             csv::num(static_cast<uint64_t>(std::llround(phat * static_cast<double>(accepted)))),
             csv::num(phat)});
    return b.text();
  }
  nlohmann::json to_json() const {
    nlohmann::json tail_json = nlohmann::json::array();
    for (const auto& [lambda, phat] : tail)
      tail_json.push_back({{"lambda", lambda}, {"phat", phat}});
    nlohmann::json k_json = nlohmann::json::array();
    for (const auto& [k, phat] : k_at_least)
      k_json.push_back({{"L", k}, {"phat", phat}});
    return {{"d", d},          {"padding", padding},       {"trials", trials},
            {"accepted", accepted}, {"pi3_d", pi3_d},      {"tail", tail_json},
            {"K_at_least", k_json}, {"censored_K_frac", censored_k_frac},
            {"seed", seed}};
  }
};

// Is there an open crossing of the annulus B_outer \ B_inner (which rules
// out a closed dual circuit around B_inner in that annulus)?
template <typename Cfg>
bool annulus_open_crossing(const Cfg& cfg, int inner, int outer) {
  auto inner_ring = boundary_vertices(cfg.box(), inner);
  auto outer_ring = boundary_vertices(cfg.box(), outer);
  const Box& box = cfg.box();
  std::vector<int> dist(box.vertex_count(), -1);
  std::vector<uint8_t> target(box.vertex_count(), 0);
  for (const Vertex& v : outer_ring) target[box.vertex_index(v)] = 1;
  auto inside = [&](const Vertex& v) {
    int dd = std::max(std::abs(v.x), std::abs(v.y));
    return dd >= inner && dd <= outer;
  };
  std::deque<Vertex> queue;
  for (const Vertex& v : inner_ring) {
    dist[box.vertex_index(v)] = 0;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    Vertex v = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      Vertex u{v.x + dir::dx[d], v.y + dir::dy[d]};
      if (!box.contains(u) || !inside(u)) continue;
      std::size_t ui = box.vertex_index(u);
      if (dist[ui] >= 0) continue;
      if (!cfg.open(dir::edge_from(v, d))) continue;
      if (target[ui]) return true;
      dist[ui] = 1;
      queue.push_back(u);
    }
  }
  return false;
}

inline Pt2ptStudy run_pt2pt(int d, int padding, uint64_t trials, uint64_t seed,
                            int threads = 1) {
  if (d < 1) throw std::invalid_argument("run_pt2pt: d must be >= 1");
  if (padding < 1 || padding > 6) throw std::invalid_argument("run_pt2pt: padding in 1..6");
  const int n = (1 << (padding + 1)) * d;
  if (n > kMaxBoxRadius) throw std::invalid_argument("run_pt2pt: box exceeds memory guard");
  const int cx = d / 2;
  const Vertex x{-cx, 0}, y{d - cx, 0};

  struct TrialOut {
    int dist{-1};  // -1: rejected
    int k{0};      // first scale with a surrounding closed dual circuit; 0 censored
  };
  auto per_trial = [&](uint64_t t) -> TrialOut {
    BondConfig cfg = sample_config(n, 0.5, seed, t);
    TrialOut out;
    const Vertex xs[1] = {x}, ys[1] = {y};
    int dist = restricted_open_distance(cfg, std::span<const Vertex>(xs, 1),
                                        std::span<const Vertex>(ys, 1), Vertex{0, 0}, n);
    if (dist < 0) return out;
    out.dist = dist;
    for (int k = 1; k <= padding; ++k) {
      if (!annulus_open_crossing(cfg, (1 << k) * d, (1 << (k + 1)) * d)) {
        out.k = k;
        break;
      }
    }
    return out;
  };
  auto results = run_trials<TrialOut>(trials, threads, per_trial);

  Pt2ptStudy st;
  st.d = d;
  st.padding = padding;
  st.trials = trials;
  st.seed = seed;
  auto pi3 = estimate_pi(ArmSpec::parse("ooc"), 0, d >= 1 ? d : 1, trials, seed, threads,
                         trials);
  st.pi3_d = pi3.phat;
  uint64_t accepted = 0, censored_k = 0;
  std::vector<uint64_t> k_counts(static_cast<std::size_t>(padding) + 1, 0);
  const double scale = static_cast<double>(d) * d * st.pi3_d;
  const double lambdas[5] = {1, 2, 4, 8, 16};
  uint64_t tail_counts[5] = {0, 0, 0, 0, 0};
  for (const TrialOut& r : results) {
    if (r.dist < 0) continue;
    ++accepted;
    for (int i = 0; i < 5; ++i)
      if (static_cast<double>(r.dist) >= lambdas[i] * scale) ++tail_counts[i];
    if (r.k == 0) ++censored_k;
    else ++k_counts[static_cast<std::size_t>(r.k)];
  }
  st.accepted = accepted;
  if (accepted == 0) throw std::runtime_error("run_pt2pt: no accepted trials");
  for (int i = 0; i < 5; ++i)
    st.tail.emplace_back(lambdas[i],
                         static_cast<double>(tail_counts[i]) / static_cast<double>(accepted));
  // P(K >= L): K = k means the first circuit scale is k.
  for (int L = 1; L <= padding; ++L) {
    uint64_t at_least = censored_k;
    for (int k = L; k <= padding; ++k) at_least += k_counts[static_cast<std::size_t>(k)];
    st.k_at_least.emplace_back(L, static_cast<double>(at_least) / static_cast<double>(accepted));
  }
  st.censored_k_frac = static_cast<double>(censored_k) / static_cast<double>(accepted);
  return st;
}

// ---------------------------------------------------------------------------
// Oracle verification suite.

struct VerifyLine {
  std::string name;
  bool pass{false};
  bool hard{true};  // report-only lines never fail the suite
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyLine> lines;
  bool pass{true};
  void add(std::string name, bool ok, std::string detail, bool hard = true) {
    lines.push_back({std::move(name), ok, hard, std::move(detail)});
    if (hard && !ok) pass = false;
  }
  std::string to_text() const {
    std::string out;
    for (const VerifyLine& l : lines) {
      out += l.pass ? "[PASS] " : (l.hard ? "[FAIL] " : "[WARN] ");
      out += l.name;
      if (!l.detail.empty()) out += "  (" + l.detail + ")";
      out += "\n";
    }
    out += pass ? "VERIFY: PASS\n" : "VERIFY: FAIL\n";
    return out;
  }
};

enum class VerifyLevel { fast, full };

VerifyReport verify_suite(VerifyLevel level, uint64_t seed = 1, int threads = 1);

}  // namespace perc

#include "perc/verify_impl.hpp"
