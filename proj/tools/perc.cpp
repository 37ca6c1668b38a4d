// perc: sample configurations, estimate arm probabilities, and run the
// distance studies from the command line. CSV goes to stdout or --out;
// --format json wraps the result in a summary object.

#include <chrono>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "perc/harness.hpp"

namespace {

struct OutputOpts {
  std::string out_path;
  std::string format = "csv";
  int threads = 1;
  uint64_t seed = 1;
  uint64_t trials = 1000;
};

void add_output_opts(CLI::App* cmd, OutputOpts& o, bool with_trials = true) {
  cmd->add_option("--out", o.out_path, "write output to this file instead of stdout");
  cmd->add_option("--format", o.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", o.threads, "worker threads (output is identical for any count)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "base RNG seed");
  if (with_trials) cmd->add_option("--trials", o.trials, "Monte Carlo trials");
}

void emit(const OutputOpts& o, const std::string& csv, const nlohmann::json& spec,
          const nlohmann::json& result, double elapsed_s) {
  std::string payload;
  if (o.format == "json") {
    nlohmann::json summary{{"spec", spec},
                           {"result", result},
                           {"version", perc::kVersion},
                           {"elapsed_s", elapsed_s}};
    payload = summary.dump(2) + "\n";
  } else {
    payload = csv;
  }
  if (o.out_path.empty())
    std::cout << payload;
  else
    perc::write_text_file(o.out_path, payload);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-dimensional critical bond percolation geometry and distance studies"};
  app.require_subcommand(1);

  // --- sample -------------------------------------------------------------
  auto* sample = app.add_subcommand("sample", "sample one configuration and write it as JSON");
  int sample_n = 16;
  double sample_p = 0.5;
  uint64_t sample_seed = 1, sample_stream = 0;
  std::string sample_out;
  sample->add_option("--n", sample_n, "box radius")->check(CLI::PositiveNumber);
  sample->add_option("--p", sample_p, "open probability");
  sample->add_option("--seed", sample_seed, "RNG seed");
  sample->add_option("--stream", sample_stream, "trial stream index");
  sample->add_option("--out", sample_out, "output file (default stdout)");

  // --- arms ---------------------------------------------------------------
  auto* arms = app.add_subcommand("arms", "estimate an arm probability");
  OutputOpts arms_o;
  std::string arms_spec = "ooc";
  int arms_inner = 0, arms_outer = 32;
  bool arms_half = false;
  arms->add_option("--spec", arms_spec, "cyclic color word over {o,c}, e.g. ooc");
  arms->add_option("--inner", arms_inner, "inner radius (0 anchors at the origin edge)");
  arms->add_option("--outer", arms_outer, "outer radius")->check(CLI::PositiveNumber);
  arms->add_flag("--half", arms_half, "restrict arms to the upper half-plane");
  add_output_opts(arms, arms_o);
  arms_o.trials = 100000;

  // --- radial ---------------------------------------------------------------
  auto* radial = app.add_subcommand("radial", "E[S_{B_n} | A_n] against n^2 pi_3(n)");
  OutputOpts radial_o;
  int radial_n = 32;
  radial->add_option("--n", radial_n, "box radius")->check(CLI::PositiveNumber);
  add_output_opts(radial, radial_o);

  // --- crossing --------------------------------------------------------------
  auto* crossing = app.add_subcommand("crossing", "S_n, L_n and shortcut summary on H_n");
  OutputOpts crossing_o;
  int crossing_n = 32;
  double crossing_eps = 0.0;
  crossing->add_option("--n", crossing_n, "box radius")->check(CLI::PositiveNumber);
  crossing->add_option("--eps", crossing_eps, "detour ratio bound (0 skips detours)");
  add_output_opts(crossing, crossing_o);

  // --- shortcut ---------------------------------------------------------------
  auto* shortcut = app.add_subcommand("shortcut", "per-trial shortcut records on H_n");
  OutputOpts shortcut_o;
  int shortcut_n = 64;
  double shortcut_eps = 0.5;
  shortcut->add_option("--n", shortcut_n, "box radius")->check(CLI::PositiveNumber);
  shortcut->add_option("--eps", shortcut_eps, "detour ratio bound");
  add_output_opts(shortcut, shortcut_o);

  // --- dtail ---------------------------------------------------------------
  auto* dtail = app.add_subcommand("dtail", "dyadic connection scale tail");
  OutputOpts dtail_o;
  int dtail_kmax = 6;
  dtail->add_option("--kmax", dtail_kmax, "largest dyadic scale")->check(CLI::Range(1, 8));
  add_output_opts(dtail, dtail_o);

  // --- pt2pt ---------------------------------------------------------------
  auto* pt2pt = app.add_subcommand("pt2pt", "point-to-point distance tail");
  OutputOpts pt2pt_o;
  int pt2pt_d = 1, pt2pt_pad = 4;
  pt2pt->add_option("--d", pt2pt_d, "separation |x-y|")->check(CLI::PositiveNumber);
  pt2pt->add_option("--L", pt2pt_pad, "dyadic padding")->check(CLI::Range(1, 6));
  add_output_opts(pt2pt, pt2pt_o);

  // --- verify ---------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "run the oracle suite, or check a config file");
  std::string verify_level = "fast";
  std::string verify_in, verify_out;
  bool emit_geometry = false;
  uint64_t verify_seed = 1;
  int verify_threads = 1;
  verify->add_option("--level", verify_level, "fast or full")
      ->check(CLI::IsMember({"fast", "full"}));
  verify->add_option("--in", verify_in, "config JSON to load and check");
  verify->add_flag("--emit-geometry", emit_geometry,
                   "emit crossing/circuit geometry for --in as JSON");
  verify->add_option("--out", verify_out, "output file (default stdout)");
  verify->add_option("--seed", verify_seed, "seed for randomized oracle comparisons");
  verify->add_option("--threads", verify_threads, "worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  auto t0 = std::chrono::steady_clock::now();

  try {
    if (*sample) {
      auto cfg = perc::sample_config(sample_n, sample_p, sample_seed, sample_stream);
      std::string payload = perc::config_to_json(cfg).dump(2) + "\n";
      if (sample_out.empty())
        std::cout << payload;
      else
        perc::write_text_file(sample_out, payload);
      return 0;
    }

    if (*arms) {
      auto spec = perc::ArmSpec::parse(
          arms_spec, arms_half ? perc::ArmRegion::upper_half_plane : perc::ArmRegion::full_plane);
      auto res = perc::estimate_pi(spec, arms_inner, arms_outer, arms_o.trials, arms_o.seed,
                                   arms_o.threads);
      perc::csv::Builder b("spec,inner,outer,trials,hits,phat,stderr,seed");
      b.row({arms_spec, perc::csv::num(arms_inner), perc::csv::num(arms_outer),
             perc::csv::num(res.trials), perc::csv::num(res.hits), perc::csv::num(res.phat),
             perc::csv::num(res.stderr_), perc::csv::num(res.seed)});
      nlohmann::json spec_json{{"study", "arms"},     {"spec", arms_spec},
                               {"inner", arms_inner}, {"outer", arms_outer},
                               {"trials", arms_o.trials}, {"seed", arms_o.seed},
                               {"half_plane", arms_half}};
      nlohmann::json result{{"hits", res.hits}, {"phat", res.phat}, {"stderr", res.stderr_}};
      emit(arms_o, b.text(), spec_json, result, seconds_since(t0));
      return 0;
    }

    if (*radial) {
      auto st = perc::run_radial(radial_n, radial_o.trials, radial_o.seed, radial_o.threads);
      nlohmann::json spec_json{{"study", "radial"},
                               {"n", radial_n},
                               {"trials", radial_o.trials},
                               {"seed", radial_o.seed},
                               {"conditioning", "A_n"}};
      emit(radial_o, st.to_csv(), spec_json, st.to_json(), seconds_since(t0));
      return 0;
    }

    if (*crossing) {
      auto st = perc::run_crossing(crossing_n, crossing_eps, crossing_o.trials, crossing_o.seed,
                                   crossing_o.threads);
      if (st.acceptance_warning)
        std::cerr << "warning: H_n acceptance rate outside [0.3, 0.7]\n";
      nlohmann::json spec_json{{"study", "crossing"}, {"n", crossing_n},
                               {"eps", crossing_eps}, {"trials", crossing_o.trials},
                               {"seed", crossing_o.seed}, {"conditioning", "H_n"}};
      emit(crossing_o, st.to_csv(), spec_json, st.to_json(), seconds_since(t0));
      return 0;
    }

    if (*shortcut) {
      auto st = perc::run_crossing(shortcut_n, shortcut_eps, shortcut_o.trials, shortcut_o.seed,
                                   shortcut_o.threads);
      nlohmann::json spec_json{{"study", "shortcut"}, {"n", shortcut_n},
                               {"eps", shortcut_eps}, {"trials", shortcut_o.trials},
                               {"seed", shortcut_o.seed}, {"conditioning", "H_n"}};
      emit(shortcut_o, st.per_trial_csv(), spec_json, st.to_json(), seconds_since(t0));
      return 0;
    }

    if (*dtail) {
      auto st = perc::run_dtail(dtail_kmax, dtail_o.trials, dtail_o.seed, dtail_o.threads);
      nlohmann::json spec_json{{"study", "dtail"},
                               {"kmax", dtail_kmax},
                               {"trials", dtail_o.trials},
                               {"seed", dtail_o.seed},
                               {"conditioning", "none"}};
      emit(dtail_o, st.to_csv(), spec_json, st.to_json(), seconds_since(t0));
      return 0;
    }

    if (*pt2pt) {
      auto st = perc::run_pt2pt(pt2pt_d, pt2pt_pad, pt2pt_o.trials, pt2pt_o.seed,
                                pt2pt_o.threads);
      nlohmann::json spec_json{{"study", "pt2pt"}, {"d", pt2pt_d},
                               {"L", pt2pt_pad},   {"trials", pt2pt_o.trials},
                               {"seed", pt2pt_o.seed}, {"conditioning", "x<->y"}};
      emit(pt2pt_o, st.to_csv(), spec_json, st.to_json(), seconds_since(t0));
      return 0;
    }

    if (*verify) {
      if (!verify_in.empty()) {
        auto cfg = perc::config_from_json(nlohmann::json::parse(perc::read_text_file(verify_in)));
        nlohmann::json out{{"n", cfg.radius()},
                           {"p", cfg.p()},
                           {"seed", cfg.seed()},
                           {"stream", cfg.stream()},
                           {"edges", cfg.box().edge_count()},
                           {"roundtrip_ok",
                            perc::config_to_json(cfg) ==
                                perc::config_to_json(perc::config_from_json(perc::config_to_json(cfg)))}};
        if (emit_geometry) {
          auto low = perc::lowest_crossing(cfg);
          out["H_n"] = low.has_value();
          if (low) {
            out["lowest_crossing"] = perc::path_to_json(*low);
            auto lengths = perc::crossing_lengths(cfg);
            out["S_n"] = lengths->first;
            out["L_n"] = lengths->second;
          }
          auto ring = perc::boundary_vertices(cfg.box(), cfg.radius());
          bool a_n = perc::connected(cfg, perc::Vertex{0, 0}, ring,
                                     perc::VertexMask::all(cfg.box()));
          out["A_n"] = a_n;
          if (a_n) {
            auto rad = perc::radial_distance(cfg);
            out["radial_distance"] = *rad;
            auto dec = perc::innermost_circuits(cfg);
            out["K"] = dec.K;
            nlohmann::json circuits = nlohmann::json::array();
            for (const auto& c : dec.circuits) circuits.push_back(perc::path_to_json(c.path));
            out["circuits"] = circuits;
            nlohmann::json connectors = nlohmann::json::array();
            for (const auto& c : dec.connectors) connectors.push_back(perc::path_to_json(c));
            out["connectors"] = connectors;
          }
        }
        std::string payload = out.dump(2) + "\n";
        if (verify_out.empty())
          std::cout << payload;
        else
          perc::write_text_file(verify_out, payload);
        return 0;
      }
      auto level = verify_level == "full" ? perc::VerifyLevel::full : perc::VerifyLevel::fast;
      auto report = perc::verify_suite(level, verify_seed, verify_threads);
      std::string payload = report.to_text();
      if (verify_out.empty())
        std::cout << payload;
      else
        perc::write_text_file(verify_out, payload);
      return report.pass ? 0 : 2;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
