#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>

#include "CLI11.hpp"
#include "wiretap/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wiretap;

namespace {

ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return ExperimentConfig{};
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  return config_from_json(json::parse(in));
}

json report_json(const SecrecyReport& r) {
  json j;
  j["method"] = r.method == SecrecyMethod::exact ? "exact" : "plug_in_mc";
  j["p_e"] = r.p_e;
  j["block_error_rate"] = r.block_error_rate;
  j["equivocation_ratio"] = r.equivocation_ratio;
  j["leakage_per_use"] = r.leakage_per_use;
  j["message_entropy"] = r.message_entropy;
  j["total_leakage"] = r.total_leakage;
  j["summand1"] = r.summand1;
  j["summand2"] = r.summand2;
  j["chain_residual"] = r.chain_residual;
  j["p_e_exact"] = r.p_e_exact;
  if (r.method == SecrecyMethod::plug_in_mc) {
    j["sample_count"] = r.sample_count;
    j["under_sampled"] = r.under_sampled;
    j["equivocation_ratio_mm"] = r.equivocation_ratio_mm;
    j["statistic"] = r.statistic;
  }
  return j;
}

json bounds_json(const BoundReport& b) {
  return json{{"lower", b.lower},      {"upper", b.upper},
              {"r_hat1", b.r_hat1},    {"r_hat2", b.r_hat2},
              {"r_hat3", b.r_hat3},    {"branch", b.branch},
              {"feedback_rate", b.feedback_rate}};
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::invalid_argument("cannot write " + p.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"secrecy bounds and finite-blocklength protocol lab for "
               "state-dependent wiretap channels with rate-limited feedback"};
  app.require_subcommand(1);

  std::string config_path, system_path, out_path;
  std::string axis = "rf";
  double rf = 0.0, q = 0.0, resolution = 0.0;
  int sessions = 0, transcripts = 0, trials = 50;
  std::uint64_t seed = 0;

  CLI::App* cap = app.add_subcommand(
      "capacity", "bounds and closed forms at one operating point");
  cap->add_option("--config", config_path, "JSON config file");
  CLI::Option* cap_rf = cap->add_option("--rf", rf, "feedback rate");
  CLI::Option* cap_q = cap->add_option("--q", q, "state bias q");
  CLI::Option* cap_res =
      cap->add_option("--resolution", resolution, "optimizer grid pitch");
  cap->add_option("--system", system_path, "explicit system JSON file");

  CLI::App* sw = app.add_subcommand("sweep", "tabulate bounds along one axis");
  sw->add_option("--axis", axis, "rf or q")
      ->check(CLI::IsMember({"rf", "q"}))
      ->required();
  sw->add_option("--config", config_path, "JSON config file");
  sw->add_option("--out", out_path, "CSV output path (default stdout)");
  CLI::Option* sw_rf = sw->add_option("--rf", rf, "feedback rate for q sweeps");
  CLI::Option* sw_res =
      sw->add_option("--resolution", resolution, "optimizer grid pitch");

  CLI::App* sim = app.add_subcommand(
      "simulate", "run the two-key protocol and report secrecy estimates");
  sim->add_option("--config", config_path, "JSON config file");
  CLI::Option* sim_sessions =
      sim->add_option("--sessions", sessions, "Monte-Carlo sessions");
  CLI::Option* sim_seed = sim->add_option("--seed", seed, "root seed");
  sim->add_option("--out", out_path, "output directory");
  CLI::Option* sim_tr =
      sim->add_option("--transcripts", transcripts, "transcripts to export");
  CLI::Option* sim_rf = sim->add_option("--rf", rf, "feedback rate");

  CLI::App* ver = app.add_subcommand(
      "verify", "internal consistency suite; exit 0 iff all checks pass");
  ver->add_option("--trials", trials, "fuzz trials per check");
  CLI::Option* ver_seed = ver->add_option("--seed", seed, "fuzz seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(cap)) {
      ExperimentConfig cfg = load_config(config_path);
      if (cap_rf->count()) cfg.rf = rf;
      if (cap_q->count()) cfg.scenario.q = q;
      if (cap_res->count()) cfg.resolution = resolution;
      if (!system_path.empty()) {
        std::ifstream in(system_path);
        if (!in) {
          throw std::invalid_argument("cannot open system file: " + system_path);
        }
        cfg.system = system_from_json(json::parse(in));
      }
      cfg.validate();
      WiretapSystem sys =
          cfg.system ? *cfg.system : make_state_bsc(cfg.scenario, true);
      OptimizeOptions oo;
      oo.resolution = cfg.resolution;
      BoundReport lo = optimize(sys, cfg.rf, Objective::lower, oo);
      BoundReport hi = optimize(sys, cfg.rf, Objective::upper, oo);
      json out;
      out["rf"] = cfg.rf;
      out["lower"] = lo.lower;
      out["upper"] = hi.upper;
      out["bounds"] = bounds_json(lo);
      DegradednessReport deg = check_degraded(sys);
      out["degraded"] = deg.degraded;
      if (deg.degraded) out["capacity"] = lo.lower;
      if (!cfg.system) {
        out["q"] = cfg.scenario.q;
        out["c_ns"] = bsc_nostate_capacity(cfg.scenario, cfg.rf);
        out["c_s"] = bsc_state_capacity(cfg.scenario, cfg.rf);
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (app.got_subcommand(sw)) {
      ExperimentConfig cfg = load_config(config_path);
      if (sw_rf->count()) cfg.rf = rf;
      if (sw_res->count()) cfg.resolution = resolution;
      std::vector<ResultRow> rows = axis == "rf" ? sweep_rf(cfg) : sweep_q(cfg);
      std::string csv = rows_to_csv(rows, cfg, axis);
      if (out_path.empty()) {
        std::cout << csv;
      } else {
        write_text(out_path, csv);
        std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
      }
      return 0;
    }

    if (app.got_subcommand(sim)) {
      ExperimentConfig cfg = load_config(config_path);
      if (sim_sessions->count()) cfg.sessions = sessions;
      if (sim_seed->count()) cfg.seed = seed;
      if (sim_tr->count()) cfg.transcripts = transcripts;
      if (sim_rf->count()) cfg.rf = rf;
      SimulationResult res = simulate(cfg);

      json summary;
      summary["config"] = config_to_json(cfg);
      summary["bounds"] = bounds_json(res.bounds);
      summary["sim_rate"] = res.sim_rate;
      summary["rate_within_upper"] = res.rate_within_upper;
      summary["estimate"] = report_json(res.estimate);
      if (res.exact) summary["exact"] = report_json(*res.exact);
      summary["verdict"] = {{"pass", res.verdict.pass},
                            {"reliability_ok", res.verdict.reliability_ok},
                            {"secrecy_ok", res.verdict.secrecy_ok},
                            {"target_rate", res.verdict.target_rate},
                            {"epsilon", res.verdict.epsilon}};
      if (!res.transcripts.empty()) {
        const SessionTranscript& t = res.transcripts.front();
        summary["codebook"] = {{"j0", t.j0},
                               {"j1", t.j1},
                               {"j2", t.j2},
                               {"m0_space", t.m0_space},
                               {"n", t.n},
                               {"num_blocks", t.num_blocks}};
      }

      if (out_path.empty()) {
        std::cout << summary.dump(2) << "\n";
      } else {
        fs::path dir(out_path);
        fs::create_directories(dir);
        write_text(dir / "results.csv", rows_to_csv({res.row}, cfg, "rf"));
        write_text(dir / "summary.json", summary.dump(2) + "\n");
        for (size_t i = 0; i < res.transcripts.size(); ++i) {
          write_text(dir / ("transcript_" + std::to_string(i) + ".json"),
                     transcript_to_json(res.transcripts[i]).dump(2) + "\n");
        }
        std::cout << "wrote results to " << dir.string() << "\n";
      }
      return 0;
    }

    if (app.got_subcommand(ver)) {
      VerifyOptions opts;
      opts.trials = trials;
      if (ver_seed->count()) opts.seed = seed;
      VerifyReport rep = verify_consistency(opts);
      print_verify(rep, std::cout);
      return rep.all_ok ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
