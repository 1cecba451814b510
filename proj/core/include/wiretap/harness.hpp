#pragma once

#include <functional>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wiretap/capacity.hpp"
#include "wiretap/channels.hpp"
#include "wiretap/codec.hpp"
#include "wiretap/rng.hpp"
#include "wiretap/secrecy.hpp"

namespace wiretap {

// Codec knobs the experiment exposes; rates themselves are derived from the
// optimized bound at rate_fraction of the usable total.
struct CodecParams {
  int n = 12;
  int num_blocks = 5;
  double epsilon = 0.02;
  double rate_fraction = 0.5;
  BinningMode mode = BinningMode::wiretap_binning;
  double case2_split = 0.5;
  DecoderKind decoder = DecoderKind::maximum_likelihood;
  double verdict_epsilon = 0.1;
};

struct ExperimentConfig {
  BscScenario scenario;
  std::optional<WiretapSystem> system;  // explicit system overrides scenario
  std::vector<double> rf_grid;
  std::vector<double> q_grid;
  double rf = 0.1;
  double resolution = 1e-3;
  CodecParams codec;
  int sessions = 1000;
  int transcripts = 8;  // how many to export verbatim
  std::uint64_t seed = 1;
  std::string out;

  ExperimentConfig();
  void validate() const;  // throws std::invalid_argument
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct ResultRow {
  double sweep_value = 0.0;
  std::optional<double> c_ns;
  std::optional<double> c_s;
  std::optional<double> lower;
  std::optional<double> upper;
  std::optional<double> sim_rate;
  std::optional<double> p_e;
  std::optional<double> equivocation;
  std::optional<double> leakage;
};

// CSV with '#'-prefixed metadata echoing the full config; %.17g columns so a
// parse-back is bit identical
std::string rows_to_csv(const std::vector<ResultRow>& rows,
                        const ExperimentConfig& cfg, const std::string& axis);
std::vector<ResultRow> rows_from_csv(const std::string& csv);

std::vector<ResultRow> sweep_rf(const ExperimentConfig& cfg);
std::vector<ResultRow> sweep_q(const ExperimentConfig& cfg);

struct SimulationResult {
  ResultRow row;
  BoundReport bounds;
  CodebookSpec spec;
  std::vector<SessionTranscript> transcripts;  // first `transcripts` sessions
  SecrecyReport estimate;
  std::optional<SecrecyReport> exact;
  AchievabilityVerdict verdict;
  double sim_rate = 0.0;
  bool rate_within_upper = false;
};

SimulationResult simulate(const ExperimentConfig& cfg);

enum class CheckStatus { pass, skip, fail };

struct VerifyCheck {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  std::string detail;
};

struct VerifyOptions {
  int trials = 50;
  std::uint64_t seed = 0x5eed;
  double resolution = 1e-3;
  // injectable for negative-control tests; null uses bsc_state_capacity
  std::function<double(const BscScenario&, double)> state_closed_form;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_ok = false;
};

// one fuzzed or injected system; skips (with reason) when not degraded
VerifyCheck check_corollary_tightness(const WiretapSystem& sys, double rf,
                                      double resolution, double tol = 1e-3);

VerifyReport verify_consistency(const VerifyOptions& opts = {});
void print_verify(const VerifyReport& rep, std::ostream& os);

// fuzz generators shared by the verification suite and the test harness
WiretapSystem random_degraded_system(Rng& rng, int max_alphabet = 3);
WiretapSystem random_general_system(Rng& rng, int max_alphabet = 3);
// spec drawn small enough for exact enumeration on sys
CodebookSpec random_exact_spec(const WiretapSystem& sys, Rng& rng);

}  // namespace wiretap
