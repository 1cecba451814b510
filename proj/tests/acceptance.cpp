// Acceptance suite: one criterion per test case, one PASS/FAIL line each.
// Tolerances and time budgets are pinned here, next to the checks.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "wiretap/harness.hpp"

using namespace wiretap;

namespace {

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, ap);
  va_end(ap);
  return std::string(buf);
}

struct Criterion {
  std::vector<std::string> failures;
  int overflow = 0;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures.size() < 8) {
      failures.push_back(what);
    } else {
      ++overflow;
    }
  }
  void expect_near(const char* label, double got, double want, double tol) {
    if (!(std::abs(got - want) <= tol)) {
      expect(false, fmt("%s: got %.10f, want %.10f (tol %g)", label, got, want, tol));
    }
  }
  void finish(int index, const char* name, double budget_s) {
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!(elapsed < budget_s)) {
      expect(false, fmt("elapsed %.2f s exceeds the %.0f s budget", elapsed, budget_s));
    }
    if (overflow > 0) failures.push_back(fmt("... and %d more failures", overflow));
    std::printf("criterion %d (%s): %s (%.2f s)\n", index, name,
                failures.empty() ? "PASS" : "FAIL", elapsed);
    std::fflush(stdout);
    for (const std::string& f : failures) CHECK_MESSAGE(false, f);
    CHECK(failures.empty());
  }
};

}  // namespace

TEST_CASE("criterion 1 closed-form reproduction") {
  Criterion c;
  BscScenario scn;

  c.expect_near("no-state capacity at rf=0",
                bsc_nostate_capacity(scn, 0.0), 0.21108, 1e-4);
  const double sat = 0.53100;
  c.expect_near("no-state capacity at the saturation threshold",
                bsc_nostate_capacity(scn, 0.31991), sat, 1e-4);
  c.expect_near("no-state capacity stays saturated (rf=0.4)",
                bsc_nostate_capacity(scn, 0.4), sat, 1e-4);
  c.expect_near("no-state capacity stays saturated (rf=1.0)",
                bsc_nostate_capacity(scn, 1.0), sat, 1e-4);
  c.expect(bsc_nostate_capacity(scn, 0.25) < sat - 1e-4,
           "no-state capacity should sit strictly below saturation at rf=0.25");

  for (double rf : {0.0, 0.05, 0.2, 0.7, 1.0}) {
    c.expect_near(fmt("state capacity flat in rf (rf=%.2f)", rf).c_str(),
                  bsc_state_capacity(scn, rf), 0.68126, 1e-4);
  }
  BscScenario rare = scn;
  rare.q = 0.01;
  c.expect_near("state capacity at q=0.01, rf=0",
                bsc_state_capacity(rare, 0.0), 0.37716, 1e-4);

  c.finish(1, "closed-form reproduction", 1.0);
}

TEST_CASE("criterion 2 corollary matches closed forms on the grid") {
  Criterion c;
  OptimizeOptions opts;  // resolution 1e-3
  const double tol = 2.0 * opts.resolution + 1e-6;

  for (int i = 0; i < 50; ++i) {
    double q = 0.005 + (0.495 * i) / 49.0;
    BscScenario scn;
    scn.q = q;
    WiretapSystem sys = make_state_bsc(scn, true);
    for (int j = 0; j < 20; ++j) {
      double rf = 0.05 * j;
      double got = corollary_capacity(sys, rf, opts);
      double want = bsc_state_capacity(scn, rf);
      if (std::abs(got - want) > tol) {
        c.expect(false, fmt("state system q=%.3f rf=%.2f: got %.7f, want %.7f",
                            q, rf, got, want));
      }
    }
  }
  BscScenario scn;
  WiretapSystem flat = make_state_bsc(scn, false);
  for (int j = 0; j < 20; ++j) {
    double rf = 0.05 * j;
    double got = corollary_capacity(flat, rf, opts);
    double want = bsc_nostate_capacity(scn, rf);
    if (std::abs(got - want) > tol) {
      c.expect(false, fmt("no-state system rf=%.2f: got %.7f, want %.7f",
                          rf, got, want));
    }
  }

  c.finish(2, "corollary vs closed forms", 30.0);
}

TEST_CASE("criterion 3 lower meets upper on degraded fuzz systems") {
  Criterion c;
  Rng rng(99);
  for (int t = 0; t < 200; ++t) {
    WiretapSystem sys = random_degraded_system(rng);
    double rf = 0.5 * rng.uniform01();
    BoundReport lo = optimize(sys, rf, Objective::lower);
    BoundReport hi = optimize(sys, rf, Objective::upper);
    double gap = std::abs(lo.lower - hi.upper);
    if (gap > 1e-3) {
      c.expect(false, fmt("trial %d: |lower - upper| = %.3e (rf=%.4f, "
                          "lower=%.7f, upper=%.7f)",
                          t, gap, rf, lo.lower, hi.upper));
    }
  }
  c.finish(3, "degraded tightness fuzz", 300.0);
}

TEST_CASE("criterion 4 feedback-key leakage vanishes and degradation helps") {
  Criterion c;

  // fuzz: the one-time-padded summand is exactly zero on every enumerable spec
  Rng rng(2718);
  int accepted = 0, with_feedback_key = 0;
  for (long attempt = 0; accepted < 100 && attempt < 1500; ++attempt) {
    WiretapSystem sys = (attempt % 2 == 0) ? random_degraded_system(rng)
                                           : random_general_system(rng);
    try {
      CodebookSpec spec = random_exact_spec(sys, rng);
      Rng crng = rng.split(static_cast<std::uint64_t>(5000 + attempt));
      Codebook cb = build_codebook(sys, spec, crng);
      SecrecyReport rep = exact_leakage(sys, cb);
      ++accepted;
      if (cb.j2 > 1) ++with_feedback_key;
      if (std::abs(rep.summand2) > 1e-10) {
        c.expect(false, fmt("spec %d: feedback-key summand %.3e (j2=%lld)",
                            accepted, rep.summand2, cb.j2));
      }
    } catch (const InfeasibleSpec&) {
      continue;
    }
  }
  c.expect(accepted == 100, fmt("only %d of 100 fuzzed specs were enumerable", accepted));
  c.expect(with_feedback_key >= 30,
           fmt("only %d specs exercised a nontrivial feedback key", with_feedback_key));

  // fixed protocol, progressively noisier eavesdropper: leakage can only drop
  CodebookSpec spec;
  spec.n = 5;
  spec.num_blocks = 2;
  spec.rate0 = spec.rate1 = spec.rate2 = 1.1 / 5.0;  // two bins per level
  spec.epsilon = 0.05;
  spec.aux = AuxPolicy::identity(Pmf::uniform(2), 2);
  spec.seed = 424242;
  std::vector<int> first_sequences;
  std::vector<long long> first_bins;
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 10; ++i) {
    BscScenario scn;
    scn.p_z = 0.05 * i;
    WiretapSystem sys = make_state_bsc(scn, true);
    Rng crng(777);
    Codebook cb = build_codebook(sys, spec, crng);
    if (i == 0) {
      first_sequences = cb.sequences;
      first_bins = cb.state_bins;
    } else if (cb.sequences != first_sequences || cb.state_bins != first_bins) {
      c.expect(false, fmt("codebook drifted at p_z=%.2f; comparison is void", scn.p_z));
      break;
    }
    SecrecyReport rep = exact_leakage(sys, cb);
    c.expect(std::abs(rep.summand2) <= 1e-10,
             fmt("family p_z=%.2f: feedback-key summand %.3e", scn.p_z, rep.summand2));
    if (rep.total_leakage > prev + 1e-10) {
      c.expect(false, fmt("leakage rose from %.12f to %.12f at p_z=%.2f",
                          prev, rep.total_leakage, scn.p_z));
    }
    prev = rep.total_leakage;
  }

  c.finish(4, "feedback-key secrecy", 600.0);
}

TEST_CASE("criterion 5 rate back-off improves reliability") {
  Criterion c;
  ExperimentConfig cfg;
  cfg.rf = 0.1;
  cfg.codec.n = 12;
  cfg.codec.num_blocks = 5;
  cfg.codec.epsilon = 0.02;
  cfg.sessions = 10000;
  cfg.transcripts = 2;
  cfg.seed = 7;

  cfg.codec.rate_fraction = 0.5;
  SimulationResult half = simulate(cfg);
  cfg.codec.rate_fraction = 0.9;
  SimulationResult ninety = simulate(cfg);

  double p1 = half.estimate.block_error_rate;
  double p2 = ninety.estimate.block_error_rate;
  c.expect(std::isfinite(p1) && p1 >= 0.0 && p1 <= 1.0,
           fmt("half-rate error rate %.6f is not a probability", p1));
  c.expect(std::isfinite(p2) && p2 >= 0.0 && p2 <= 1.0,
           fmt("high-rate error rate %.6f is not a probability", p2));
  c.expect(half.rate_within_upper, "half-rate simulated rate escaped the upper bound");
  c.expect(ninety.rate_within_upper, "high-rate simulated rate escaped the upper bound");
  c.expect(half.sim_rate < ninety.sim_rate, "rate knob did not move the message rate");
  c.expect(p1 < p2, fmt("back-off did not help: %.5f vs %.5f", p1, p2));

  double blocks = static_cast<double>(cfg.sessions) * cfg.codec.num_blocks;
  double pooled = (p1 * blocks + p2 * blocks) / (2.0 * blocks);
  double se = std::sqrt(pooled * (1.0 - pooled) * (2.0 / blocks));
  c.expect(se > 0.0, "degenerate error counts; z statistic undefined");
  if (se > 0.0) {
    double z = (p2 - p1) / se;
    c.expect(z >= 2.326, fmt("one-sided z = %.3f below the 2.326 cutoff "
                             "(p1=%.5f, p2=%.5f)", z, p1, p2));
  }

  c.finish(5, "reliability back-off", 600.0);
}

TEST_CASE("criterion 6 structural identities and end-to-end verify") {
  Criterion c;

  Rng rng(4242);
  IdentityCheckReport idr = identity_check_decoder_only_csi(100, rng);
  c.expect(idr.trials == 100 && idr.violations == 0,
           fmt("%d of %d identity trials violated the two-route equality",
               idr.violations, idr.trials));
  c.expect(idr.max_deviation <= 1e-10,
           fmt("identity deviation %.3e above 1e-10", idr.max_deviation));

  BscScenario scn;
  WiretapSystem paper = make_state_bsc(scn, true);
  WiretapSystem flat = make_state_bsc(scn, false);
  OptimizeOptions opts;
  const double closed_tol = 2.0 * opts.resolution + 1e-6;

  double fb = special_case(flat, 0.1, SpecialCase::feedback_only, opts);
  c.expect_near("feedback-only vs optimized upper",
                fb, optimize(flat, 0.1, Objective::upper, opts).upper, 1e-9);
  c.expect_near("feedback-only vs closed form",
                fb, bsc_nostate_capacity(scn, 0.1), closed_tol);
  c.expect_near("no-feedback reduction vs optimized lower at rf=0",
                special_case(paper, 0.0, SpecialCase::no_feedback, opts),
                optimize(paper, 0.0, Objective::lower, opts).lower, 1e-9);
  c.expect_near("rf=0 degeneration: feedback-only equals no-feedback",
                special_case(flat, 0.0, SpecialCase::feedback_only, opts),
                special_case(flat, 0.0, SpecialCase::no_feedback, opts), 1e-9);
  for (double rf : {0.0, 0.2, 0.5}) {
    BscScenario degenerate = scn;
    degenerate.p_s0 = degenerate.p_s1 = scn.p_y;
    degenerate.q = 0.0;
    c.expect_near(fmt("|S|=1 degeneration at rf=%.1f", rf).c_str(),
                  bsc_state_capacity(degenerate, rf),
                  bsc_nostate_capacity(scn, rf), 1e-9);
  }

  std::string cmd = std::string(WIRETAP_LAB_BIN_PATH) +
                    " verify --trials 40 --seed 5 > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  c.expect(rc == 0, fmt("`wiretap-lab verify` exited with status %d", rc));

  c.finish(6, "identities and verify", 600.0);
}
