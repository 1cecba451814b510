#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "wiretap/errors.hpp"
#include "wiretap/parallel.hpp"
#include "wiretap/secrecy.hpp"

using namespace wiretap;

namespace {

WiretapSystem paper_system() { return make_state_bsc(BscScenario{}, true); }

CodebookSpec tiny_spec(int n, int B, long long j0, long long j1, long long j2,
                       std::uint64_t seed) {
  CodebookSpec spec;
  spec.n = n;
  spec.num_blocks = B;
  spec.rate0 = j0 > 1 ? (std::log2(double(j0)) + 0.1) / n : 0.0;
  spec.rate1 = j1 > 1 ? (std::log2(double(j1)) + 0.1) / n : 0.0;
  spec.rate2 = j2 > 1 ? (std::log2(double(j2)) + 0.1) / n : 0.0;
  spec.epsilon = 0.02;
  spec.aux = AuxPolicy::identity(Pmf::uniform(2), 2);
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("one-time pad leaks nothing under a uniform key") {
  OtpCheckReport rep = otp_unit_check();
  CHECK(rep.pass);
  CHECK(rep.alphabets_checked == 8);
  CHECK(rep.max_uniform_leakage <= 1e-12);
  CHECK(rep.biased_control_leakage > 1e-3);

  CHECK(std::abs(otp_leakage(Pmf({0.7, 0.2, 0.1}), Pmf::uniform(3))) <= 1e-13);
  CHECK_THROWS_AS(otp_leakage(Pmf::uniform(3), Pmf::uniform(4)),
                  std::invalid_argument);
}

TEST_CASE("exact leakage on a small protocol instance") {
  WiretapSystem sys = paper_system();
  CodebookSpec spec = tiny_spec(5, 2, 2, 2, 2, 101);
  Rng rng(101);
  Codebook cb = build_codebook(sys, spec, rng);
  SecrecyReport rep = exact_leakage(sys, cb);

  CHECK(rep.method == SecrecyMethod::exact);
  // the fresh uniform feedback key acts as a one-time pad on m2
  CHECK(rep.summand2 <= 1e-10);
  CHECK(rep.summand2 >= -1e-12);
  CHECK(rep.chain_residual <= 1e-10);
  CHECK(rep.total_leakage >= -1e-12);
  CHECK(rep.message_entropy == doctest::Approx(3.0).epsilon(1e-9));  // 8 msgs
  CHECK(rep.equivocation_ratio >= 0.0);
  CHECK(rep.equivocation_ratio <= 1.0 + 1e-12);
  // d and the leakage are two readings of the same joint law
  double d_from_leak = 1.0 - rep.total_leakage / rep.message_entropy;
  CHECK(rep.equivocation_ratio == doctest::Approx(d_from_leak).epsilon(1e-10));
  CHECK(rep.leakage_per_use ==
        doctest::Approx(rep.total_leakage / 10.0).epsilon(1e-12));
  CHECK(rep.p_e_exact);
  CHECK(rep.p_e >= 0.0);
  CHECK(rep.p_e <= 1.0);
}

TEST_CASE("feedback-key summand vanishes whenever the key is drawn fresh") {
  WiretapSystem sys = paper_system();
  for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
    CodebookSpec spec = tiny_spec(4, 3, 1, 2, 2, seed);
    Rng rng(seed);
    Codebook cb = build_codebook(sys, spec, rng);
    SecrecyReport rep = exact_leakage(sys, cb);
    CHECK(std::abs(rep.summand2) <= 1e-10);
  }
}

TEST_CASE("exact reliability improves with a cleaner main channel") {
  BscScenario noisy;
  noisy.p_y = 0.2;
  BscScenario clean;
  clean.p_y = 0.01;
  CodebookSpec spec;
  spec.n = 6;
  spec.num_blocks = 2;
  spec.rate1 = (std::log2(2.0) + 0.1) / 6;
  spec.epsilon = 0.02;
  spec.aux = AuxPolicy::identity(Pmf::uniform(2), 1);
  spec.seed = 40;

  // same codeword set evaluated through both channels: the extra crossover
  // noise can only hurt the decoder
  WiretapSystem clean_sys = make_state_bsc(clean, false);
  WiretapSystem noisy_sys = make_state_bsc(noisy, false);
  Rng r1(40);
  Codebook cb = build_codebook(clean_sys, spec, r1);
  ReliabilityReport a =
      exact_reliability(clean_sys, cb, DecoderKind::maximum_likelihood);
  ReliabilityReport b =
      exact_reliability(noisy_sys, cb, DecoderKind::maximum_likelihood);
  CHECK(a.block_error >= 0.0);
  CHECK(a.block_error < b.block_error);
  CHECK(a.session_error ==
        doctest::Approx(1.0 - std::pow(1.0 - a.block_error, 2)).epsilon(1e-12));
  CHECK(a.protected_error ==
        doctest::Approx(a.block_error).epsilon(1e-12));  // B-1 = 1
}

TEST_CASE("monte-carlo estimate tracks the exact oracle") {
  WiretapSystem sys = paper_system();
  CodebookSpec spec = tiny_spec(4, 2, 1, 2, 2, 33);
  Rng rng(33);
  Codebook cb = build_codebook(sys, spec, rng);
  SecrecyReport exact = exact_leakage(sys, cb);

  int sessions = 20000;
  std::vector<SessionTranscript> ts(static_cast<size_t>(sessions));
  Rng root(90);
  parallel_for(sessions, [&](int i) {
    Rng r = root.split(static_cast<std::uint64_t>(i));
    ts[static_cast<size_t>(i)] = run_session(sys, cb, r);
  });
  SecrecyReport est = estimate_secrecy(ts);

  CHECK(est.method == SecrecyMethod::plug_in_mc);
  CHECK(est.sample_count == sessions);
  CHECK(est.statistic == "full_sequence");  // 2^8 outcomes fit easily
  CHECK(est.message_entropy == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(est.total_leakage - exact.total_leakage) < 0.1);
  CHECK(std::abs(est.equivocation_ratio - exact.equivocation_ratio) < 0.1);
  CHECK(est.equivocation_ratio_mm >= est.equivocation_ratio - 1e-9);
}

TEST_CASE("estimator statistic selection and validation") {
  WiretapSystem sys = paper_system();
  CodebookSpec spec = tiny_spec(4, 2, 1, 2, 1, 51);
  Rng rng(51);
  Codebook cb = build_codebook(sys, spec, rng);
  std::vector<SessionTranscript> ts;
  Rng root(52);
  for (int i = 0; i < 40; ++i) {
    Rng r = root.split(static_cast<std::uint64_t>(i));
    ts.push_back(run_session(sys, cb, r));
  }

  EstimatorConfig coarse;
  coarse.max_outcomes = 2;
  SecrecyReport rep = estimate_secrecy(ts, coarse);
  CHECK(rep.statistic == "total_counts");
  CHECK(rep.under_sampled);  // 40 sessions cannot cover the joint space

  EstimatorConfig med;
  med.max_outcomes = 2000;  // 9^2 block-count outcomes fit, 2^8 sequences do too
  med.statistic = ZStatistic::per_block_counts;
  CHECK(estimate_secrecy(ts, med).statistic == "per_block_counts");

  CHECK_THROWS_AS(estimate_secrecy(std::vector<SessionTranscript>{}),
                  std::invalid_argument);

  std::vector<SessionTranscript> bad = ts;
  bad.back().j1 = 999;
  CHECK_THROWS_AS(estimate_secrecy(bad), std::invalid_argument);
}

TEST_CASE("oversized enumerations are refused") {
  WiretapSystem sys = paper_system();
  CodebookSpec spec = tiny_spec(12, 5, 2, 4, 1, 61);
  Rng rng(61);
  Codebook cb = build_codebook(sys, spec, rng);
  CHECK_THROWS_AS(exact_leakage(sys, cb), TooLargeForExact);
  CHECK_THROWS_AS(exact_reliability(sys, cb, DecoderKind::maximum_likelihood),
                  TooLargeForExact);
}

TEST_CASE("achievability verdict combines both conditions") {
  SecrecyReport rep;
  rep.p_e = 0.05;
  rep.equivocation_ratio = 0.95;
  AchievabilityVerdict v = achievability_verdict(rep, 0.3, 0.1);
  CHECK(v.pass);
  CHECK(v.reliability_ok);
  CHECK(v.secrecy_ok);
  CHECK(v.target_rate == 0.3);

  rep.p_e = 0.2;
  CHECK_FALSE(achievability_verdict(rep, 0.3, 0.1).pass);

  rep.p_e = std::numeric_limits<double>::quiet_NaN();
  AchievabilityVerdict nan_v = achievability_verdict(rep, 0.3, 0.1);
  CHECK_FALSE(nan_v.reliability_ok);

  rep.p_e = 0.01;
  rep.equivocation_ratio = 0.5;
  AchievabilityVerdict leaky = achievability_verdict(rep, 0.3, 0.1);
  CHECK_FALSE(leaky.pass);
  CHECK(leaky.reliability_ok);
  CHECK_FALSE(leaky.secrecy_ok);
}
