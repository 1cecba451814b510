#pragma once

#include <span>
#include <string>

#include "wiretap/codec.hpp"

namespace wiretap {

// Weighted-outcome cap for exact enumeration.
inline constexpr double kExactOutcomeCap = 67108864.0;  // 2^26

enum class SecrecyMethod { exact, plug_in_mc };

struct SecrecyReport {
  // reliability over the protected blocks (session level); NaN when the
  // exact path could not afford the reliability enumeration
  double p_e = 0.0;
  double block_error_rate = 0.0;  // per-block, all blocks including the first
  double equivocation_ratio = 1.0;   // d = H(M | Z)/H(M)
  double leakage_per_use = 0.0;      // I(M ; Z-blocks) / (nB)
  SecrecyMethod method = SecrecyMethod::exact;
  long long sample_count = 0;

  double message_entropy = 0.0;  // H(M) in bits; log2|M| (messages uniform)
  double total_leakage = 0.0;    // I(M ; Z-blocks) in bits
  double summand1 = 0.0;         // I(M0, M1 ; Z-blocks)
  double summand2 = 0.0;         // I(M2 ; Z-blocks | M0, M1)
  double chain_residual = 0.0;   // |total - summand1 - summand2|
  bool p_e_exact = false;
  bool under_sampled = false;             // estimator only
  double equivocation_ratio_mm = 0.0;     // Miller-Madow note, never applied
  std::string statistic;                  // estimator's z-statistic
};

// Exact I(M ; Z-blocks) over the full protocol ensemble (messages, keys,
// in-bin codeword choice, states, eavesdropper noise), message = all
// protected-block messages.  Throws TooLargeForExact over the 2^26 cap.
SecrecyReport exact_leakage(const WiretapSystem& sys, const Codebook& cb);

struct ReliabilityReport {
  double block_error = 0.0;      // one block, uniform address
  double session_error = 0.0;    // any of the B blocks wrong
  double protected_error = 0.0;  // any of the B-1 protected blocks wrong
};

// Exact block-error probability by enumerating states, codewords and main
// channel outcomes; blocks are independent so session figures are closed-form.
ReliabilityReport exact_reliability(const WiretapSystem& sys,
                                    const Codebook& cb, DecoderKind decoder);

// I(M ; M + K mod |M|) for independent M, K on a shared alphabet.
double otp_leakage(const Pmf& message, const Pmf& key);

struct OtpCheckReport {
  int alphabets_checked = 0;
  double max_uniform_leakage = 0.0;    // over all sizes and message laws
  double biased_control_leakage = 0.0; // skewed key must leak
  bool pass = false;
};

// Uniform keys leak nothing at any alphabet size up to 64; a biased key is
// the positive control.
OtpCheckReport otp_unit_check();

enum class ZStatistic { auto_select, full_sequence, per_block_counts, total_counts };

struct EstimatorConfig {
  ZStatistic statistic = ZStatistic::auto_select;
  long long max_outcomes = 4096;  // auto: finest statistic fitting this
};

// Plug-in estimate over session transcripts: d from the empirical joint of
// (message, z-statistic), reliability from the decode records.
SecrecyReport estimate_secrecy(std::span<const SessionTranscript> transcripts,
                               const EstimatorConfig& cfg = {});

struct AchievabilityVerdict {
  bool pass = false;
  bool reliability_ok = false;
  bool secrecy_ok = false;
  double target_rate = 0.0;
  double epsilon = 0.0;
};

// Pass iff d >= 1 - epsilon and P_e <= epsilon.
AchievabilityVerdict achievability_verdict(const SecrecyReport& report,
                                           double target_rate, double epsilon);

}  // namespace wiretap
