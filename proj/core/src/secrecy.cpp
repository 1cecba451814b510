#include "wiretap/secrecy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "wiretap/parallel.hpp"
#include "wiretap/prob.hpp"

namespace wiretap {
namespace {

// p(z | u', s) marginalized over the transmitted letter
std::vector<double> effective_eve_rows(const WiretapSystem& sys,
                                       const AuxPolicy& aux) {
  int ns = sys.num_states();
  int nx = sys.num_inputs();
  int nz = sys.num_eve_outputs();
  int na = aux.aux_size();
  std::vector<double> rows(static_cast<size_t>(na) * ns * nz, 0.0);
  for (int a = 0; a < na; ++a) {
    for (int s = 0; s < ns; ++s) {
      int u = aux.map_at(a, s);
      double* row = rows.data() + (static_cast<size_t>(a) * ns + s) * nz;
      for (int x = 0; x < nx; ++x) {
        double px = aux.x_given_us.at(u * ns + s, x);
        if (px == 0.0) continue;
        for (int z = 0; z < nz; ++z) row[z] += px * sys.p_z(z, x, s);
      }
    }
  }
  return rows;
}

std::vector<double> effective_main_rows(const WiretapSystem& sys,
                                        const AuxPolicy& aux) {
  int ns = sys.num_states();
  int nx = sys.num_inputs();
  int ny = sys.num_main_outputs();
  int na = aux.aux_size();
  std::vector<double> rows(static_cast<size_t>(na) * ns * ny, 0.0);
  for (int a = 0; a < na; ++a) {
    for (int s = 0; s < ns; ++s) {
      int u = aux.map_at(a, s);
      double* row = rows.data() + (static_cast<size_t>(a) * ns + s) * ny;
      for (int x = 0; x < nx; ++x) {
        double px = aux.x_given_us.at(u * ns + s, x);
        if (px == 0.0) continue;
        for (int y = 0; y < ny; ++y) row[y] += px * sys.p_y(y, x, s);
      }
    }
  }
  return rows;
}

void unrank(long long r, int alphabet, std::span<int> out) {
  for (int i = static_cast<int>(out.size()) - 1; i >= 0; --i) {
    out[static_cast<size_t>(i)] = static_cast<int>(r % alphabet);
    r /= alphabet;
  }
}

double ipow(double base, int exp) {
  double v = 1.0;
  for (int i = 0; i < exp; ++i) v *= base;
  return v;
}

double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

struct PlugInEntropy {
  double value = 0.0;
  long long support = 0;
};

PlugInEntropy plug_in(const std::map<std::vector<long long>, long long>& counts,
                      long long total) {
  PlugInEntropy h;
  for (const auto& [key, c] : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / static_cast<double>(total);
    h.value -= p * std::log2(p);
    ++h.support;
  }
  return h;
}

double miller_madow(const PlugInEntropy& h, long long total) {
  return h.value + static_cast<double>(h.support - 1) /
                       (2.0 * static_cast<double>(total) * std::log(2.0));
}

}  // namespace

SecrecyReport exact_leakage(const WiretapSystem& sys, const Codebook& cb) {
  int n = cb.spec.n;
  int B = cb.spec.num_blocks;
  if (B < 2) throw InfeasibleSpec("exact_leakage: no protected blocks");
  int ns = sys.num_states();
  int nz = sys.num_eve_outputs();
  long long K = cb.key_space;
  long long j2 = cb.j2;
  long long j1 = cb.j1;
  long long m0s = cb.m0_space();
  long long bins = cb.bin_product();
  long long mpb = cb.messages_per_block();

  double zn_d = ipow(nz, n);
  double sn_d = ipow(ns, n);
  double m_total_d = ipow(static_cast<double>(mpb), B - 1);
  double m01_d = ipow(static_cast<double>(m0s * j1), B - 1);
  double m2_d = ipow(static_cast<double>(j2), B - 1);
  double zall_d = ipow(nz, n * B);

  double weighted = m_total_d * static_cast<double>(K) *
                    static_cast<double>(j2) * static_cast<double>(cb.bin_size) *
                    sn_d * zn_d;
  double table_cells = m01_d * m2_d * zall_d;
  double fill_work = static_cast<double>(cb.used_words) * sn_d * zn_d;
  double dp_work = m_total_d * 2.0 * static_cast<double>(K) *
                   static_cast<double>(K) * static_cast<double>(j2) * zall_d;
  if (weighted > kExactOutcomeCap || table_cells > kExactOutcomeCap ||
      fill_work > 2.0 * kExactOutcomeCap || dp_work > 4.0 * kExactOutcomeCap) {
    throw TooLargeForExact("exact_leakage: enumeration exceeds the 2^26 cap");
  }

  long long zn = static_cast<long long>(zn_d + 0.5);
  long long sn = static_cast<long long>(sn_d + 0.5);
  long long m_total = static_cast<long long>(m_total_d + 0.5);
  long long m01_space = static_cast<long long>(m01_d + 0.5);
  long long m2_space = static_cast<long long>(m2_d + 0.5);
  long long zall = static_cast<long long>(zall_d + 0.5);

  std::vector<double> zrows = effective_eve_rows(sys, cb.spec.aux);

  // E[bin][next key][z-vector]: joint law of the state-derived key and the
  // eavesdropper block given the addressed bin (codeword uniform in the bin)
  std::vector<double> E(static_cast<size_t>(bins) * K * zn, 0.0);
  {
    std::vector<int> s_seq(static_cast<size_t>(n));
    std::vector<double> zdist(static_cast<size_t>(zn));
    std::vector<double> tmp(static_cast<size_t>(zn));
    for (long long w = 0; w < cb.used_words; ++w) {
      long long bin = w / cb.bin_size;
      for (long long sr = 0; sr < sn; ++sr) {
        unrank(sr, ns, s_seq);
        double ps = 1.0;
        for (int i = 0; i < n; ++i) ps *= sys.state_law()[s_seq[static_cast<size_t>(i)]];
        if (ps == 0.0) continue;
        long long key = cb.state_bins[static_cast<size_t>(sr)];
        long long len = 1;
        zdist[0] = 1.0;
        for (int i = 0; i < n; ++i) {
          const double* row =
              zrows.data() +
              (static_cast<size_t>(cb.symbol(w, i)) * ns + s_seq[static_cast<size_t>(i)]) * nz;
          for (long long t = 0; t < len; ++t) {
            for (int z = 0; z < nz; ++z) {
              tmp[static_cast<size_t>(t * nz + z)] = zdist[static_cast<size_t>(t)] * row[z];
            }
          }
          len *= nz;
          std::swap(zdist, tmp);
        }
        double base = ps / static_cast<double>(cb.bin_size);
        double* slice = E.data() + (static_cast<size_t>(bin) * K + key) * zn;
        for (long long zr = 0; zr < zn; ++zr) {
          slice[zr] += base * zdist[static_cast<size_t>(zr)];
        }
      }
    }
  }

  std::vector<double> E_any(static_cast<size_t>(bins) * zn, 0.0);
  for (long long b = 0; b < bins; ++b) {
    for (long long k = 0; k < K; ++k) {
      const double* src = E.data() + (static_cast<size_t>(b) * K + k) * zn;
      double* dst = E_any.data() + static_cast<size_t>(b) * zn;
      for (long long zr = 0; zr < zn; ++zr) dst[zr] += src[zr];
    }
  }

  auto flat_address = [&](const Message& m, const BlockKeys& keys) {
    Address a = address_for(cb, m, keys);
    return (a.a0 * cb.j1 + a.a1) * cb.j2 + a.a2;
  };
  auto digit_message = [&](long long digit) {
    Message m;
    m.m0 = digit / (j1 * j2);
    m.m1 = (digit / j2) % j1;
    m.m2 = digit % j2;
    return m;
  };

  // block 1: uniform unprotected message, zero keys
  std::vector<double> F(static_cast<size_t>(K) * zn, 0.0);
  for (long long d = 0; d < mpb; ++d) {
    long long bin = flat_address(digit_message(d), BlockKeys{0, 0});
    const double* src = E.data() + static_cast<size_t>(bin) * K * zn;
    for (long long k = 0; k < K; ++k) {
      for (long long zr = 0; zr < zn; ++zr) {
        F[static_cast<size_t>(k * zn + zr)] +=
            src[k * zn + zr] / static_cast<double>(mpb);
      }
    }
  }

  double p_m = 1.0 / m_total_d;
  std::vector<double> table(static_cast<size_t>(m01_space) * m2_space * zall, 0.0);

  parallel_for(static_cast<int>(m_total), [&](int mt_i) {
    long long mt = mt_i;
    std::vector<long long> digits(static_cast<size_t>(B - 1));
    for (int b = B - 2; b >= 0; --b) {
      digits[static_cast<size_t>(b)] = mt % mpb;
      mt /= mpb;
    }
    long long m01_idx = 0, m2_idx = 0;
    for (int b = 0; b < B - 1; ++b) {
      Message m = digit_message(digits[static_cast<size_t>(b)]);
      m01_idx = m01_idx * (m0s * j1) + (m.m0 * j1 + m.m1);
      m2_idx = m2_idx * j2 + m.m2;
    }

    std::vector<double> cur(F);
    std::vector<double> nxt;
    std::vector<double> mix(static_cast<size_t>(K) * zn);
    long long len = zn;
    for (int b = 2; b < B; ++b) {
      Message msg = digit_message(digits[static_cast<size_t>(b - 2)]);
      nxt.assign(static_cast<size_t>(K) * len * zn, 0.0);
      for (long long kp = 0; kp < K; ++kp) {
        std::fill(mix.begin(), mix.end(), 0.0);
        for (long long kf = 0; kf < j2; ++kf) {
          long long bin = flat_address(msg, BlockKeys{kp, kf});
          const double* src = E.data() + static_cast<size_t>(bin) * K * zn;
          for (long long i = 0; i < K * zn; ++i) {
            mix[static_cast<size_t>(i)] += src[i] / static_cast<double>(j2);
          }
        }
        const double* crow = cur.data() + static_cast<size_t>(kp) * len;
        for (long long kn = 0; kn < K; ++kn) {
          const double* mrow = mix.data() + static_cast<size_t>(kn) * zn;
          double* orow = nxt.data() + static_cast<size_t>(kn) * len * zn;
          for (long long zp = 0; zp < len; ++zp) {
            double c = crow[zp];
            if (c == 0.0) continue;
            double* o = orow + zp * zn;
            for (long long z = 0; z < zn; ++z) o[z] += c * mrow[z];
          }
        }
      }
      std::swap(cur, nxt);
      len *= zn;
    }

    // last block folds the outgoing key away
    Message msg = digit_message(digits[static_cast<size_t>(B - 2)]);
    std::vector<double> out(static_cast<size_t>(len) * zn, 0.0);
    std::vector<double> mix_any(static_cast<size_t>(zn));
    for (long long kp = 0; kp < K; ++kp) {
      std::fill(mix_any.begin(), mix_any.end(), 0.0);
      for (long long kf = 0; kf < j2; ++kf) {
        long long bin = flat_address(msg, BlockKeys{kp, kf});
        const double* src = E_any.data() + static_cast<size_t>(bin) * zn;
        for (long long z = 0; z < zn; ++z) {
          mix_any[static_cast<size_t>(z)] += src[z] / static_cast<double>(j2);
        }
      }
      const double* crow = cur.data() + static_cast<size_t>(kp) * len;
      for (long long zp = 0; zp < len; ++zp) {
        double c = crow[zp];
        if (c == 0.0) continue;
        double* o = out.data() + static_cast<size_t>(zp) * zn;
        for (long long z = 0; z < zn; ++z) {
          o[z] += c * mix_any[static_cast<size_t>(z)];
        }
      }
    }

    double* row = table.data() + (static_cast<size_t>(m01_idx) * m2_space + m2_idx) * zall;
    for (long long zr = 0; zr < zall; ++zr) row[zr] = p_m * out[static_cast<size_t>(zr)];
  });

  JointPmf joint({static_cast<int>(m01_space), static_cast<int>(m2_space),
                  static_cast<int>(zall)},
                 std::move(table), {"M01", "M2", "Z"});

  SecrecyReport r;
  r.method = SecrecyMethod::exact;
  r.message_entropy = entropy(joint, {0, 1});
  r.total_leakage = mutual_information(joint, {0, 1}, {2});
  r.summand1 = mutual_information(joint, {0}, {2});
  r.summand2 = mutual_information(joint, {1}, {2}, {0});
  r.chain_residual = std::abs(r.total_leakage - r.summand1 - r.summand2);
  r.leakage_per_use = r.total_leakage / (static_cast<double>(n) * B);
  if (r.message_entropy > kZeroProbEps) {
    r.equivocation_ratio =
        conditional_entropy(joint, {0, 1}, {2}) / r.message_entropy;
  } else {
    r.equivocation_ratio = 1.0;
  }

  double rel_work = sn_d * ipow(sys.num_main_outputs(), n) *
                    static_cast<double>(cb.used_words) * n;
  if (rel_work <= 2.0 * kExactOutcomeCap) {
    ReliabilityReport rel = exact_reliability(sys, cb, cb.spec.decoder);
    r.p_e = rel.protected_error;
    r.block_error_rate = rel.block_error;
    r.p_e_exact = true;
  } else {
    r.p_e = std::numeric_limits<double>::quiet_NaN();
    r.block_error_rate = std::numeric_limits<double>::quiet_NaN();
    r.p_e_exact = false;
  }
  return r;
}

ReliabilityReport exact_reliability(const WiretapSystem& sys,
                                    const Codebook& cb, DecoderKind decoder) {
  int n = cb.spec.n;
  int B = cb.spec.num_blocks;
  int ns = sys.num_states();
  int ny = sys.num_main_outputs();
  double sn_d = ipow(ns, n);
  double yn_d = ipow(ny, n);
  double work = sn_d * yn_d * static_cast<double>(cb.used_words) * n;
  if (work > 2.0 * kExactOutcomeCap) {
    throw TooLargeForExact("exact_reliability: enumeration exceeds the cap");
  }
  long long sn = static_cast<long long>(sn_d + 0.5);
  long long yn = static_cast<long long>(yn_d + 0.5);

  std::vector<double> rows = effective_main_rows(sys, cb.spec.aux);
  std::vector<int> s_seq(static_cast<size_t>(n)), y_seq(static_cast<size_t>(n));
  BlockKeys zero{0, 0};
  double pe = 0.0;
  for (long long sr = 0; sr < sn; ++sr) {
    unrank(sr, ns, s_seq);
    double ps = 1.0;
    for (int i = 0; i < n; ++i) ps *= sys.state_law()[s_seq[static_cast<size_t>(i)]];
    if (ps == 0.0) continue;
    for (long long yr = 0; yr < yn; ++yr) {
      unrank(yr, ny, y_seq);
      DecodeOutcome dec = try_decode_block(sys, cb, y_seq, s_seq, zero, decoder);
      double err_mass = 0.0;
      for (long long w = 0; w < cb.used_words; ++w) {
        bool correct = !dec.failed && cb.word_address(w) == dec.address;
        if (correct) continue;
        double p = 1.0;
        for (int i = 0; i < n; ++i) {
          p *= rows[(static_cast<size_t>(cb.symbol(w, i)) * ns +
                     s_seq[static_cast<size_t>(i)]) *
                        ny +
                    y_seq[static_cast<size_t>(i)]];
        }
        err_mass += p;
      }
      pe += ps * err_mass / static_cast<double>(cb.used_words);
    }
  }

  ReliabilityReport rep;
  rep.block_error = pe;
  rep.session_error = 1.0 - std::pow(1.0 - pe, B);
  rep.protected_error = 1.0 - std::pow(1.0 - pe, B - 1);
  return rep;
}

double otp_leakage(const Pmf& message, const Pmf& key) {
  int n = message.size();
  if (key.size() != n) {
    throw std::invalid_argument("otp_leakage: alphabet sizes differ");
  }
  std::vector<double> table(static_cast<size_t>(n) * n);
  for (int m = 0; m < n; ++m) {
    for (int c = 0; c < n; ++c) {
      table[static_cast<size_t>(m) * n + c] = message[m] * key[((c - m) % n + n) % n];
    }
  }
  JointPmf j({n, n}, std::move(table), {"M", "C"});
  return mutual_information(j, {0}, {1});
}

OtpCheckReport otp_unit_check() {
  OtpCheckReport rep;
  for (int n : {2, 3, 4, 5, 8, 16, 32, 64}) {
    std::vector<double> skew(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) skew[static_cast<size_t>(i)] = i + 1.0;
    for (const Pmf& m : {Pmf::uniform(n), Pmf::normalized(skew)}) {
      double leak = otp_leakage(m, Pmf::uniform(n));
      rep.max_uniform_leakage = std::max(rep.max_uniform_leakage, std::abs(leak));
    }
    ++rep.alphabets_checked;
  }
  std::vector<double> biased(8, 0.1 / 7.0);
  biased[0] = 0.9;
  rep.biased_control_leakage = otp_leakage(Pmf::uniform(8), Pmf(biased));
  rep.pass = rep.max_uniform_leakage <= 1e-12 &&
             rep.biased_control_leakage > 1e-3;
  return rep;
}

SecrecyReport estimate_secrecy(std::span<const SessionTranscript> transcripts,
                               const EstimatorConfig& cfg) {
  if (transcripts.empty()) {
    throw std::invalid_argument("estimate_secrecy: no transcripts");
  }
  const SessionTranscript& ref = transcripts.front();
  for (const SessionTranscript& t : transcripts) {
    if (t.n != ref.n || t.num_blocks != ref.num_blocks || t.j0 != ref.j0 ||
        t.j1 != ref.j1 || t.j2 != ref.j2 || t.m0_space != ref.m0_space ||
        t.z_alphabet != ref.z_alphabet) {
      throw std::invalid_argument("estimate_secrecy: inconsistent transcripts");
    }
  }
  int n = ref.n;
  int B = ref.num_blocks;
  int nz = ref.z_alphabet;
  long long N = static_cast<long long>(transcripts.size());

  double full_space = ipow(nz, n * B);
  double block_space = ipow(binomial(n + nz - 1, nz - 1), B);
  double total_space = binomial(n * B + nz - 1, nz - 1);
  ZStatistic stat = cfg.statistic;
  if (stat == ZStatistic::auto_select) {
    double cap = static_cast<double>(cfg.max_outcomes);
    if (full_space <= cap) {
      stat = ZStatistic::full_sequence;
    } else if (block_space <= cap) {
      stat = ZStatistic::per_block_counts;
    } else {
      stat = ZStatistic::total_counts;
    }
  }
  double stat_space = stat == ZStatistic::full_sequence   ? full_space
                      : stat == ZStatistic::per_block_counts ? block_space
                                                             : total_space;
  if (stat == ZStatistic::full_sequence && full_space > 9e18) {
    throw std::invalid_argument(
        "estimate_secrecy: full_sequence statistic not rankable at this size");
  }

  std::map<std::vector<long long>, long long> joint3, m01z, m01m2, m01c, zc;
  long long protected_err_sessions = 0;
  long long block_errors = 0;
  for (const SessionTranscript& t : transcripts) {
    long long m01 = 0, m2 = 0;
    bool any_err = false;
    for (const BlockRecord& b : t.blocks) {
      if (b.error) ++block_errors;
      if (!b.protected_block) continue;
      if (b.error) any_err = true;
      m01 = m01 * (ref.m0_space * ref.j1) + (b.sent.m0 * ref.j1 + b.sent.m1);
      m2 = m2 * ref.j2 + b.sent.m2;
    }
    if (any_err) ++protected_err_sessions;

    std::vector<long long> zkey;
    if (stat == ZStatistic::full_sequence) {
      long long r = 0;
      for (const BlockRecord& b : t.blocks) {
        for (int z : b.z) r = r * nz + z;
      }
      zkey.push_back(r);
    } else if (stat == ZStatistic::per_block_counts) {
      for (const BlockRecord& b : t.blocks) {
        std::vector<long long> counts(static_cast<size_t>(nz), 0);
        for (int z : b.z) ++counts[static_cast<size_t>(z)];
        zkey.insert(zkey.end(), counts.begin(), counts.end());
      }
    } else {
      std::vector<long long> counts(static_cast<size_t>(nz), 0);
      for (const BlockRecord& b : t.blocks) {
        for (int z : b.z) ++counts[static_cast<size_t>(z)];
      }
      zkey = std::move(counts);
    }

    std::vector<long long> k3{m01, m2};
    k3.insert(k3.end(), zkey.begin(), zkey.end());
    ++joint3[k3];
    std::vector<long long> k1{m01};
    k1.insert(k1.end(), zkey.begin(), zkey.end());
    ++m01z[k1];
    ++m01m2[{m01, m2}];
    ++m01c[{m01}];
    std::vector<long long> kz(zkey);
    ++zc[kz];
  }

  PlugInEntropy h3 = plug_in(joint3, N);
  PlugInEntropy h_m01z = plug_in(m01z, N);
  PlugInEntropy h_m = plug_in(m01m2, N);
  PlugInEntropy h_m01 = plug_in(m01c, N);
  PlugInEntropy h_z = plug_in(zc, N);

  double true_h_m = (B - 1) * std::log2(static_cast<double>(ref.m0_space) *
                                        ref.j1 * ref.j2);

  SecrecyReport r;
  r.method = SecrecyMethod::plug_in_mc;
  r.sample_count = N;
  r.message_entropy = true_h_m;
  r.statistic = stat == ZStatistic::full_sequence   ? "full_sequence"
                : stat == ZStatistic::per_block_counts ? "per_block_counts"
                                                       : "total_counts";
  r.p_e = static_cast<double>(protected_err_sessions) / static_cast<double>(N);
  r.block_error_rate =
      static_cast<double>(block_errors) / (static_cast<double>(N) * B);
  r.total_leakage = h_m.value + h_z.value - h3.value;
  r.summand1 = h_m01.value + h_z.value - h_m01z.value;
  r.summand2 = (h_m01z.value - h_m01.value) - (h3.value - h_m.value);
  r.chain_residual = std::abs(r.total_leakage - r.summand1 - r.summand2);
  r.leakage_per_use = r.total_leakage / (static_cast<double>(n) * B);
  if (true_h_m > kZeroProbEps) {
    r.equivocation_ratio = (h3.value - h_z.value) / true_h_m;
    double cond_mm = miller_madow(h3, N) - miller_madow(h_z, N);
    r.equivocation_ratio_mm = cond_mm / true_h_m;
  } else {
    r.equivocation_ratio = 1.0;
    r.equivocation_ratio_mm = 1.0;
  }
  double joint_space = ipow(static_cast<double>(ref.m0_space) * ref.j1 * ref.j2,
                            B - 1) *
                       stat_space;
  r.under_sampled = static_cast<double>(N) < 10.0 * joint_space;
  return r;
}

AchievabilityVerdict achievability_verdict(const SecrecyReport& report,
                                           double target_rate, double epsilon) {
  AchievabilityVerdict v;
  v.target_rate = target_rate;
  v.epsilon = epsilon;
  v.reliability_ok = std::isfinite(report.p_e) && report.p_e <= epsilon;
  v.secrecy_ok = report.equivocation_ratio >= 1.0 - epsilon - 1e-12;
  v.pass = v.reliability_ok && v.secrecy_ok;
  return v;
}

}  // namespace wiretap
