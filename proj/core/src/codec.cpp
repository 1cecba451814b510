#include "wiretap/codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace wiretap {
namespace {

long long floor_pow2_rate(int n, double rate) {
  double e = static_cast<double>(n) * rate;
  if (e > 62.0) throw TooLargeForExact("bin count exceeds 2^62");
  return static_cast<long long>(std::floor(std::exp2(e)));
}

// p(y | u', s) marginalized over the letter drawn from p(x|u,s)
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

void check_lengths(const Codebook& cb, std::span<const int> y,
                   std::span<const int> s) {
  if (static_cast<int>(y.size()) != cb.spec.n ||
      static_cast<int>(s.size()) != cb.spec.n) {
    throw std::invalid_argument("decode_block: sequence length != n");
  }
}

}  // namespace

Address Codebook::word_address(long long word) const {
  long long flat = word / bin_size;
  Address a;
  a.a2 = flat % j2;
  a.a1 = (flat / j2) % j1;
  a.a0 = flat / (j2 * j1);
  return a;
}

long long Codebook::bin_start(const Address& a) const {
  return ((a.a0 * j1 + a.a1) * j2 + a.a2) * bin_size;
}

long long rank_sequence(std::span<const int> seq, int alphabet) {
  long long r = 0;
  for (int v : seq) {
    if (v < 0 || v >= alphabet) throw std::out_of_range("rank_sequence: symbol");
    r = r * alphabet + v;
  }
  return r;
}

Codebook build_codebook(const WiretapSystem& sys, const CodebookSpec& spec,
                        Rng& rng) {
  if (spec.n < 1) throw std::invalid_argument("build_codebook: n must be >= 1");
  if (spec.num_blocks < 1) {
    throw std::invalid_argument("build_codebook: num_blocks must be >= 1");
  }
  if (spec.rate0 < 0.0 || spec.rate1 < 0.0 || spec.rate2 < 0.0) {
    throw std::invalid_argument("build_codebook: negative rate");
  }
  if (spec.epsilon < 0.0) {
    throw std::invalid_argument("build_codebook: negative epsilon");
  }
  if (spec.case2_split < 0.0 || spec.case2_split > 1.0) {
    throw std::invalid_argument("build_codebook: case2_split outside [0,1]");
  }
  if (spec.aux.num_states != sys.num_states()) {
    throw std::invalid_argument("build_codebook: aux policy state count mismatch");
  }
  double budget = spec.feedback_budget < 0.0 ? spec.rate2 : spec.feedback_budget;
  if (spec.rate2 > budget + 1e-12) {
    throw InfeasibleSpec("feedback key rate exceeds the feedback budget");
  }
  if (spec.mode == BinningMode::keyed_top_bin && spec.rate0 != 0.0) {
    throw InfeasibleSpec(
        "keyed_top_bin derives the top bin level from rate1; set rate0 = 0");
  }

  AuxCodecTerms terms = aux_codec_terms(sys, spec.aux);
  double exp_total = spec.n * (terms.i_up_ys - spec.epsilon);
  if (exp_total > 23.0) {
    throw TooLargeForExact("codebook would exceed the word cap");
  }
  long long total = static_cast<long long>(std::floor(std::exp2(exp_total)));
  if (total < 1) throw InfeasibleSpec("rate budget leaves no codewords");
  if (total > kMaxCodebookWords) {
    throw TooLargeForExact("codebook exceeds the word cap");
  }

  Codebook cb;
  cb.spec = spec;
  cb.num_states = sys.num_states();
  cb.num_eve_outputs = sys.num_eve_outputs();
  cb.feedback_budget = budget;
  cb.total_words = total;
  if (spec.mode == BinningMode::keyed_top_bin) {
    double r1a = spec.case2_split * spec.rate1;
    cb.j0 = floor_pow2_rate(spec.n, r1a);
    cb.j1 = floor_pow2_rate(spec.n, spec.rate1 - r1a);
  } else {
    cb.j0 = floor_pow2_rate(spec.n, spec.rate0);
    cb.j1 = floor_pow2_rate(spec.n, spec.rate1);
  }
  cb.j2 = floor_pow2_rate(spec.n, spec.rate2);
  long long product = cb.bin_product();
  if (product > total) {
    throw InfeasibleSpec("more bin triples than codewords");
  }
  cb.used_words = (total / product) * product;
  cb.bin_size = cb.used_words / product;
  cb.key_space = spec.mode == BinningMode::keyed_top_bin ? cb.j0 * cb.j1 : cb.j1;

  Rng word_rng = rng.split(0x57);
  cb.sequences.resize(static_cast<size_t>(cb.used_words) * spec.n);
  for (long long w = 0; w < cb.used_words; ++w) {
    for (int i = 0; i < spec.n; ++i) {
      cb.sequences[static_cast<size_t>(w) * spec.n + i] =
          word_rng.sample(spec.aux.p_u.probs());
    }
  }

  double seq_count = std::pow(static_cast<double>(cb.num_states), spec.n);
  if (seq_count > static_cast<double>(kMaxStateSequences)) {
    throw TooLargeForExact("state sequence space exceeds the binning cap");
  }
  long long nseq = static_cast<long long>(seq_count + 0.5);
  Rng key_rng = rng.split(0x5b);
  cb.state_bins.resize(static_cast<size_t>(nseq));
  for (long long i = 0; i < nseq; ++i) {
    cb.state_bins[static_cast<size_t>(i)] =
        static_cast<long long>(key_rng.uniform_int(static_cast<uint64_t>(cb.key_space)));
  }
  return cb;
}

long long state_key(const Codebook& cb, std::span<const int> s_seq) {
  if (static_cast<int>(s_seq.size()) != cb.spec.n) {
    throw std::invalid_argument("state_key: sequence length != n");
  }
  return cb.state_bins[static_cast<size_t>(rank_sequence(s_seq, cb.num_states))];
}

long long draw_feedback_key(const Codebook& cb, Rng& rng) {
  return static_cast<long long>(rng.uniform_int(static_cast<uint64_t>(cb.j2)));
}

Address address_for(const Codebook& cb, const Message& m, const BlockKeys& keys) {
  if (m.m0 < 0 || m.m0 >= cb.m0_space() || m.m1 < 0 || m.m1 >= cb.j1 ||
      m.m2 < 0 || m.m2 >= cb.j2) {
    throw std::out_of_range("address_for: message outside its range");
  }
  if (keys.state < 0 || keys.state >= cb.key_space || keys.feedback < 0 ||
      keys.feedback >= cb.j2) {
    throw std::out_of_range("address_for: key outside its range");
  }
  long long ks0 = 0, ks1 = keys.state;
  if (cb.spec.mode == BinningMode::keyed_top_bin) {
    ks0 = keys.state / cb.j1;
    ks1 = keys.state % cb.j1;
  }
  Address a;
  a.a0 = (m.m0 + ks0) % cb.j0;
  a.a1 = (m.m1 + ks1) % cb.j1;
  a.a2 = (m.m2 + keys.feedback) % cb.j2;
  return a;
}

Message remove_keys(const Codebook& cb, const Address& a, const BlockKeys& keys) {
  long long ks0 = 0, ks1 = keys.state;
  if (cb.spec.mode == BinningMode::keyed_top_bin) {
    ks0 = keys.state / cb.j1;
    ks1 = keys.state % cb.j1;
  }
  Message m;
  m.m0 = ((a.a0 - ks0) % cb.j0 + cb.j0) % cb.j0;
  m.m1 = ((a.a1 - ks1) % cb.j1 + cb.j1) % cb.j1;
  m.m2 = ((a.a2 - keys.feedback) % cb.j2 + cb.j2) % cb.j2;
  return m;
}

BlockEncoder::BlockEncoder(const WiretapSystem& sys, const Codebook& cb,
                           const Message& m, const BlockKeys& keys, Rng& rng)
    : sys_(&sys), cb_(&cb), rng_(&rng) {
  address_ = address_for(cb, m, keys);
  word_ = cb.bin_start(address_) +
          static_cast<long long>(rng.uniform_int(static_cast<uint64_t>(cb.bin_size)));
}

int BlockEncoder::next(int state) {
  if (pos_ >= cb_->spec.n) {
    throw std::out_of_range("BlockEncoder: block already fully emitted");
  }
  if (state < 0 || state >= cb_->num_states) {
    throw std::out_of_range("BlockEncoder: state symbol");
  }
  const AuxPolicy& aux = cb_->spec.aux;
  int up = cb_->symbol(word_, pos_);
  ++pos_;
  int u = aux.map_at(up, state);
  return rng_->sample(aux.x_given_us.row_span(u * cb_->num_states + state));
}

std::vector<int> encode_block(const WiretapSystem& sys, const Codebook& cb,
                              const Message& m, const BlockKeys& keys,
                              std::span<const int> s_seq, Rng& rng) {
  if (static_cast<int>(s_seq.size()) != cb.spec.n) {
    throw std::invalid_argument("encode_block: state sequence length != n");
  }
  BlockEncoder enc(sys, cb, m, keys, rng);
  std::vector<int> x;
  x.reserve(s_seq.size());
  for (int s : s_seq) x.push_back(enc.next(s));
  return x;
}

DecodeOutcome try_decode_block(const WiretapSystem& sys, const Codebook& cb,
                               std::span<const int> y_seq,
                               std::span<const int> s_seq,
                               const BlockKeys& keys, DecoderKind decoder) {
  check_lengths(cb, y_seq, s_seq);
  int ns = cb.num_states;
  int ny = sys.num_main_outputs();
  int n = cb.spec.n;
  std::vector<double> rows = effective_main_rows(sys, cb.spec.aux);

  DecodeOutcome out;
  if (decoder == DecoderKind::maximum_likelihood) {
    std::vector<double> lrows(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) lrows[i] = std::log2(rows[i]);
    double best = -std::numeric_limits<double>::infinity();
    long long best_w = 0;
    for (long long w = 0; w < cb.used_words; ++w) {
      double score = 0.0;
      for (int i = 0; i < n; ++i) {
        score += lrows[(static_cast<size_t>(cb.symbol(w, i)) * ns + s_seq[i]) *
                           ny +
                       y_seq[i]];
      }
      if (score > best) {
        best = score;
        best_w = w;
      }
    }
    out.word = best_w;
  } else {
    // robust typicality of (u'^n, y^n, s^n) against p(u') p(s) p(y|u', s)
    int na = cb.spec.aux.aux_size();
    double eps = cb.spec.epsilon;
    std::vector<int> counts(static_cast<size_t>(na) * ns * ny);
    long long found = -1;
    int matches = 0;
    for (long long w = 0; w < cb.used_words; ++w) {
      std::fill(counts.begin(), counts.end(), 0);
      for (int i = 0; i < n; ++i) {
        ++counts[(static_cast<size_t>(cb.symbol(w, i)) * ns + s_seq[i]) * ny +
                 y_seq[i]];
      }
      bool typical = true;
      for (int a = 0; a < na && typical; ++a) {
        for (int s = 0; s < ns && typical; ++s) {
          double base = cb.spec.aux.p_u[a] * sys.state_law()[s];
          for (int y = 0; y < ny; ++y) {
            double p = base * rows[(static_cast<size_t>(a) * ns + s) * ny + y];
            double freq =
                static_cast<double>(
                    counts[(static_cast<size_t>(a) * ns + s) * ny + y]) /
                n;
            if (std::abs(freq - p) > eps * p) {
              typical = false;
              break;
            }
          }
        }
      }
      if (typical) {
        ++matches;
        if (found < 0) found = w;
        if (matches > 1) break;
      }
    }
    if (matches != 1) {
      out.failed = true;
      out.word = -1;
      out.message = Message{-1, -1, -1};
      return out;
    }
    out.word = found;
  }
  out.address = cb.word_address(out.word);
  out.message = remove_keys(cb, out.address, keys);
  return out;
}

DecodeOutcome decode_block(const WiretapSystem& sys, const Codebook& cb,
                           std::span<const int> y_seq,
                           std::span<const int> s_seq, const BlockKeys& keys,
                           DecoderKind decoder) {
  DecodeOutcome out = try_decode_block(sys, cb, y_seq, s_seq, keys, decoder);
  if (out.failed) {
    throw DecodingFailure("typicality decoding found no unique codeword");
  }
  return out;
}

SessionTranscript run_session(const WiretapSystem& sys, const Codebook& cb,
                              Rng& rng) {
  int n = cb.spec.n;
  int B = cb.spec.num_blocks;
  SessionTranscript t;
  t.session_seed = rng.seed();
  t.n = n;
  t.num_blocks = B;
  t.j0 = cb.j0;
  t.j1 = cb.j1;
  t.j2 = cb.j2;
  t.m0_space = cb.m0_space();
  t.z_alphabet = sys.num_eve_outputs();
  t.feedback_budget = cb.feedback_budget;

  BlockKeys keys{0, 0};
  for (int j = 1; j <= B; ++j) {
    BlockRecord rec;
    rec.index = j;
    rec.protected_block = (j > 1);
    rec.sent.m0 = static_cast<long long>(
        rng.uniform_int(static_cast<uint64_t>(cb.m0_space())));
    rec.sent.m1 =
        static_cast<long long>(rng.uniform_int(static_cast<uint64_t>(cb.j1)));
    rec.sent.m2 =
        static_cast<long long>(rng.uniform_int(static_cast<uint64_t>(cb.j2)));
    rec.keys = keys;
    rec.s = sample_states(sys, n, rng);
    BlockEncoder enc(sys, cb, rec.sent, keys, rng);
    rec.x.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) rec.x.push_back(enc.next(rec.s[i]));
    auto [y, z] = sample_block(sys, rec.x, rec.s, rng);
    rec.y = std::move(y);
    rec.z = std::move(z);
    rec.word = enc.word();
    rec.address = enc.address();
    DecodeOutcome dec =
        try_decode_block(sys, cb, rec.y, rec.s, keys, cb.spec.decoder);
    rec.decoded = dec.message;
    rec.error = dec.failed || !(dec.message == rec.sent);
    if (j < B) {
      rec.next_state_key = state_key(cb, rec.s);
      rec.next_feedback_key = draw_feedback_key(cb, rng);
      rec.feedback_bits = std::log2(static_cast<double>(cb.j2));
      t.ledger.push_back(rec.feedback_bits);
      keys = BlockKeys{rec.next_state_key, rec.next_feedback_key};
    }
    t.blocks.push_back(std::move(rec));
  }
  t.ledger_bits = std::accumulate(t.ledger.begin(), t.ledger.end(), 0.0);
  t.ledger_ok =
      t.ledger_bits / (static_cast<double>(n) * B) <= t.feedback_budget + 1e-12;
  return t;
}

SessionTranscript run_session(const WiretapSystem& sys,
                              const CodebookSpec& spec, Rng& rng) {
  Rng build_rng = rng.split(0);
  Rng session_rng = rng.split(1);
  Codebook cb = build_codebook(sys, spec, build_rng);
  return run_session(sys, cb, session_rng);
}

nlohmann::json transcript_to_json(const SessionTranscript& t) {
  nlohmann::json j;
  j["session_seed"] = t.session_seed;
  j["n"] = t.n;
  j["num_blocks"] = t.num_blocks;
  j["bins"] = {t.j0, t.j1, t.j2};
  j["m0_space"] = t.m0_space;
  j["z_alphabet"] = t.z_alphabet;
  j["ledger"] = t.ledger;
  j["ledger_bits"] = t.ledger_bits;
  j["feedback_budget"] = t.feedback_budget;
  j["ledger_ok"] = t.ledger_ok;
  nlohmann::json blocks = nlohmann::json::array();
  for (const BlockRecord& b : t.blocks) {
    nlohmann::json jb;
    jb["index"] = b.index;
    jb["protected"] = b.protected_block;
    jb["sent"] = {b.sent.m0, b.sent.m1, b.sent.m2};
    jb["keys"] = {b.keys.state, b.keys.feedback};
    jb["address"] = {b.address.a0, b.address.a1, b.address.a2};
    jb["word"] = b.word;
    jb["s"] = b.s;
    jb["x"] = b.x;
    jb["y"] = b.y;
    jb["z"] = b.z;
    jb["decoded"] = {b.decoded.m0, b.decoded.m1, b.decoded.m2};
    jb["error"] = b.error;
    jb["next_state_key"] = b.next_state_key;
    jb["next_feedback_key"] = b.next_feedback_key;
    jb["feedback_bits"] = b.feedback_bits;
    blocks.push_back(std::move(jb));
  }
  j["blocks"] = std::move(blocks);
  return j;
}

nlohmann::json codebook_summary_json(const Codebook& cb) {
  nlohmann::json j;
  j["n"] = cb.spec.n;
  j["num_blocks"] = cb.spec.num_blocks;
  j["rates"] = {cb.spec.rate0, cb.spec.rate1, cb.spec.rate2};
  j["epsilon"] = cb.spec.epsilon;
  j["seed"] = cb.spec.seed;
  j["mode"] = cb.spec.mode == BinningMode::keyed_top_bin ? "keyed_top_bin"
                                                         : "wiretap_binning";
  j["decoder"] = cb.spec.decoder == DecoderKind::typicality
                     ? "typicality"
                     : "maximum_likelihood";
  j["total_words"] = cb.total_words;
  j["used_words"] = cb.used_words;
  j["discarded_words"] = cb.total_words - cb.used_words;
  j["bins"] = {cb.j0, cb.j1, cb.j2};
  j["bin_size"] = cb.bin_size;
  j["key_space"] = cb.key_space;
  j["feedback_budget"] = cb.feedback_budget;
  return j;
}

}  // namespace wiretap
