#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wiretap/capacity.hpp"
#include "wiretap/channels.hpp"
#include "wiretap/errors.hpp"
#include "wiretap/rng.hpp"

namespace wiretap {

// Hard caps keeping codebooks and state binnings exactly analyzable.
inline constexpr long long kMaxCodebookWords = 1LL << 22;
inline constexpr long long kMaxStateSequences = 1LL << 22;

// wiretap_binning: the top-level bin index carries an unkeyed message part
// protected by channel binning alone.  keyed_top_bin: no unkeyed part; the
// state key is split across the top two bin levels.
enum class BinningMode { wiretap_binning, keyed_top_bin };

enum class DecoderKind { maximum_likelihood, typicality };

struct CodebookSpec {
  int n = 8;                    // blocklength per block
  int num_blocks = 3;           // B; blocks 2..B are key-protected
  double rate0 = 0.0;           // unkeyed (binning-protected) message rate
  double rate1 = 0.0;           // state-key-protected message rate
  double rate2 = 0.0;           // feedback-key-protected message rate
  double epsilon = 0.05;        // codebook-size and typicality slack
  AuxPolicy aux = AuxPolicy::identity(Pmf::uniform(2), 1);
  uint64_t seed = 1;
  BinningMode mode = BinningMode::wiretap_binning;
  double case2_split = 0.5;     // keyed_top_bin: fraction of rate1 on the top level
  double feedback_budget = -1.0;  // ledger budget R_f; negative means rate2
  DecoderKind decoder = DecoderKind::maximum_likelihood;
};

struct Message {
  long long m0 = 0, m1 = 0, m2 = 0;
  bool operator==(const Message&) const = default;
};

struct Address {
  long long a0 = 0, a1 = 0, a2 = 0;
  bool operator==(const Address&) const = default;
};

struct BlockKeys {
  long long state = 0;     // in [key_space)
  long long feedback = 0;  // in [j2)
};

struct Codebook {
  CodebookSpec spec;
  int num_states = 1;
  int num_eve_outputs = 1;
  double feedback_budget = 0.0;  // resolved ledger budget
  long long total_words = 0;     // floor(2^{n (I(U';Y,S) - eps)})
  long long used_words = 0;      // truncated to a multiple of the bin product
  long long j0 = 1, j1 = 1, j2 = 1;
  long long bin_size = 1;
  long long key_space = 1;       // j1, or j0*j1 in keyed_top_bin mode
  std::vector<int> sequences;        // used_words * n symbols of U'
  std::vector<long long> state_bins;  // rank(s^n) -> state key

  int symbol(long long word, int i) const {
    return sequences[static_cast<size_t>(word) * spec.n + i];
  }
  long long bin_product() const { return j0 * j1 * j2; }
  // top-level message alphabet: collapsed to 1 in keyed_top_bin mode
  long long m0_space() const {
    return spec.mode == BinningMode::keyed_top_bin ? 1 : j0;
  }
  long long messages_per_block() const { return m0_space() * j1 * j2; }
  Address word_address(long long word) const;
  long long bin_start(const Address& a) const;
};

// Big-endian mixed-radix rank of a symbol sequence.
long long rank_sequence(std::span<const int> seq, int alphabet);

Codebook build_codebook(const WiretapSystem& sys, const CodebookSpec& spec,
                        Rng& rng);

// Key of one state sequence under the codebook's random binning.
long long state_key(const Codebook& cb, std::span<const int> s_seq);
// Fresh uniform feedback key; the per-block ledger cost is log2(j2) bits.
long long draw_feedback_key(const Codebook& cb, Rng& rng);

Address address_for(const Codebook& cb, const Message& m, const BlockKeys& keys);
Message remove_keys(const Codebook& cb, const Address& a, const BlockKeys& keys);

// Streaming encoder: the codeword is fixed up front, each transmitted symbol
// is drawn when the current state arrives, so x_i never depends on s_{i+1}.
class BlockEncoder {
public:
  BlockEncoder(const WiretapSystem& sys, const Codebook& cb, const Message& m,
               const BlockKeys& keys, Rng& rng);

  int next(int state);
  int position() const { return pos_; }
  long long word() const { return word_; }
  const Address& address() const { return address_; }

private:
  const WiretapSystem* sys_;
  const Codebook* cb_;
  Rng* rng_;
  Address address_;
  long long word_ = 0;
  int pos_ = 0;
};

std::vector<int> encode_block(const WiretapSystem& sys, const Codebook& cb,
                              const Message& m, const BlockKeys& keys,
                              std::span<const int> s_seq, Rng& rng);

struct DecodeOutcome {
  long long word = -1;
  Address address;
  Message message;
  bool failed = false;  // typicality found no unique candidate
};

// Non-throwing form; `failed` only ever set in typicality mode.
DecodeOutcome try_decode_block(const WiretapSystem& sys, const Codebook& cb,
                               std::span<const int> y_seq,
                               std::span<const int> s_seq,
                               const BlockKeys& keys, DecoderKind decoder);

// Throws DecodingFailure when typicality decoding is not uniquely resolvable.
DecodeOutcome decode_block(const WiretapSystem& sys, const Codebook& cb,
                           std::span<const int> y_seq,
                           std::span<const int> s_seq, const BlockKeys& keys,
                           DecoderKind decoder);

struct BlockRecord {
  int index = 0;  // 1-based
  bool protected_block = false;
  Message sent;
  BlockKeys keys;
  Address address;
  long long word = 0;
  std::vector<int> s, x, y, z;
  Message decoded;
  bool error = false;
  long long next_state_key = 0;     // generated from this block's states
  long long next_feedback_key = 0;  // sent back for the next block
  double feedback_bits = 0.0;       // ledger entry
};

struct SessionTranscript {
  uint64_t session_seed = 0;
  int n = 0;
  int num_blocks = 0;
  long long j0 = 1, j1 = 1, j2 = 1;
  long long m0_space = 1;
  int z_alphabet = 1;
  std::vector<BlockRecord> blocks;
  std::vector<double> ledger;  // feedback bits per inter-block key
  double ledger_bits = 0.0;
  double feedback_budget = 0.0;
  bool ledger_ok = true;
};

SessionTranscript run_session(const WiretapSystem& sys, const Codebook& cb,
                              Rng& rng);
SessionTranscript run_session(const WiretapSystem& sys,
                              const CodebookSpec& spec, Rng& rng);

nlohmann::json transcript_to_json(const SessionTranscript& t);
nlohmann::json codebook_summary_json(const Codebook& cb);

}  // namespace wiretap
