#pragma once

#include <optional>
#include <span>
#include <vector>

#include "polarharq/codec.hpp"

namespace polarharq {

/// One copy-bits pair of an N -> 2N extension, in 0-based indices of the
/// doubled code. The source is a weakly protected information position of
/// the code being extended (upper half, N..2N-1); the target is the more
/// reliable extension position (lower half, 0..N-1) that carries a copy of
/// its value. In decode order the target comes first, so the source decodes
/// as a dynamic frozen bit driven by the target's decision.
struct CopyPair {
  int source = 0;
  int target = 0;
};

struct ExtensionPlan {
  int parent_block_length = 0;
  Metric metric = Metric::bec_erasure;
  double design_param = 0.0;  ///< construction parameter of the doubled code
  std::vector<CopyPair> pairs;
  std::vector<int> effective_info_set;  // ascending, 0-based, size K
  FrozenSpec parent_spec;               // roles of the code being extended
};

/// Copy-pair search against an explicit reliability table of the doubled
/// code (the pairing depends only on the reliability order). Repeatedly take
/// the unpaired parent information position with the smallest doubled-code
/// reliability and pair it with the unpaired extension position of smallest
/// reliability strictly exceeding it; stop when none qualifies. Zero pairs
/// is a legal outcome.
ExtensionPlan plan_from_table(const FrozenSpec& parent,
                              const ReliabilityTable& doubled_table);

/// plan_from_table against a freshly built table of the doubled code at
/// `retx_design_param` (erasure probability for bec_erasure, design SNR in
/// dB for ga_mean).
ExtensionPlan plan_extension(const FrozenSpec& parent, Metric metric,
                             double retx_design_param);

struct ExtendedCode {
  CodeConfig config;
  FrozenSpec spec;
};

/// Code config and decode spec of the doubled code: information at the
/// effective info set, pair sources dynamic-frozen from their targets,
/// every other extension position frozen to zero, parent roles carried over
/// (shifted up by N). The payload keeps the parent's bit order, so earlier
/// transmissions are not re-mapped.
ExtendedCode effective_config(const ExtensionPlan& plan);

/// Lower-half source bits implied by the plan: copies of the parent source
/// vector at pair targets, zero elsewhere.
BitVector extension_source(const ExtensionPlan& plan,
                           const BitVector& parent_u);

/// The retransmitted block. With doubled input u = (u_low, u_up) the
/// codeword is ((u_low ^ u_up) G_N, u_up G_N): the upper output half is the
/// already-sent parent codeword, the lower half is new.
BitVector encode_retransmission(const ExtensionPlan& plan,
                                const BitVector& parent_u);

/// (u_low, parent_u) concatenated: the source vector of the doubled code.
BitVector assemble_extended_source(const ExtensionPlan& plan,
                                   const BitVector& parent_u);

/// Plans for rounds 2..rounds; each extension operates on the effective
/// config of the previous one. design_params[r] parameterizes the round
/// r+2 construction.
std::vector<ExtensionPlan> plan_chain(const FrozenSpec& parent, Metric metric,
                                      int rounds,
                                      std::span<const double> design_params);

struct DecoderChoice {
  enum class Kind { sc, scl };
  Kind kind = Kind::sc;
  int list_size = 8;
  DecodeOptions options;
};

DecodeResult run_decoder(const LlrVector& llr, const FrozenSpec& spec,
                         const DecoderChoice& decoder);

/// Immutable per-code-family state of an HARQ session: the round-1 code and
/// the chain of extensions, with the decode spec of every round.
struct HarqSchedule {
  CodeConfig parent_config;
  FrozenSpec parent_spec;
  std::vector<ExtensionPlan> chain;
  std::vector<FrozenSpec> round_specs;  // round_specs[r-1] decodes rounds 1..r

  int max_rounds() const { return static_cast<int>(round_specs.size()); }
  /// Bits transmitted in round r: N for rounds 1 and 2, doubling afterwards.
  int block_length(int round) const;
  /// Code length decoded after `rounds` rounds: N * 2^(rounds-1).
  int combined_length(int rounds) const;
};

HarqSchedule make_harq_schedule(const CodeConfig& parent_config,
                                const FrozenSpec& parent_spec, int rounds,
                                std::span<const double> design_params);

/// Stack received round segments into the LLR vector of the combined code.
/// Round 1 occupies the top recursive half, matching the encoder layout.
LlrVector assemble_harq_llrs(const HarqSchedule& schedule,
                             std::span<const LlrVector> received);

/// One decode of the combined code over all received rounds; earlier rounds
/// are never decoded separately.
DecodeResult harq_decode(const HarqSchedule& schedule,
                         std::span<const LlrVector> received,
                         const DecoderChoice& decoder);

/// Transmit-side and receive-side state of one HARQ exchange.
class HarqSession {
 public:
  HarqSession(const HarqSchedule& schedule, BitVector message);

  /// Bits transmitted in round r (1-based); encoded on first use.
  const BitVector& block(int round);
  void push_received(LlrVector segment);
  int rounds_received() const { return static_cast<int>(received_.size()); }
  DecodeResult decode(const DecoderChoice& decoder) const;

  const BitVector& message() const { return message_; }
  const HarqSchedule& schedule() const { return *schedule_; }

 private:
  const HarqSchedule* schedule_;
  BitVector message_;
  std::vector<BitVector> sources_;  // source vector per combined length
  std::vector<BitVector> blocks_;
  std::vector<LlrVector> received_;
};

/// Incremental-freezing baseline: the k' least reliable information bits of
/// the first transmission are re-encoded as a fresh (N, k') code. The
/// receiver decodes the retransmission alone, then re-decodes round 1 with
/// those positions frozen to the decoded values.
struct IfBaseline {
  CodeConfig parent_config;
  FrozenSpec parent_spec;
  std::vector<int> refrozen;  // ascending positions carried by round 2
  CodeConfig retx_config;
  FrozenSpec retx_spec;
};

IfBaseline make_if_baseline(const CodeConfig& parent_config,
                            std::optional<CrcSpec> crc, int kprime,
                            double retx_design_param);

BitVector if_retransmission(const IfBaseline& baseline,
                            const BitVector& parent_u);

/// Round-1 message estimate; `retx` may be null when only round 1 was sent.
DecodeResult if_decode(const IfBaseline& baseline, const LlrVector& first,
                       const LlrVector* retx, const DecoderChoice& decoder);

}  // namespace polarharq
