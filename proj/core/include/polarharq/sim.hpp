#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "polarharq/harq.hpp"

namespace polarharq {

enum class ChannelKind { awgn_bpsk, awgn_qpsk, bec };

std::string to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(const std::string& name);

/// Modulation order M: 2 for BPSK, 4 for QPSK, 2 for the (binary) BEC.
int modulation_order(ChannelKind kind);

/// One memoryless channel use per code bit.
///
/// AWGN channels are normalized to unit-amplitude binary subchannels
/// (QPSK = two Gray-mapped independent dimensions), `param` is Es/N0 in dB:
/// sigma^2 = 10^(-snr/10) for QPSK and half that for BPSK, LLR = 2y/sigma^2
/// clamped to +/- kLlrClamp. For the BEC `param` is the erasure probability;
/// erased bits give LLR 0, the rest +/- kLlrClamp.
struct ChannelModel {
  ChannelKind kind = ChannelKind::awgn_qpsk;
  double param = 0.0;
};

LlrVector transmit(std::span<const std::uint8_t> codeword,
                   const ChannelModel& channel, std::mt19937_64& rng);

/// Normalized throughput R * log2(M) * (1 - BLER) / t_bar.
double throughput(double rate, int mod_order, double bler, double t_bar);

enum class Scheme { proposed, if_baseline, direct };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct SimConfig {
  Scheme scheme = Scheme::proposed;
  int block_length = 128;  ///< N of the first transmission
  int message_bits = 64;   ///< K, CRC excluded
  int crc_length = 0;      ///< 0 disables the CRC
  DecoderChoice decoder;
  ChannelKind channel = ChannelKind::awgn_qpsk;
  std::vector<double> channel_params;  ///< swept SNR (dB) or erasure probs
  int max_rounds = 2;
  /// design_params[0] builds the round-1 code; design_params[r-1] plans the
  /// round-r extension (and builds the direct code of the final length).
  std::vector<double> design_params;
  int if_kprime = -1;  ///< -1 picks K/2
  bool crc_success = false;  ///< stop on CRC pass instead of genie comparison
  std::int64_t trials = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct RoundStats {
  std::int64_t trials = 0;
  std::int64_t block_errors = 0;
  std::int64_t bit_errors = 0;
  std::int64_t cum_transmissions = 0;
  double bler = 0.0;
  double ber = 0.0;
  double t_bar = 0.0;
  double throughput = 0.0;
  double stderr_bler = 0.0;
};

struct PointResult {
  double channel_param = 0.0;
  std::vector<RoundStats> rounds;
};

struct SimResult {
  SimConfig config;
  double rate = 0.0;   ///< information rate of the first transmission
  int mod_order = 2;
  std::vector<PointResult> points;
};

struct TrialResult {
  bool success = false;
  int rounds_used = 0;
};

/// One HARQ exchange: transmit round r, decode rounds 1..r combined, stop on
/// success or after max_rounds. Success means the decoded message equals the
/// session's message (genie), or CRC pass when crc_success is set.
TrialResult run_harq_trial(HarqSession& session,
                           std::span<const ChannelModel> round_channels,
                           const DecoderChoice& decoder, int max_rounds,
                           bool crc_success, std::mt19937_64& rng);

/// Monte Carlo sweep over config.channel_params. Bit-exactly reproducible
/// from the seed: every trial draws from its own substream, so results do
/// not depend on the worker count.
SimResult monte_carlo(const SimConfig& config);

/// Substream seed for (point, trial) derived from the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point,
                          std::uint64_t trial);

}  // namespace polarharq
