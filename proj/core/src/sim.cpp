#include "polarharq/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace polarharq {

namespace {

ReliabilityTable build_table(Metric metric, int n, double design_param) {
  return metric == Metric::bec_erasure ? bec_reliability(n, design_param)
                                       : ga_reliability(n, design_param);
}

int hamming_distance(const BitVector& a, const BitVector& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

// first_success == 0 means every attempted round failed.
struct TrialDetail {
  int first_success = 0;
  std::vector<int> round_bit_errors;
};

const ChannelModel& round_channel(std::span<const ChannelModel> channels,
                                  int round) {
  const std::size_t idx =
      std::min(static_cast<std::size_t>(round - 1), channels.size() - 1);
  return channels[idx];
}

TrialDetail harq_trial_detail(HarqSession& session,
                              std::span<const ChannelModel> channels,
                              const DecoderChoice& decoder, int max_rounds,
                              bool crc_success, std::mt19937_64& rng) {
  TrialDetail detail;
  detail.round_bit_errors.assign(max_rounds, 0);
  for (int round = 1; round <= max_rounds; ++round) {
    session.push_received(
        transmit(session.block(round), round_channel(channels, round), rng));
    const DecodeResult result = session.decode(decoder);
    const int errors = hamming_distance(result.message, session.message());
    detail.round_bit_errors[round - 1] = errors;
    const bool ok = crc_success ? result.crc_ok : errors == 0;
    if (ok) {
      detail.first_success = round;
      break;
    }
  }
  return detail;
}

struct Assets {
  Metric metric = Metric::ga_mean;
  int report_rounds = 1;
  double rate = 0.0;
  // proposed
  HarqSchedule schedule;
  // direct
  CodeConfig direct_config;
  FrozenSpec direct_spec;
  // incremental freezing
  IfBaseline baseline;
};

BitVector random_message(int bits, std::mt19937_64& rng) {
  BitVector message(bits);
  for (int i = 0; i < bits; ++i) {
    message[i] = static_cast<std::uint8_t>(rng() & 1u);
  }
  return message;
}

TrialDetail direct_trial(const Assets& assets, const SimConfig& cfg,
                         const ChannelModel& channel, std::mt19937_64& rng) {
  const BitVector message = random_message(cfg.message_bits, rng);
  const BitVector codeword =
      encode(build_source(message, assets.direct_spec));
  const LlrVector llr = transmit(codeword, channel, rng);
  const DecodeResult result = run_decoder(llr, assets.direct_spec, cfg.decoder);
  TrialDetail detail;
  const int errors = hamming_distance(result.message, message);
  detail.round_bit_errors = {errors};
  const bool ok = cfg.crc_success ? result.crc_ok : errors == 0;
  detail.first_success = ok ? 1 : 0;
  return detail;
}

TrialDetail if_trial(const Assets& assets, const SimConfig& cfg,
                     const ChannelModel& channel, std::mt19937_64& rng) {
  const BitVector message = random_message(cfg.message_bits, rng);
  const BitVector parent_u = build_source(message, assets.baseline.parent_spec);
  const LlrVector first = transmit(encode(parent_u), channel, rng);

  TrialDetail detail;
  detail.round_bit_errors.assign(assets.report_rounds, 0);
  const DecodeResult round1 =
      if_decode(assets.baseline, first, nullptr, cfg.decoder);
  int errors = hamming_distance(round1.message, message);
  detail.round_bit_errors[0] = errors;
  bool ok = cfg.crc_success ? round1.crc_ok : errors == 0;
  if (ok) {
    detail.first_success = 1;
    return detail;
  }
  if (assets.report_rounds < 2) return detail;

  const LlrVector retx = transmit(
      if_retransmission(assets.baseline, parent_u), channel, rng);
  const DecodeResult round2 =
      if_decode(assets.baseline, first, &retx, cfg.decoder);
  errors = hamming_distance(round2.message, message);
  detail.round_bit_errors[1] = errors;
  ok = cfg.crc_success ? round2.crc_ok : errors == 0;
  if (ok) detail.first_success = 2;
  return detail;
}

TrialDetail proposed_trial(const Assets& assets, const SimConfig& cfg,
                           const ChannelModel& channel, std::mt19937_64& rng) {
  HarqSession session(assets.schedule,
                      random_message(cfg.message_bits, rng));
  const ChannelModel channels[] = {channel};
  return harq_trial_detail(session, channels, cfg.decoder,
                           assets.report_rounds, cfg.crc_success, rng);
}

void validate_config(const SimConfig& cfg) {
  const int n = cfg.block_length;
  if (n < 1 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("sim: N must be a power of two");
  }
  if (cfg.message_bits < 0 ||
      cfg.message_bits + cfg.crc_length > cfg.block_length) {
    throw std::invalid_argument("sim: need 0 <= K + CRC <= N");
  }
  if (cfg.crc_length < 0) throw std::invalid_argument("sim: negative CRC length");
  if (cfg.trials < 1) throw std::invalid_argument("sim: trials must be >= 1");
  if (cfg.max_rounds < 1) throw std::invalid_argument("sim: max_rounds must be >= 1");
  if (cfg.workers < 1) throw std::invalid_argument("sim: workers must be >= 1");
  if (cfg.channel_params.empty()) {
    throw std::invalid_argument("sim: no channel parameters given");
  }
  if (static_cast<int>(cfg.design_params.size()) < cfg.max_rounds) {
    throw std::invalid_argument("sim: need a design parameter per round");
  }
  if (cfg.scheme == Scheme::if_baseline && cfg.max_rounds > 2) {
    throw std::invalid_argument("sim: if_baseline supports at most 2 rounds");
  }
  if (cfg.channel == ChannelKind::bec) {
    for (double p : cfg.channel_params) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("sim: erasure probability must be in [0, 1]");
      }
    }
  }
}

Assets build_assets(const SimConfig& cfg) {
  Assets assets;
  assets.metric =
      cfg.channel == ChannelKind::bec ? Metric::bec_erasure : Metric::ga_mean;
  const int n_log = std::countr_zero(static_cast<unsigned>(cfg.block_length));
  const int info_total = cfg.message_bits + cfg.crc_length;
  std::optional<CrcSpec> crc;
  if (cfg.crc_length > 0) crc = CrcSpec{cfg.crc_length, 0x07};

  switch (cfg.scheme) {
    case Scheme::proposed: {
      const ReliabilityTable table =
          build_table(assets.metric, n_log, cfg.design_params[0]);
      const CodeConfig config = select_code(capacity_sequence(table),
                                            cfg.block_length, info_total);
      const FrozenSpec spec = make_frozen_spec(config, crc);
      const std::span<const double> retx_params(
          cfg.design_params.data() + 1, cfg.design_params.size() - 1);
      assets.schedule =
          make_harq_schedule(config, spec, cfg.max_rounds, retx_params);
      assets.report_rounds = cfg.max_rounds;
      assets.rate = static_cast<double>(cfg.message_bits) / cfg.block_length;
      break;
    }
    case Scheme::direct: {
      const int direct_log = n_log + cfg.max_rounds - 1;
      const ReliabilityTable table = build_table(
          assets.metric, direct_log, cfg.design_params[cfg.max_rounds - 1]);
      assets.direct_config = select_code(capacity_sequence(table),
                                         1 << direct_log, info_total);
      assets.direct_spec = make_frozen_spec(assets.direct_config, crc);
      assets.report_rounds = 1;
      assets.rate =
          static_cast<double>(cfg.message_bits) / (1 << direct_log);
      break;
    }
    case Scheme::if_baseline: {
      const ReliabilityTable table =
          build_table(assets.metric, n_log, cfg.design_params[0]);
      const CodeConfig config = select_code(capacity_sequence(table),
                                            cfg.block_length, info_total);
      const int kprime =
          cfg.if_kprime >= 0 ? cfg.if_kprime : cfg.message_bits / 2;
      const double retx_param = cfg.max_rounds > 1 ? cfg.design_params[1]
                                                   : cfg.design_params[0];
      assets.baseline = make_if_baseline(config, crc, kprime, retx_param);
      assets.report_rounds = cfg.max_rounds;
      assets.rate = static_cast<double>(cfg.message_bits) / cfg.block_length;
      break;
    }
  }
  return assets;
}

struct Counters {
  std::vector<std::int64_t> block_errors;
  std::vector<std::int64_t> bit_errors;
  std::vector<std::int64_t> cum_transmissions;

  explicit Counters(int rounds)
      : block_errors(rounds, 0), bit_errors(rounds, 0),
        cum_transmissions(rounds, 0) {}

  void add(const TrialDetail& detail, int max_rounds) {
    const int attempted =
        detail.first_success > 0 ? detail.first_success : max_rounds;
    for (int r = 1; r <= max_rounds; ++r) {
      const bool success =
          detail.first_success > 0 && detail.first_success <= r;
      block_errors[r - 1] += success ? 0 : 1;
      // A trial not yet successful at round r attempted (and failed) that
      // round's combined decode, so its error count is recorded.
      if (!success) bit_errors[r - 1] += detail.round_bit_errors[r - 1];
      cum_transmissions[r - 1] += std::min(attempted, r);
    }
  }

  void merge(const Counters& other) {
    for (std::size_t i = 0; i < block_errors.size(); ++i) {
      block_errors[i] += other.block_errors[i];
      bit_errors[i] += other.bit_errors[i];
      cum_transmissions[i] += other.cum_transmissions[i];
    }
  }
};

}  // namespace

std::string to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::awgn_bpsk: return "awgn_bpsk";
    case ChannelKind::awgn_qpsk: return "awgn_qpsk";
    case ChannelKind::bec: return "bec";
  }
  return "?";
}

ChannelKind channel_kind_from_string(const std::string& name) {
  if (name == "awgn_bpsk") return ChannelKind::awgn_bpsk;
  if (name == "awgn_qpsk") return ChannelKind::awgn_qpsk;
  if (name == "bec") return ChannelKind::bec;
  throw std::invalid_argument("unknown channel kind: " + name);
}

int modulation_order(ChannelKind kind) {
  return kind == ChannelKind::awgn_qpsk ? 4 : 2;
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::proposed: return "proposed";
    case Scheme::if_baseline: return "if_baseline";
    case Scheme::direct: return "direct";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "proposed") return Scheme::proposed;
  if (name == "if_baseline") return Scheme::if_baseline;
  if (name == "direct") return Scheme::direct;
  throw std::invalid_argument("unknown scheme: " + name);
}

LlrVector transmit(std::span<const std::uint8_t> codeword,
                   const ChannelModel& channel, std::mt19937_64& rng) {
  LlrVector llr(codeword.size());
  switch (channel.kind) {
    case ChannelKind::bec: {
      const double p = channel.param;
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("transmit: erasure probability out of range");
      }
      std::uniform_real_distribution<double> uniform(0.0, 1.0);
      for (std::size_t i = 0; i < llr.size(); ++i) {
        const bool erased = uniform(rng) < p;
        llr[i] = erased ? 0.0 : (codeword[i] ? -kLlrClamp : kLlrClamp);
      }
      break;
    }
    case ChannelKind::awgn_bpsk:
    case ChannelKind::awgn_qpsk: {
      const double esn0 = std::pow(10.0, channel.param / 10.0);
      const double sigma_sq =
          channel.kind == ChannelKind::awgn_bpsk ? 1.0 / (2.0 * esn0)
                                                 : 1.0 / esn0;
      std::normal_distribution<double> noise(0.0, std::sqrt(sigma_sq));
      for (std::size_t i = 0; i < llr.size(); ++i) {
        const double y = (codeword[i] ? -1.0 : 1.0) + noise(rng);
        llr[i] = std::clamp(2.0 * y / sigma_sq, -kLlrClamp, kLlrClamp);
      }
      break;
    }
  }
  return llr;
}

double throughput(double rate, int mod_order, double bler, double t_bar) {
  if (!(bler >= 0.0 && bler <= 1.0)) {
    throw std::invalid_argument("throughput: BLER must be in [0, 1]");
  }
  if (!(t_bar >= 1.0)) {
    throw std::invalid_argument("throughput: t_bar must be >= 1");
  }
  if (mod_order < 2) {
    throw std::invalid_argument("throughput: modulation order must be >= 2");
  }
  return rate * std::log2(static_cast<double>(mod_order)) * (1.0 - bler) /
         t_bar;
}

TrialResult run_harq_trial(HarqSession& session,
                           std::span<const ChannelModel> round_channels,
                           const DecoderChoice& decoder, int max_rounds,
                           bool crc_success, std::mt19937_64& rng) {
  if (round_channels.empty()) {
    throw std::invalid_argument("run_harq_trial: no channel given");
  }
  if (max_rounds < 1 || max_rounds > session.schedule().max_rounds()) {
    throw std::invalid_argument("run_harq_trial: max_rounds out of range");
  }
  const TrialDetail detail = harq_trial_detail(
      session, round_channels, decoder, max_rounds, crc_success, rng);
  if (detail.first_success > 0) return {true, detail.first_success};
  return {false, max_rounds};
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point,
                          std::uint64_t trial) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (point + 1) +
                    0xD1B54A32D192ED03ull * (trial + 1);
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

SimResult monte_carlo(const SimConfig& config) {
  validate_config(config);
  const Assets assets = build_assets(config);

  SimResult result;
  result.config = config;
  result.rate = assets.rate;
  result.mod_order = modulation_order(config.channel);

  for (std::size_t point = 0; point < config.channel_params.size(); ++point) {
    const ChannelModel channel{config.channel, config.channel_params[point]};

    const int workers = static_cast<int>(
        std::min<std::int64_t>(config.workers, config.trials));
    std::vector<Counters> local(workers, Counters(assets.report_rounds));
    const std::int64_t chunk = (config.trials + workers - 1) / workers;

    auto work = [&](int w) {
      const std::int64_t begin = w * chunk;
      const std::int64_t end = std::min<std::int64_t>(begin + chunk,
                                                      config.trials);
      for (std::int64_t trial = begin; trial < end; ++trial) {
        std::mt19937_64 rng(derive_seed(config.seed, point,
                                        static_cast<std::uint64_t>(trial)));
        TrialDetail detail;
        switch (config.scheme) {
          case Scheme::proposed:
            detail = proposed_trial(assets, config, channel, rng);
            break;
          case Scheme::direct:
            detail = direct_trial(assets, config, channel, rng);
            break;
          case Scheme::if_baseline:
            detail = if_trial(assets, config, channel, rng);
            break;
        }
        local[w].add(detail, assets.report_rounds);
      }
    };

    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(workers);
      for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
      for (std::thread& t : threads) t.join();
    }

    Counters totals(assets.report_rounds);
    for (const Counters& c : local) totals.merge(c);

    PointResult point_result;
    point_result.channel_param = config.channel_params[point];
    for (int r = 0; r < assets.report_rounds; ++r) {
      RoundStats stats;
      stats.trials = config.trials;
      stats.block_errors = totals.block_errors[r];
      stats.bit_errors = totals.bit_errors[r];
      stats.cum_transmissions = totals.cum_transmissions[r];
      stats.bler = static_cast<double>(stats.block_errors) / config.trials;
      stats.ber = config.message_bits > 0
                      ? static_cast<double>(stats.bit_errors) /
                            (static_cast<double>(config.trials) *
                             config.message_bits)
                      : 0.0;
      stats.t_bar =
          static_cast<double>(stats.cum_transmissions) / config.trials;
      stats.throughput =
          throughput(assets.rate, result.mod_order, stats.bler, stats.t_bar);
      stats.stderr_bler =
          std::sqrt(stats.bler * (1.0 - stats.bler) / config.trials);
      point_result.rounds.push_back(stats);
    }
    result.points.push_back(std::move(point_result));
  }
  return result;
}

}  // namespace polarharq
