#include <doctest.h>

#include <cmath>
#include <random>

#include "polarharq/io.hpp"
#include "polarharq/sim.hpp"

using namespace polarharq;

namespace {

BitVector random_bits(int count, std::mt19937_64& rng) {
  BitVector bits(count);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
  return bits;
}

HarqSchedule bec_schedule(int n_log, int k, double p0, double p1,
                          int rounds = 2) {
  const auto table = bec_reliability(n_log, p0);
  const auto config = select_code(capacity_sequence(table), 1 << n_log, k);
  const auto spec = make_frozen_spec(config);
  std::vector<double> params(rounds - 1, p1);
  return make_harq_schedule(config, spec, rounds, params);
}

}  // namespace

TEST_CASE("transmit over the binary erasure channel") {
  std::mt19937_64 rng(61);
  const BitVector codeword{0, 1, 1, 0, 1, 0, 0, 1};

  const LlrVector clean = transmit(codeword, {ChannelKind::bec, 0.0}, rng);
  for (std::size_t i = 0; i < codeword.size(); ++i) {
    CHECK(clean[i] == (codeword[i] ? -kLlrClamp : kLlrClamp));
  }

  const LlrVector erased = transmit(codeword, {ChannelKind::bec, 1.0}, rng);
  for (double v : erased) CHECK(v == 0.0);

  CHECK_THROWS_AS(transmit(codeword, {ChannelKind::bec, 1.5}, rng),
                  std::invalid_argument);
}

TEST_CASE("awgn at 30 dB almost never flips a sign") {
  std::mt19937_64 rng(62);
  std::int64_t agree = 0, total = 0;
  for (int block = 0; block < 1000; ++block) {
    const BitVector codeword = random_bits(64, rng);
    const LlrVector llr =
        transmit(codeword, {ChannelKind::awgn_qpsk, 30.0}, rng);
    for (std::size_t i = 0; i < codeword.size(); ++i) {
      const std::uint8_t hard = llr[i] < 0.0 ? 1 : 0;
      agree += hard == codeword[i];
      ++total;
    }
  }
  CHECK(static_cast<double>(agree) / total >= 0.999);
}

TEST_CASE("awgn llr calibration") {
  // conditioned on the transmitted bit, the llr mean is +/- 2/sigma^2
  std::mt19937_64 rng(63);
  const double snr_db = 3.0;
  const double sigma_sq = std::pow(10.0, -snr_db / 10.0);
  const int samples = 100000;

  double sum0 = 0.0, sum1 = 0.0;
  const BitVector zeros(samples, 0);
  const BitVector ones(samples, 1);
  for (double v :
       transmit(zeros, {ChannelKind::awgn_qpsk, snr_db}, rng)) sum0 += v;
  for (double v :
       transmit(ones, {ChannelKind::awgn_qpsk, snr_db}, rng)) sum1 += v;
  const double expected = 2.0 / sigma_sq;
  CHECK(std::abs(sum0 / samples - expected) < 0.02 * expected);
  CHECK(std::abs(sum1 / samples + expected) < 0.02 * expected);
}

TEST_CASE("throughput formula") {
  CHECK(throughput(0.5, 4, 0.0, 1.0) == 1.0);
  CHECK(throughput(0.5, 4, 1.0, 1.3) == 0.0);
  CHECK(std::abs(throughput(0.75, 4, 0.1, 1.3) - 1.03846) < 1e-5);
  CHECK_THROWS_AS(throughput(0.5, 4, 0.0, 0.99), std::invalid_argument);
  CHECK_THROWS_AS(throughput(0.5, 4, -0.1, 1.0), std::invalid_argument);

  std::mt19937_64 rng(64);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double rate = uniform(rng);
    const double bler = uniform(rng);
    const double t_bar = 1.0 + 3.0 * uniform(rng);
    CHECK(throughput(rate, 4, bler, t_bar) <= rate * 2.0 + 1e-12);
  }
}

TEST_CASE("harq trial outcomes") {
  std::mt19937_64 rng(65);
  const auto schedule = bec_schedule(3, 6, 0.25, 0.5);

  // noiseless: success in round 1
  HarqSession clean(schedule, random_bits(6, rng));
  const ChannelModel noiseless[] = {{ChannelKind::bec, 0.0}};
  const auto ok = run_harq_trial(clean, noiseless, {}, 2, false, rng);
  CHECK(ok.success);
  CHECK(ok.rounds_used == 1);

  // fully erased: failure after max_rounds
  HarqSession erased(schedule, random_bits(6, rng));
  const ChannelModel all_erased[] = {{ChannelKind::bec, 1.0}};
  const auto bad = run_harq_trial(erased, all_erased, {}, 2, false, rng);
  CHECK_FALSE(bad.success);
  CHECK(bad.rounds_used == 2);
}

TEST_CASE("retransmission strictly improves the success rate") {
  std::mt19937_64 rng(66);
  const auto schedule = bec_schedule(3, 6, 0.25, 0.5);
  const ChannelModel channel[] = {{ChannelKind::bec, 0.5}};
  int round1 = 0, round2 = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    HarqSession session(schedule, random_bits(6, rng));
    const auto outcome = run_harq_trial(session, channel, {}, 2, false, rng);
    if (outcome.success && outcome.rounds_used == 1) {
      ++round1;
      ++round2;
    } else if (outcome.success) {
      ++round2;
    }
  }
  CHECK(round2 > round1);
}

TEST_CASE("monte carlo degenerate and determinism contracts") {
  SimConfig config;
  config.scheme = Scheme::proposed;
  config.block_length = 8;
  config.message_bits = 6;
  config.channel = ChannelKind::bec;
  config.channel_params = {0.0};
  config.max_rounds = 2;
  config.design_params = {0.25, 0.5};
  config.trials = 1;
  config.seed = 7;

  const auto clean = monte_carlo(config);
  CHECK(clean.points[0].rounds[0].bler == 0.0);
  CHECK(clean.points[0].rounds[0].t_bar == 1.0);
  CHECK(clean.points[0].rounds[1].t_bar == 1.0);

  config.channel_params = {0.4, 0.5};
  config.trials = 2000;
  const auto once = monte_carlo(config);
  const auto twice = monte_carlo(config);
  CHECK(result_to_csv(once) == result_to_csv(twice));

  SimConfig threaded = config;
  threaded.workers = 3;
  const auto parallel = monte_carlo(threaded);
  CHECK(result_to_csv(once) == result_to_csv(parallel));
}

TEST_CASE("counters are sane and rounds only help") {
  SimConfig config;
  config.scheme = Scheme::proposed;
  config.block_length = 16;
  config.message_bits = 8;
  config.channel = ChannelKind::bec;
  config.channel_params = {0.35, 0.5};
  config.max_rounds = 3;
  config.design_params = {0.25, 0.5, 0.7};
  config.trials = 3000;
  config.seed = 17;

  const auto result = monte_carlo(config);
  for (const PointResult& point : result.points) {
    for (std::size_t r = 0; r < point.rounds.size(); ++r) {
      const RoundStats& stats = point.rounds[r];
      CHECK(stats.block_errors <= stats.trials);
      CHECK(stats.ber <= 1.0);
      CHECK(stats.t_bar >= 1.0);
      CHECK(stats.t_bar <= config.max_rounds);
      CHECK(stats.throughput <= result.rate * 2.0 + 1e-12);
      if (r > 0) {
        CHECK(stats.block_errors <= point.rounds[r - 1].block_errors);
        CHECK(stats.bit_errors <= point.rounds[r - 1].bit_errors);
      }
    }
  }
}

TEST_CASE("monte carlo rejects broken configs") {
  SimConfig config;
  config.block_length = 24;  // not a power of two
  config.message_bits = 8;
  config.channel_params = {1.0};
  config.design_params = {4.0, 1.0};
  CHECK_THROWS_AS(monte_carlo(config), std::invalid_argument);

  config.block_length = 16;
  config.trials = 0;
  CHECK_THROWS_AS(monte_carlo(config), std::invalid_argument);

  config.trials = 10;
  config.design_params = {4.0};  // one parameter short for two rounds
  CHECK_THROWS_AS(monte_carlo(config), std::invalid_argument);
}
