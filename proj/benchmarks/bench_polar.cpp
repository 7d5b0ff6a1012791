#include <benchmark/benchmark.h>

#include <random>

#include "polarharq/sim.hpp"

using namespace polarharq;

namespace {

BitVector random_bits(int count, std::mt19937_64& rng) {
  BitVector bits(count);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
  return bits;
}

FrozenSpec half_rate_spec(int n_log) {
  const auto table = ga_reliability(n_log, 2.0);
  const auto config =
      select_code(capacity_sequence(table), 1 << n_log, 1 << (n_log - 1));
  return make_frozen_spec(config);
}

void BM_BecConstruction(benchmark::State& state) {
  const int n_log = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(bec_reliability(n_log, 0.3));
  }
  state.SetComplexityN(1 << n_log);
}
BENCHMARK(BM_BecConstruction)->DenseRange(10, 16, 2)->Complexity();

void BM_GaConstruction(benchmark::State& state) {
  const int n_log = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ga_reliability(n_log, 2.0));
  }
  state.SetComplexityN(1 << n_log);
}
BENCHMARK(BM_GaConstruction)->DenseRange(8, 12, 2)->Complexity();

void BM_Encode(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  const BitVector u = random_bits(n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode(u));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_Encode)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_ScDecode(benchmark::State& state) {
  const int n_log = static_cast<int>(state.range(0));
  const auto spec = half_rate_spec(n_log);
  std::mt19937_64 rng(2);
  const BitVector message = random_bits(spec.message_size(), rng);
  const LlrVector llr = transmit(encode(build_source(message, spec)),
                                 {ChannelKind::awgn_qpsk, 1.0}, rng);
  ScDecoder decoder;
  for (auto _ : state) {
    benchmark::DoNotOptimize(decoder.decode(llr, spec));
  }
  state.SetComplexityN(1 << n_log);
}
BENCHMARK(BM_ScDecode)->DenseRange(8, 12, 2)->Complexity();

void BM_ScDecodeMinSum(benchmark::State& state) {
  const int n_log = static_cast<int>(state.range(0));
  const auto spec = half_rate_spec(n_log);
  std::mt19937_64 rng(2);
  const BitVector message = random_bits(spec.message_size(), rng);
  const LlrVector llr = transmit(encode(build_source(message, spec)),
                                 {ChannelKind::awgn_qpsk, 1.0}, rng);
  ScDecoder decoder(DecodeOptions{.min_sum = true});
  for (auto _ : state) {
    benchmark::DoNotOptimize(decoder.decode(llr, spec));
  }
  state.SetComplexityN(1 << n_log);
}
BENCHMARK(BM_ScDecodeMinSum)->DenseRange(8, 12, 2)->Complexity();

void BM_SclDecode(benchmark::State& state) {
  const auto spec = half_rate_spec(8);
  const int list_size = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  const BitVector message = random_bits(spec.message_size(), rng);
  const LlrVector llr = transmit(encode(build_source(message, spec)),
                                 {ChannelKind::awgn_qpsk, 1.0}, rng);
  ScListDecoder decoder(list_size);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decoder.decode(llr, spec));
  }
}
BENCHMARK(BM_SclDecode)->RangeMultiplier(2)->Range(1, 32);

void BM_PlanExtension(benchmark::State& state) {
  const int n_log = static_cast<int>(state.range(0));
  const auto parent = half_rate_spec(n_log);
  for (auto _ : state) {
    benchmark::DoNotOptimize(plan_extension(parent, Metric::ga_mean, 1.0));
  }
  state.SetComplexityN(1 << n_log);
}
BENCHMARK(BM_PlanExtension)->DenseRange(7, 11, 2)->Complexity();

void BM_HarqTrial(benchmark::State& state) {
  const auto table = ga_reliability(7, 4.0);
  const auto config = select_code(capacity_sequence(table), 128, 64);
  const auto spec = make_frozen_spec(config);
  const double retx[] = {1.0};
  const auto schedule = make_harq_schedule(config, spec, 2, retx);
  const ChannelModel channel[] = {{ChannelKind::awgn_qpsk, 0.0}};
  std::mt19937_64 rng(4);
  for (auto _ : state) {
    HarqSession session(schedule, random_bits(64, rng));
    benchmark::DoNotOptimize(
        run_harq_trial(session, channel, {}, 2, false, rng));
  }
}
BENCHMARK(BM_HarqTrial);

}  // namespace

BENCHMARK_MAIN();
