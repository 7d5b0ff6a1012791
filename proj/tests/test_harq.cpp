#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "polarharq/harq.hpp"
#include "polarharq/sim.hpp"

using namespace polarharq;

namespace {

FrozenSpec bec_spec(int n_log, int k, double p,
                    std::optional<CrcSpec> crc = std::nullopt) {
  const auto table = bec_reliability(n_log, p);
  return make_frozen_spec(select_code(capacity_sequence(table), 1 << n_log, k),
                          crc);
}

CodeConfig bec_config(int n_log, int k, double p) {
  const auto table = bec_reliability(n_log, p);
  return select_code(capacity_sequence(table), 1 << n_log, k);
}

BitVector random_bits(int count, std::mt19937_64& rng) {
  BitVector bits(count);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
  return bits;
}

LlrVector perfect_llrs(const BitVector& codeword) {
  LlrVector llr(codeword.size());
  for (std::size_t i = 0; i < llr.size(); ++i) {
    llr[i] = codeword[i] ? -kLlrClamp : kLlrClamp;
  }
  return llr;
}

// next weight-<=w subset iterator replacement: enumerate all index subsets of
// size 0..w of {0..n-1}
std::vector<std::vector<int>> subsets_up_to_weight(int n, int w) {
  std::vector<std::vector<int>> out{{}};
  std::vector<int> current;
  for (int a = 0; a < n; ++a) {
    out.push_back({a});
    if (w >= 2) {
      for (int b = a + 1; b < n; ++b) out.push_back({a, b});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("copy-pair plan for the worked (8,6) example") {
  const auto parent = bec_spec(3, 6, 0.25);
  const auto plan = plan_extension(parent, Metric::bec_erasure, 0.5);

  REQUIRE(plan.pairs.size() == 1);
  CHECK(plan.pairs[0].source == 10);  // canonical 11
  CHECK(plan.pairs[0].target == 7);   // canonical 8
  CHECK(plan.effective_info_set ==
        std::vector<int>{7, 11, 12, 13, 14, 15});

  // source is the worst parent information channel, target is the only
  // extension channel strictly better than it
  const auto doubled = bec_reliability(4, 0.5);
  double worst_info = -1.0;
  int worst_idx = -1;
  for (int p = 0; p < 8; ++p) {
    if (parent.roles[p] != BitRole::information) continue;
    if (doubled.values[p + 8] > worst_info) {
      worst_info = doubled.values[p + 8];
      worst_idx = p + 8;
    }
  }
  CHECK(worst_idx == plan.pairs[0].source);
  int qualifying = 0;
  for (int e = 0; e < 8; ++e) {
    if (doubled.values[e] < worst_info) ++qualifying;
  }
  CHECK(qualifying == 1);
}

TEST_CASE("plans with zero pairs are legal") {
  // (8,2): both parent information channels beat every extension channel
  const auto strong = bec_spec(3, 2, 0.25);
  const auto plan = plan_extension(strong, Metric::bec_erasure, 0.5);
  CHECK(plan.pairs.empty());
  CHECK(plan.effective_info_set == std::vector<int>{14, 15});

  // K = 0: nothing to protect
  const auto empty = bec_spec(3, 0, 0.25);
  CHECK(plan_extension(empty, Metric::bec_erasure, 0.5).pairs.empty());
}

TEST_CASE("effective config of the worked example") {
  const auto parent = bec_spec(3, 6, 0.25);
  const auto plan = plan_extension(parent, Metric::bec_erasure, 0.5);
  const auto extended = effective_config(plan);

  CHECK(extended.config.block_length == 16);
  CHECK(extended.config.info_count == 6);
  CHECK(extended.spec.roles[7] == BitRole::information);
  CHECK(extended.spec.roles[10] == BitRole::dynamic_frozen);
  CHECK(extended.spec.copy_from[10] == 7);
  for (int i = 0; i < 7; ++i) CHECK(extended.spec.roles[i] == BitRole::frozen);
  CHECK(extended.spec.roles[8] == BitRole::frozen);
  CHECK(extended.spec.roles[9] == BitRole::frozen);
  for (int i = 11; i < 16; ++i) {
    CHECK(extended.spec.roles[i] == BitRole::information);
  }
  // payload keeps the parent order, shifted into the upper half
  CHECK(extended.spec.payload_map ==
        std::vector<int>{10, 11, 12, 13, 14, 15});
}

TEST_CASE("zero-pair plan freezes the whole lower half") {
  const auto parent = bec_spec(3, 2, 0.25);
  const auto extended =
      effective_config(plan_extension(parent, Metric::bec_erasure, 0.5));
  for (int i = 0; i < 8; ++i) {
    CHECK(extended.spec.roles[i] == BitRole::frozen);
  }
  CHECK(extended.config.info_set == std::vector<int>{14, 15});
}

TEST_CASE("rate-1 parent halves its rate after one extension") {
  const auto parent = bec_spec(3, 8, 0.25);
  const auto extended =
      effective_config(plan_extension(parent, Metric::bec_erasure, 0.5));
  CHECK(extended.config.info_count == 8);
  CHECK(extended.config.block_length == 16);
}

TEST_CASE("retransmission block algebra") {
  std::mt19937_64 rng(41);

  // zero pairs: the retransmitted block equals the parent codeword
  const auto strong = bec_spec(3, 2, 0.25);
  const auto zp = plan_extension(strong, Metric::bec_erasure, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    const BitVector u = build_source(random_bits(2, rng), strong);
    CHECK(encode_retransmission(zp, u) == encode(u));
  }

  // all-zero message: all-zero block
  const auto parent = bec_spec(3, 6, 0.25);
  const auto plan = plan_extension(parent, Metric::bec_erasure, 0.5);
  const BitVector zero_u = build_source(BitVector(6, 0), parent);
  CHECK(encode_retransmission(plan, zero_u) == BitVector(8, 0));

  // inconsistent parent vector is rejected
  BitVector bad(8, 0);
  bad[0] = 1;  // frozen position of the (8,6) code
  CHECK_THROWS_AS(encode_retransmission(plan, bad), std::invalid_argument);
}

TEST_CASE("doubled encoding keeps the parent codeword verbatim") {
  const auto parent = bec_spec(3, 6, 0.25);
  const auto plan = plan_extension(parent, Metric::bec_erasure, 0.5);
  for (int m = 0; m < 64; ++m) {
    BitVector message(6);
    for (int j = 0; j < 6; ++j) message[j] = (m >> j) & 1;
    const BitVector parent_u = build_source(message, parent);
    const BitVector parent_codeword = encode(parent_u);
    const BitVector retx = encode_retransmission(plan, parent_u);
    const BitVector full = encode(assemble_extended_source(plan, parent_u));
    for (int i = 0; i < 8; ++i) {
      CHECK(full[i] == retx[i]);
      CHECK(full[8 + i] == parent_codeword[i]);
    }
  }
}

TEST_CASE("doubled source equals build_source on the effective spec") {
  std::mt19937_64 rng(42);
  const auto parent = bec_spec(3, 6, 0.25);
  const auto plan = plan_extension(parent, Metric::bec_erasure, 0.5);
  const auto extended = effective_config(plan);
  for (int trial = 0; trial < 30; ++trial) {
    const BitVector message = random_bits(6, rng);
    const BitVector via_plan =
        assemble_extended_source(plan, build_source(message, parent));
    const BitVector via_spec = build_source(message, extended.spec);
    CHECK(via_plan == via_spec);
  }
}

TEST_CASE("plan chains") {
  const auto parent = bec_spec(3, 6, 0.25);

  CHECK(plan_chain(parent, Metric::bec_erasure, 1, {}).empty());

  const double params[] = {0.5, 0.5};
  const auto chain = plan_chain(parent, Metric::bec_erasure, 3, params);
  REQUIRE(chain.size() == 2);
  CHECK(chain[1].parent_spec.info_count() == 6);
  CHECK(chain[1].parent_block_length == 16);
  const auto round3 = effective_config(chain[1]);
  CHECK(round3.config.block_length == 32);
  CHECK(round3.config.info_count == 6);

  // a zero-pair middle round still composes
  const auto strong = bec_spec(3, 2, 0.25);
  const auto chain2 = plan_chain(strong, Metric::bec_erasure, 3, params);
  REQUIRE(chain2.size() == 2);
  CHECK(chain2[0].pairs.empty());
  CHECK(effective_config(chain2[1]).config.info_count == 2);
}

TEST_CASE("pair invariants over varied plans") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const int n_log = 3 + static_cast<int>(rng() % 4);  // 8..64
    const int n = 1 << n_log;
    const int k = 1 + static_cast<int>(rng() % n);
    const bool use_bec = (rng() & 1u) != 0;
    const Metric metric = use_bec ? Metric::bec_erasure : Metric::ga_mean;
    const double p0 = use_bec ? 0.2 : 4.0;
    const double p1 = use_bec ? 0.45 : 1.0;
    const auto table = use_bec ? bec_reliability(n_log, p0)
                               : ga_reliability(n_log, p0);
    const auto parent =
        make_frozen_spec(select_code(capacity_sequence(table), n, k));
    const auto plan = plan_extension(parent, metric, p1);
    const auto doubled = use_bec ? bec_reliability(n_log + 1, p1)
                                 : ga_reliability(n_log + 1, p1);

    std::set<int> used;
    for (const CopyPair& pair : plan.pairs) {
      CHECK(pair.source >= n);
      CHECK(pair.target < n);
      CHECK(used.insert(pair.source).second);
      CHECK(used.insert(pair.target).second);
      CHECK(reliability_key(doubled.kind, doubled.values[pair.target]) >
            reliability_key(doubled.kind, doubled.values[pair.source]));
    }
    CHECK(static_cast<int>(plan.effective_info_set.size()) == k);
  }
}

TEST_CASE("pairing depends only on the reliability order") {
  const auto parent = bec_spec(4, 12, 0.2);
  const auto doubled = bec_reliability(5, 0.45);
  const auto base = plan_from_table(parent, doubled);

  // any strictly increasing transform of the erasure probabilities keeps
  // the reliability order, hence the pairing
  ReliabilityTable warped = doubled;
  for (double& z : warped.values) z = std::pow(z, 1.37) + 0.1 * z;
  const auto same = plan_from_table(parent, warped);
  REQUIRE(base.pairs.size() == same.pairs.size());
  for (std::size_t i = 0; i < base.pairs.size(); ++i) {
    CHECK(base.pairs[i].source == same.pairs[i].source);
    CHECK(base.pairs[i].target == same.pairs[i].target);
  }
}

TEST_CASE("copy consistency before and after decoding") {
  std::mt19937_64 rng(44);
  const auto parent = bec_spec(4, 12, 0.2);
  const auto plan = plan_extension(parent, Metric::bec_erasure, 0.45);
  const auto extended = effective_config(plan);
  const ChannelModel channel{ChannelKind::bec, 0.3};
  for (int trial = 0; trial < 50; ++trial) {
    const BitVector parent_u = build_source(random_bits(12, rng), parent);
    const BitVector u = assemble_extended_source(plan, parent_u);
    for (const CopyPair& pair : plan.pairs) {
      CHECK(u[pair.source] == u[pair.target]);
    }
    const LlrVector llr = transmit(encode(u), channel, rng);
    const auto decoded = sc_decode(llr, extended.spec);
    for (const CopyPair& pair : plan.pairs) {
      CHECK(decoded.u_hat[pair.source] == decoded.u_hat[pair.target]);
    }
  }
}

TEST_CASE("transmitted prefix is immutable under further planning") {
  std::mt19937_64 rng(45);
  for (int n_log : {3, 4}) {
    const int n = 1 << n_log;
    const int k = (3 * n) / 4;
    const auto table = ga_reliability(n_log, 4.0);
    const auto config = select_code(capacity_sequence(table), n, k);
    const auto spec = make_frozen_spec(config);
    const double params[] = {1.0, -2.0};
    const auto schedule = make_harq_schedule(config, spec, 3, params);
    for (int trial = 0; trial < 40; ++trial) {
      HarqSession session(schedule, random_bits(k, rng));
      const BitVector round1 = session.block(1);
      const BitVector round2 = session.block(2);
      session.block(3);
      // re-derive earlier blocks after the whole chain is encoded
      CHECK(session.block(1) == round1);
      CHECK(session.block(2) == round2);
    }
  }
}

TEST_CASE("harq_decode with one round equals plain sc decode") {
  std::mt19937_64 rng(46);
  const auto config = bec_config(3, 6, 0.25);
  const auto spec = make_frozen_spec(config);
  const double params[] = {0.5};
  const auto schedule = make_harq_schedule(config, spec, 2, params);
  const ChannelModel channel{ChannelKind::bec, 0.2};
  for (int trial = 0; trial < 100; ++trial) {
    HarqSession session(schedule, random_bits(6, rng));
    const LlrVector llr = transmit(session.block(1), channel, rng);
    session.push_received(llr);
    const auto combined = session.decode({});
    const auto plain = sc_decode(llr, spec);
    CHECK(combined.u_hat == plain.u_hat);
  }
}

TEST_CASE("two-round decode is exact without noise") {
  const auto config = bec_config(3, 6, 0.25);
  const auto spec = make_frozen_spec(config);
  const double params[] = {0.5};
  const auto schedule = make_harq_schedule(config, spec, 2, params);
  for (int m = 0; m < 64; ++m) {
    BitVector message(6);
    for (int j = 0; j < 6; ++j) message[j] = (m >> j) & 1;
    HarqSession session(schedule, message);
    session.push_received(perfect_llrs(session.block(1)));
    session.push_received(perfect_llrs(session.block(2)));
    CHECK(session.decode({}).message == message);
  }
}

TEST_CASE("combined decoding equals the directly assembled doubled code") {
  // exhaustive: every message and every erasure pattern of weight <= 2 in
  // each transmitted half
  const auto parent = bec_spec(3, 6, 0.25);
  const auto config = bec_config(3, 6, 0.25);
  const double params[] = {0.5};
  const auto schedule = make_harq_schedule(config, parent, 2, params);
  const auto plan = schedule.chain[0];
  const auto spec16 = schedule.round_specs[1];

  const auto patterns = subsets_up_to_weight(8, 2);
  REQUIRE(patterns.size() == 37);

  for (int m = 0; m < 64; ++m) {
    BitVector message(6);
    for (int j = 0; j < 6; ++j) message[j] = (m >> j) & 1;
    const BitVector parent_u = build_source(message, parent);
    const BitVector round1 = encode(parent_u);
    const BitVector round2 = encode_retransmission(plan, parent_u);
    const BitVector full16 = encode(assemble_extended_source(plan, parent_u));

    for (const auto& erase1 : patterns) {
      for (const auto& erase2 : patterns) {
        LlrVector llr1 = perfect_llrs(round1);
        for (int e : erase1) llr1[e] = 0.0;
        LlrVector llr2 = perfect_llrs(round2);
        for (int e : erase2) llr2[e] = 0.0;

        const LlrVector segments[] = {llr1, llr2};
        const auto harq = harq_decode(schedule, segments, {});

        LlrVector monolithic = perfect_llrs(full16);
        for (int e : erase2) monolithic[e] = 0.0;
        for (int e : erase1) monolithic[8 + e] = 0.0;
        const auto direct = sc_decode(monolithic, spec16);

        CHECK(harq.u_hat == direct.u_hat);
      }
    }
  }
}

TEST_CASE("incremental freezing baseline basics") {
  std::mt19937_64 rng(47);
  const auto config = bec_config(4, 8, 0.2);
  const auto baseline = make_if_baseline(config, std::nullopt, 4, 0.45);
  REQUIRE(baseline.refrozen.size() == 4);
  CHECK(baseline.retx_config.info_count == 4);

  // noiseless: exact recovery through both rounds
  for (int trial = 0; trial < 20; ++trial) {
    const BitVector message = random_bits(8, rng);
    const BitVector parent_u = build_source(message, baseline.parent_spec);
    const LlrVector first = perfect_llrs(encode(parent_u));
    const LlrVector retx =
        perfect_llrs(if_retransmission(baseline, parent_u));
    CHECK(if_decode(baseline, first, &retx, {}).message == message);
  }

  // k' = 0 degenerates to the plain round-1 decode
  const auto trivial = make_if_baseline(config, std::nullopt, 0, 0.45);
  const ChannelModel channel{ChannelKind::bec, 0.35};
  for (int trial = 0; trial < 20; ++trial) {
    const BitVector message = random_bits(8, rng);
    const BitVector parent_u = build_source(message, trivial.parent_spec);
    const LlrVector first = transmit(encode(parent_u), channel, rng);
    const LlrVector retx =
        transmit(if_retransmission(trivial, parent_u), channel, rng);
    const auto with_retx = if_decode(trivial, first, &retx, {});
    const auto without = if_decode(trivial, first, nullptr, {});
    CHECK(with_retx.u_hat == without.u_hat);
  }
}

TEST_CASE("extended code tracks the directly constructed code at 1 dB") {
  // (128,64) extended to (256,64) versus a direct (256,64) construction,
  // same AWGN channel: block error rates agree within 3 binomial standard
  // errors (10^4 trials).
  const int trials = 10000;
  const double snr_db = 1.0;

  SimConfig proposed;
  proposed.scheme = Scheme::proposed;
  proposed.block_length = 128;
  proposed.message_bits = 64;
  proposed.channel = ChannelKind::awgn_qpsk;
  proposed.channel_params = {snr_db};
  proposed.max_rounds = 2;
  proposed.design_params = {4.0, 1.0};
  proposed.trials = trials;
  proposed.seed = 99;

  SimConfig direct = proposed;
  direct.scheme = Scheme::direct;

  const auto harq_result = monte_carlo(proposed);
  const auto direct_result = monte_carlo(direct);

  const RoundStats& harq_round2 = harq_result.points[0].rounds[1];
  const RoundStats& direct_round = direct_result.points[0].rounds[0];
  const double diff = std::abs(harq_round2.bler - direct_round.bler);
  const double sigma = std::sqrt(harq_round2.stderr_bler * harq_round2.stderr_bler +
                                 direct_round.stderr_bler * direct_round.stderr_bler);
  MESSAGE("extended bler=", harq_round2.bler, " direct bler=",
          direct_round.bler, " diff=", diff, " sigma=", sigma);
  CHECK(diff <= 3.0 * sigma);
}
