#include "polarharq/harq.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace polarharq {

namespace {

ReliabilityTable build_table(Metric metric, int n, double design_param) {
  return metric == Metric::bec_erasure ? bec_reliability(n, design_param)
                                       : ga_reliability(n, design_param);
}

// Positions sorted least reliable first, ties by ascending index.
std::vector<int> by_ascending_reliability(const ReliabilityTable& table,
                                          std::vector<int> positions) {
  std::sort(positions.begin(), positions.end(), [&](int a, int b) {
    const double ka = reliability_key(table.kind, table.values[a]);
    const double kb = reliability_key(table.kind, table.values[b]);
    if (ka != kb) return ka < kb;
    return a < b;
  });
  return positions;
}

void check_parent_consistency(const ExtensionPlan& plan,
                              const BitVector& parent_u) {
  const FrozenSpec& spec = plan.parent_spec;
  if (static_cast<int>(parent_u.size()) != spec.block_length) {
    throw std::invalid_argument("parent source vector length mismatch");
  }
  for (int i = 0; i < spec.block_length; ++i) {
    if (spec.roles[i] == BitRole::frozen &&
        parent_u[i] != spec.frozen_values[i]) {
      throw std::invalid_argument("parent source violates a frozen value");
    }
    if (spec.roles[i] == BitRole::dynamic_frozen &&
        parent_u[i] != parent_u[spec.copy_from[i]]) {
      throw std::invalid_argument("parent source violates a copy constraint");
    }
  }
}

}  // namespace

ExtensionPlan plan_from_table(const FrozenSpec& parent,
                              const ReliabilityTable& doubled_table) {
  parent.validate();
  const int n_parent = parent.block_length;
  if (doubled_table.block_length() != 2 * n_parent) {
    throw std::invalid_argument("plan_from_table: table is not the doubled code");
  }

  // Parent position p sits at doubled index p + N (the reliable upper half).
  std::vector<int> info;
  for (int p = 0; p < n_parent; ++p) {
    if (parent.roles[p] == BitRole::information) info.push_back(p + n_parent);
  }
  std::vector<int> extension(n_parent);
  for (int i = 0; i < n_parent; ++i) extension[i] = i;

  info = by_ascending_reliability(doubled_table, std::move(info));
  extension = by_ascending_reliability(doubled_table, std::move(extension));

  ExtensionPlan plan;
  plan.parent_block_length = n_parent;
  plan.metric = doubled_table.kind;
  plan.design_param = doubled_table.design_param;
  plan.parent_spec = parent;

  // Weakest information bit first; the matching extension position is the
  // weakest one still strictly better than it. Both thresholds grow, so a
  // single forward pointer over the extension pool suffices.
  std::vector<char> is_target(n_parent, 0);
  std::size_t next_ext = 0;
  for (int source : info) {
    const double source_key =
        reliability_key(doubled_table.kind, doubled_table.values[source]);
    while (next_ext < extension.size() &&
           reliability_key(doubled_table.kind,
                           doubled_table.values[extension[next_ext]]) <=
               source_key) {
      ++next_ext;
    }
    if (next_ext == extension.size()) break;
    const int target = extension[next_ext++];
    plan.pairs.push_back({source, target});
    is_target[target] = 1;
  }

  std::vector<char> is_source(2 * n_parent, 0);
  for (const CopyPair& pair : plan.pairs) is_source[pair.source] = 1;
  for (int t = 0; t < n_parent; ++t) {
    if (is_target[t]) plan.effective_info_set.push_back(t);
  }
  for (int p : info) {
    if (!is_source[p]) plan.effective_info_set.push_back(p);
  }
  std::sort(plan.effective_info_set.begin(), plan.effective_info_set.end());
  return plan;
}

ExtensionPlan plan_extension(const FrozenSpec& parent, Metric metric,
                             double retx_design_param) {
  const int n_parent = parent.block_length;
  const int n_log = std::countr_zero(static_cast<unsigned>(n_parent));
  return plan_from_table(parent,
                         build_table(metric, n_log + 1, retx_design_param));
}

ExtendedCode effective_config(const ExtensionPlan& plan) {
  const FrozenSpec& parent = plan.parent_spec;
  const int n_parent = plan.parent_block_length;
  if (parent.block_length != n_parent) {
    throw std::invalid_argument("effective_config: inconsistent plan");
  }
  const int doubled = 2 * n_parent;

  FrozenSpec spec;
  spec.block_length = doubled;
  spec.roles.assign(doubled, BitRole::frozen);
  spec.copy_from.assign(doubled, -1);
  spec.frozen_values.assign(doubled, 0);

  for (int p = 0; p < n_parent; ++p) {
    const int shifted = p + n_parent;
    spec.roles[shifted] = parent.roles[p];
    spec.frozen_values[shifted] = parent.frozen_values[p];
    if (parent.roles[p] == BitRole::dynamic_frozen) {
      spec.copy_from[shifted] = parent.copy_from[p] + n_parent;
    }
  }
  for (const CopyPair& pair : plan.pairs) {
    spec.roles[pair.target] = BitRole::information;
    spec.roles[pair.source] = BitRole::dynamic_frozen;
    spec.copy_from[pair.source] = pair.target;
  }
  spec.payload_map.reserve(parent.payload_map.size());
  for (int pos : parent.payload_map) {
    spec.payload_map.push_back(pos + n_parent);
  }
  spec.crc = parent.crc;
  spec.validate();

  CodeConfig config;
  config.block_length = doubled;
  config.info_count = static_cast<int>(plan.effective_info_set.size());
  config.info_set = plan.effective_info_set;
  config.metric = plan.metric;
  config.design_param = plan.design_param;
  std::vector<char> is_info(doubled, 0);
  for (int pos : config.info_set) is_info[pos] = 1;
  for (int pos = 0; pos < doubled; ++pos) {
    if (!is_info[pos]) config.frozen_set.push_back(pos);
  }
  return {std::move(config), std::move(spec)};
}

BitVector extension_source(const ExtensionPlan& plan,
                           const BitVector& parent_u) {
  const int n_parent = plan.parent_block_length;
  BitVector low(n_parent, 0);
  for (const CopyPair& pair : plan.pairs) {
    low[pair.target] = parent_u[pair.source - n_parent];
  }
  return low;
}

BitVector encode_retransmission(const ExtensionPlan& plan,
                                const BitVector& parent_u) {
  check_parent_consistency(plan, parent_u);
  BitVector v = extension_source(plan, parent_u);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] ^= parent_u[i];
  return encode(std::move(v));
}

BitVector assemble_extended_source(const ExtensionPlan& plan,
                                   const BitVector& parent_u) {
  BitVector u = extension_source(plan, parent_u);
  u.insert(u.end(), parent_u.begin(), parent_u.end());
  return u;
}

std::vector<ExtensionPlan> plan_chain(const FrozenSpec& parent, Metric metric,
                                      int rounds,
                                      std::span<const double> design_params) {
  if (rounds < 1) throw std::invalid_argument("plan_chain: rounds must be >= 1");
  if (static_cast<int>(design_params.size()) < rounds - 1) {
    throw std::invalid_argument("plan_chain: need a design parameter per extension");
  }
  std::vector<ExtensionPlan> chain;
  FrozenSpec current = parent;
  for (int r = 2; r <= rounds; ++r) {
    chain.push_back(plan_extension(current, metric, design_params[r - 2]));
    current = effective_config(chain.back()).spec;
  }
  return chain;
}

DecodeResult run_decoder(const LlrVector& llr, const FrozenSpec& spec,
                         const DecoderChoice& decoder) {
  if (decoder.kind == DecoderChoice::Kind::sc) {
    return sc_decode(llr, spec, decoder.options);
  }
  return scl_decode(llr, spec, decoder.list_size, decoder.options);
}

int HarqSchedule::block_length(int round) const {
  const int n = parent_config.block_length;
  return round <= 2 ? n : n << (round - 2);
}

int HarqSchedule::combined_length(int rounds) const {
  return parent_config.block_length << (rounds - 1);
}

HarqSchedule make_harq_schedule(const CodeConfig& parent_config,
                                const FrozenSpec& parent_spec, int rounds,
                                std::span<const double> design_params) {
  HarqSchedule schedule;
  schedule.parent_config = parent_config;
  schedule.parent_spec = parent_spec;
  schedule.chain =
      plan_chain(parent_spec, parent_config.metric, rounds, design_params);
  schedule.round_specs.push_back(parent_spec);
  for (const ExtensionPlan& plan : schedule.chain) {
    schedule.round_specs.push_back(effective_config(plan).spec);
  }
  return schedule;
}

LlrVector assemble_harq_llrs(const HarqSchedule& schedule,
                             std::span<const LlrVector> received) {
  const int rounds = static_cast<int>(received.size());
  if (rounds < 1 || rounds > schedule.max_rounds()) {
    throw std::invalid_argument("assemble_harq_llrs: bad round count");
  }
  LlrVector combined = received[0];
  for (int r = 2; r <= rounds; ++r) {
    if (static_cast<int>(received[r - 1].size()) !=
        schedule.block_length(r)) {
      throw std::invalid_argument("assemble_harq_llrs: segment length mismatch");
    }
    LlrVector next(received[r - 1]);
    next.insert(next.end(), combined.begin(), combined.end());
    combined = std::move(next);
  }
  if (static_cast<int>(combined.size()) != schedule.combined_length(rounds)) {
    throw std::invalid_argument("assemble_harq_llrs: segment length mismatch");
  }
  return combined;
}

DecodeResult harq_decode(const HarqSchedule& schedule,
                         std::span<const LlrVector> received,
                         const DecoderChoice& decoder) {
  const LlrVector combined = assemble_harq_llrs(schedule, received);
  return run_decoder(combined, schedule.round_specs[received.size() - 1],
                     decoder);
}

HarqSession::HarqSession(const HarqSchedule& schedule, BitVector message)
    : schedule_(&schedule), message_(std::move(message)) {
  sources_.push_back(build_source(message_, schedule.parent_spec));
  blocks_.push_back(encode(sources_.front()));
}

const BitVector& HarqSession::block(int round) {
  if (round < 1 || round > schedule_->max_rounds()) {
    throw std::invalid_argument("HarqSession: round out of range");
  }
  while (static_cast<int>(blocks_.size()) < round) {
    const int r = static_cast<int>(blocks_.size()) + 1;
    const ExtensionPlan& plan = schedule_->chain[r - 2];
    const BitVector& parent_u = sources_[r - 2];
    blocks_.push_back(encode_retransmission(plan, parent_u));
    sources_.push_back(assemble_extended_source(plan, parent_u));
  }
  return blocks_[round - 1];
}

void HarqSession::push_received(LlrVector segment) {
  const int round = rounds_received() + 1;
  if (round > schedule_->max_rounds()) {
    throw std::invalid_argument("HarqSession: all rounds already received");
  }
  if (static_cast<int>(segment.size()) != schedule_->block_length(round)) {
    throw std::invalid_argument("HarqSession: segment length mismatch");
  }
  received_.push_back(std::move(segment));
}

DecodeResult HarqSession::decode(const DecoderChoice& decoder) const {
  if (received_.empty()) {
    throw std::invalid_argument("HarqSession: nothing received yet");
  }
  return harq_decode(*schedule_, received_, decoder);
}

IfBaseline make_if_baseline(const CodeConfig& parent_config,
                            std::optional<CrcSpec> crc, int kprime,
                            double retx_design_param) {
  IfBaseline baseline;
  baseline.parent_config = parent_config;
  baseline.parent_spec = make_frozen_spec(parent_config, crc);
  const int info_total = baseline.parent_spec.info_count();
  if (kprime < 0 || kprime > info_total) {
    throw std::invalid_argument("make_if_baseline: k' out of range");
  }

  const int n_log =
      std::countr_zero(static_cast<unsigned>(parent_config.block_length));
  const ReliabilityTable table =
      build_table(parent_config.metric, n_log, parent_config.design_param);
  std::vector<int> info = baseline.parent_spec.payload_map;
  info = by_ascending_reliability(table, std::move(info));
  baseline.refrozen.assign(info.begin(), info.begin() + kprime);
  std::sort(baseline.refrozen.begin(), baseline.refrozen.end());

  const ReliabilityTable retx_table =
      build_table(parent_config.metric, n_log, retx_design_param);
  baseline.retx_config = select_code(capacity_sequence(retx_table),
                                     parent_config.block_length, kprime);
  baseline.retx_spec = make_frozen_spec(baseline.retx_config);
  return baseline;
}

BitVector if_retransmission(const IfBaseline& baseline,
                            const BitVector& parent_u) {
  BitVector payload(baseline.refrozen.size());
  for (std::size_t i = 0; i < payload.size(); ++i) {
    payload[i] = parent_u[baseline.refrozen[i]];
  }
  return encode(build_source(payload, baseline.retx_spec));
}

DecodeResult if_decode(const IfBaseline& baseline, const LlrVector& first,
                       const LlrVector* retx, const DecoderChoice& decoder) {
  if (retx == nullptr || baseline.refrozen.empty()) {
    return run_decoder(first, baseline.parent_spec, decoder);
  }
  const DecodeResult retx_result =
      run_decoder(*retx, baseline.retx_spec, decoder);
  std::vector<std::pair<int, std::uint8_t>> pins;
  pins.reserve(baseline.refrozen.size());
  for (std::size_t i = 0; i < baseline.refrozen.size(); ++i) {
    pins.emplace_back(baseline.refrozen[i], retx_result.message[i]);
  }
  return run_decoder(first, baseline.parent_spec.with_pinned_bits(pins),
                     decoder);
}

}  // namespace polarharq
