#include "polarharq/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace polarharq {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

double clamp_llr(double v) {
  return std::min(std::max(v, -kLlrClamp), kLlrClamp);
}

// Exact check-node rule 2*atanh(tanh(a/2)*tanh(b/2)) in its numerically
// stable Jacobian form.
double boxplus(double a, double b, bool min_sum) {
  const double sign = ((a < 0.0) != (b < 0.0)) ? -1.0 : 1.0;
  const double m = sign * std::min(std::abs(a), std::abs(b));
  if (min_sum) return m;
  return m + std::log1p(std::exp(-std::abs(a + b))) -
         std::log1p(std::exp(-std::abs(a - b)));
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// Path metric increment for deciding `bit` against decision LLR `lam`:
// -log P(u = bit | path), i.e. softplus of the mismatch direction.
double path_penalty(std::uint8_t bit, double lam, bool min_sum) {
  const double x = bit ? lam : -lam;
  return min_sum ? std::max(x, 0.0) : softplus(x);
}

// Per-level working buffers of one successive-cancellation pass.
//
// llr[d] holds the 2^d soft values of the span currently being decoded at
// level d; bits[d] holds its partial sums: after the left half of a level-d
// span is done, its re-encoded bits sit in bits[d][0 .. 2^(d-1)).
struct Lattice {
  std::vector<std::vector<double>> llr;
  std::vector<std::vector<std::uint8_t>> bits;

  void reset(int n, const LlrVector& channel) {
    llr.resize(n + 1);
    bits.resize(n + 1);
    for (int d = 0; d <= n; ++d) {
      llr[d].resize(std::size_t{1} << d);
      bits[d].resize(std::size_t{1} << d);
    }
    for (std::size_t i = 0; i < channel.size(); ++i) {
      llr[n][i] = clamp_llr(channel[i]);
    }
  }
};

// Soft updates due before deciding bit phi. Entering a fresh span triggers a
// check-node cascade; crossing into the right half of the level-(t+1) span
// (t = trailing zeros of phi) first consumes that span's left partial sums.
void llr_phase(Lattice& lat, int n, int phi, bool min_sum) {
  int top = n;
  if (phi != 0) {
    const int t = std::countr_zero(static_cast<unsigned>(phi));
    const int d = t + 1;
    const std::size_t half = std::size_t{1} << t;
    for (std::size_t i = 0; i < half; ++i) {
      const double a = lat.llr[d][i];
      const double b = lat.llr[d][i + half];
      lat.llr[d - 1][i] = lat.bits[d][i] ? b - a : b + a;
    }
    top = t;
  }
  for (int d = top; d >= 1; --d) {
    const std::size_t half = std::size_t{1} << (d - 1);
    for (std::size_t i = 0; i < half; ++i) {
      lat.llr[d - 1][i] =
          boxplus(lat.llr[d][i], lat.llr[d][i + half], min_sum);
    }
  }
}

// Partial-sum updates after deciding bit phi. A finished left half is saved
// into its parent's buffer; a finished right half combines with it, possibly
// cascading further up.
void bit_phase(Lattice& lat, int n, int phi, std::uint8_t bit) {
  lat.bits[0][0] = bit;
  for (int d = 1; d <= n; ++d) {
    const std::size_t span = std::size_t{1} << d;
    const std::size_t half = span >> 1;
    const std::size_t r = static_cast<std::size_t>(phi + 1) & (span - 1);
    if (r == half) {
      std::copy(lat.bits[d - 1].begin(), lat.bits[d - 1].begin() + half,
                lat.bits[d].begin());
      break;
    }
    if (r != 0) break;
    for (std::size_t i = 0; i < half; ++i) {
      lat.bits[d][i] ^= lat.bits[d - 1][i];
      lat.bits[d][i + half] = lat.bits[d - 1][i];
    }
  }
}

DecodeResult finish_result(BitVector u, BitVector codeword,
                           const FrozenSpec& spec) {
  DecodeResult result;
  result.u_hat = std::move(u);
  result.codeword = std::move(codeword);
  result.message = extract_message(result.u_hat, spec);
  result.crc_ok =
      spec.crc ? crc_check(extract_payload(result.u_hat, spec), *spec.crc)
               : true;
  return result;
}

}  // namespace

BitVector encode(BitVector u) {
  const std::size_t n = u.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("encode: length must be a power of two");
  }
  for (std::size_t stride = 1; stride < n; stride <<= 1) {
    for (std::size_t base = 0; base < n; base += 2 * stride) {
      for (std::size_t j = 0; j < stride; ++j) {
        u[base + j] ^= u[base + stride + j];
      }
    }
  }
  return u;
}

BitVector crc_compute(std::span<const std::uint8_t> message,
                      const CrcSpec& crc) {
  if (crc.length < 1 || crc.length > 32) {
    throw std::invalid_argument("crc: length must be in [1, 32]");
  }
  const std::uint64_t mask = (crc.length == 32)
                                 ? 0xFFFFFFFFull
                                 : ((1ull << crc.length) - 1);
  std::uint64_t reg = 0;
  for (std::uint8_t bit : message) {
    const std::uint64_t feedback = ((reg >> (crc.length - 1)) ^ bit) & 1u;
    reg = (reg << 1) & mask;
    if (feedback) reg ^= crc.poly & mask;
  }
  BitVector out(crc.length);
  for (int i = 0; i < crc.length; ++i) {
    out[i] = static_cast<std::uint8_t>((reg >> (crc.length - 1 - i)) & 1u);
  }
  return out;
}

BitVector crc_attach(std::span<const std::uint8_t> message,
                     const CrcSpec& crc) {
  BitVector out(message.begin(), message.end());
  const BitVector tail = crc_compute(message, crc);
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

bool crc_check(std::span<const std::uint8_t> payload, const CrcSpec& crc) {
  if (static_cast<int>(payload.size()) < crc.length) {
    throw std::invalid_argument("crc_check: payload shorter than CRC");
  }
  const std::size_t split = payload.size() - crc.length;
  const BitVector expected = crc_compute(payload.subspan(0, split), crc);
  return std::equal(expected.begin(), expected.end(),
                    payload.begin() + split);
}

int FrozenSpec::info_count() const {
  return static_cast<int>(
      std::count(roles.begin(), roles.end(), BitRole::information));
}

void FrozenSpec::validate() const {
  const std::size_t n = static_cast<std::size_t>(block_length);
  if (!is_power_of_two(block_length)) {
    throw std::invalid_argument("FrozenSpec: block length must be a power of two");
  }
  if (roles.size() != n || copy_from.size() != n || frozen_values.size() != n) {
    throw std::invalid_argument("FrozenSpec: field sizes disagree with block length");
  }
  for (int i = 0; i < block_length; ++i) {
    if (roles[i] == BitRole::dynamic_frozen) {
      if (copy_from[i] < 0 || copy_from[i] >= i) {
        throw std::invalid_argument(
            "FrozenSpec: dynamic partner must be decoded first");
      }
    } else if (copy_from[i] != -1) {
      throw std::invalid_argument("FrozenSpec: copy_from set on non-dynamic position");
    }
  }
  for (int pos : payload_map) {
    if (pos < 0 || pos >= block_length) {
      throw std::invalid_argument("FrozenSpec: payload position out of range");
    }
  }
  if (crc && (crc->length < 1 || crc->length > payload_size())) {
    throw std::invalid_argument("FrozenSpec: CRC longer than payload");
  }
}

FrozenSpec FrozenSpec::with_pinned_bits(
    std::span<const std::pair<int, std::uint8_t>> pins) const {
  FrozenSpec out = *this;
  for (const auto& [pos, value] : pins) {
    if (pos < 0 || pos >= block_length ||
        out.roles[pos] != BitRole::information) {
      throw std::invalid_argument("with_pinned_bits: position is not an information bit");
    }
    out.roles[pos] = BitRole::frozen;
    out.frozen_values[pos] = value & 1u;
  }
  return out;
}

FrozenSpec make_frozen_spec(const CodeConfig& config,
                            std::optional<CrcSpec> crc) {
  if (!is_power_of_two(config.block_length)) {
    throw std::invalid_argument("make_frozen_spec: N must be a power of two");
  }
  FrozenSpec spec;
  spec.block_length = config.block_length;
  spec.roles.assign(config.block_length, BitRole::frozen);
  spec.copy_from.assign(config.block_length, -1);
  spec.frozen_values.assign(config.block_length, 0);
  for (int pos : config.info_set) {
    if (pos < 0 || pos >= config.block_length) {
      throw std::invalid_argument("make_frozen_spec: info index out of range");
    }
    spec.roles[pos] = BitRole::information;
  }
  spec.payload_map = config.info_set;
  std::sort(spec.payload_map.begin(), spec.payload_map.end());
  spec.crc = crc;
  spec.validate();
  return spec;
}

BitVector build_source(std::span<const std::uint8_t> message,
                       const FrozenSpec& spec) {
  spec.validate();
  if (static_cast<int>(message.size()) != spec.message_size()) {
    throw std::invalid_argument("build_source: message length mismatch");
  }
  BitVector payload(message.begin(), message.end());
  if (spec.crc) {
    const BitVector tail = crc_compute(message, *spec.crc);
    payload.insert(payload.end(), tail.begin(), tail.end());
  }

  const int n = spec.block_length;
  BitVector u(n, 0);
  std::vector<char> known(n, 0);
  for (int i = 0; i < n; ++i) {
    if (spec.roles[i] == BitRole::frozen) {
      u[i] = spec.frozen_values[i];
      known[i] = 1;
    }
  }
  for (std::size_t j = 0; j < payload.size(); ++j) {
    u[spec.payload_map[j]] = payload[j];
    known[spec.payload_map[j]] = 1;
  }

  // Copy constraints u[i] == u[partner] propagate from whichever side is
  // seeded; chains from repeated extension are short, so sweep to fixpoint.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      if (spec.roles[i] != BitRole::dynamic_frozen) continue;
      const int partner = spec.copy_from[i];
      if (known[i] && !known[partner]) {
        u[partner] = u[i];
        known[partner] = 1;
        changed = true;
      } else if (known[partner] && !known[i]) {
        u[i] = u[partner];
        known[i] = 1;
        changed = true;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!known[i] && spec.roles[i] != BitRole::information) {
      throw std::invalid_argument("build_source: unresolved copy constraint");
    }
  }
  return u;
}

BitVector extract_payload(const BitVector& u, const FrozenSpec& spec) {
  BitVector payload(spec.payload_map.size());
  for (std::size_t j = 0; j < spec.payload_map.size(); ++j) {
    payload[j] = u[spec.payload_map[j]];
  }
  return payload;
}

BitVector extract_message(const BitVector& u, const FrozenSpec& spec) {
  BitVector payload = extract_payload(u, spec);
  payload.resize(spec.message_size());
  return payload;
}

DecodeResult ScDecoder::decode(const LlrVector& llr, const FrozenSpec& spec) {
  spec.validate();
  const int block = spec.block_length;
  if (static_cast<int>(llr.size()) != block) {
    throw std::invalid_argument("sc_decode: LLR length mismatch");
  }
  const int n = std::countr_zero(static_cast<unsigned>(block));

  Lattice lat;
  lat.llr = std::move(llr_);
  lat.bits = std::move(bits_);
  lat.reset(n, llr);

  BitVector u(block);
  for (int phi = 0; phi < block; ++phi) {
    llr_phase(lat, n, phi, options_.min_sum);
    std::uint8_t bit = 0;
    switch (spec.roles[phi]) {
      case BitRole::information:
        bit = lat.llr[0][0] < 0.0 ? 1 : 0;  // tie (exactly 0) decides 0
        break;
      case BitRole::frozen:
        bit = spec.frozen_values[phi];
        break;
      case BitRole::dynamic_frozen:
        bit = u[spec.copy_from[phi]];
        break;
    }
    u[phi] = bit;
    bit_phase(lat, n, phi, bit);
  }

  BitVector codeword = lat.bits[n];
  llr_ = std::move(lat.llr);
  bits_ = std::move(lat.bits);
  return finish_result(std::move(u), std::move(codeword), spec);
}

DecodeResult sc_decode(const LlrVector& llr, const FrozenSpec& spec,
                       const DecodeOptions& options) {
  ScDecoder decoder(options);
  return decoder.decode(llr, spec);
}

ScListDecoder::ScListDecoder(int list_size, DecodeOptions options)
    : list_size_(list_size), options_(options) {
  if (list_size < 1) {
    throw std::invalid_argument("scl_decode: list size must be >= 1");
  }
}

DecodeResult ScListDecoder::decode(const LlrVector& llr,
                                   const FrozenSpec& spec, ListTrace* trace) {
  spec.validate();
  const int block = spec.block_length;
  if (static_cast<int>(llr.size()) != block) {
    throw std::invalid_argument("scl_decode: LLR length mismatch");
  }
  const int n = std::countr_zero(static_cast<unsigned>(block));
  const bool min_sum = options_.min_sum;

  struct Path {
    Lattice lat;
    BitVector u;
    double pm = 0.0;
  };

  std::vector<Path> paths(1);
  paths[0].lat.reset(n, llr);
  paths[0].u.resize(block);

  struct Candidate {
    int parent;
    std::uint8_t bit;
    double pm;
  };
  std::vector<Candidate> candidates;
  std::vector<int> pick;

  for (int phi = 0; phi < block; ++phi) {
    for (Path& p : paths) llr_phase(p.lat, n, phi, min_sum);

    if (spec.roles[phi] == BitRole::information) {
      candidates.clear();
      for (std::size_t i = 0; i < paths.size(); ++i) {
        const double lam = paths[i].lat.llr[0][0];
        candidates.push_back(
            {static_cast<int>(i), 0, paths[i].pm + path_penalty(0, lam, min_sum)});
        candidates.push_back(
            {static_cast<int>(i), 1, paths[i].pm + path_penalty(1, lam, min_sum)});
      }
      pick.resize(candidates.size());
      for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = static_cast<int>(i);
      if (candidates.size() > static_cast<std::size_t>(list_size_)) {
        // Ties keep the earlier candidate: lower parent path, then bit 0.
        std::stable_sort(pick.begin(), pick.end(), [&](int a, int b) {
          return candidates[a].pm < candidates[b].pm;
        });
        pick.resize(list_size_);
      }
      std::vector<Path> next;
      next.reserve(pick.size());
      for (int idx : pick) {
        const Candidate& c = candidates[idx];
        next.push_back(paths[c.parent]);
        Path& p = next.back();
        p.pm = c.pm;
        p.u[phi] = c.bit;
        bit_phase(p.lat, n, phi, c.bit);
      }
      paths = std::move(next);
    } else {
      for (Path& p : paths) {
        const std::uint8_t bit = spec.roles[phi] == BitRole::frozen
                                     ? spec.frozen_values[phi]
                                     : p.u[spec.copy_from[phi]];
        p.pm += path_penalty(bit, p.lat.llr[0][0], min_sum);
        p.u[phi] = bit;
        bit_phase(p.lat, n, phi, bit);
      }
    }

    if (trace) {
      double best = paths[0].pm;
      double worst = paths[0].pm;
      for (const Path& p : paths) {
        best = std::min(best, p.pm);
        worst = std::max(worst, p.pm);
      }
      trace->best_pm.push_back(best);
      trace->worst_pm.push_back(worst);
    }
  }

  std::vector<int> order(paths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return paths[a].pm < paths[b].pm;
  });

  int winner = order[0];
  if (spec.crc) {
    for (int idx : order) {
      if (crc_check(extract_payload(paths[idx].u, spec), *spec.crc)) {
        winner = idx;
        break;
      }
    }
  }
  return finish_result(std::move(paths[winner].u),
                       std::move(paths[winner].lat.bits[n]), spec);
}

DecodeResult scl_decode(const LlrVector& llr, const FrozenSpec& spec,
                        int list_size, const DecodeOptions& options) {
  ScListDecoder decoder(list_size, options);
  return decoder.decode(llr, spec, nullptr);
}

}  // namespace polarharq
