#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "polarharq/construction.hpp"

namespace polarharq {

using BitVector = std::vector<std::uint8_t>;
using LlrVector = std::vector<double>;

/// Channel LLR magnitude cap. Part of the determinism contract: noiseless
/// inputs are represented as +/- kLlrClamp.
inline constexpr double kLlrClamp = 300.0;

/// x = u * F^{(x) n} over GF(2) with F = [[1,0],[1,1]], computed with
/// O(N log N) butterfly stages. The transform is an involution.
BitVector encode(BitVector u);

/// CRC over a bit string, MSB-first long division, zero initial register,
/// no reflection. `poly` omits the leading x^length term (0x07 = CRC-8).
struct CrcSpec {
  int length = 8;
  std::uint32_t poly = 0x07;
};

BitVector crc_compute(std::span<const std::uint8_t> message,
                      const CrcSpec& crc);
BitVector crc_attach(std::span<const std::uint8_t> message, const CrcSpec& crc);
bool crc_check(std::span<const std::uint8_t> payload, const CrcSpec& crc);

enum class BitRole : std::uint8_t {
  information,
  frozen,          // forced to frozen_values[i] (zero unless pinned)
  dynamic_frozen,  // forced to the already-decoded value at copy_from[i]
};

/// Per-position decode roles of a polar code, plus the payload layout.
///
/// payload_map lists the u-domain positions carrying message (+CRC) bits in
/// payload order. For a code built by make_frozen_spec it is simply the
/// information set in ascending order; specs derived for code extension keep
/// the original positions (shifted), so a payload bit can sit on a
/// dynamic_frozen position whose value is recovered through its copy partner.
struct FrozenSpec {
  int block_length = 0;
  std::vector<BitRole> roles;
  std::vector<std::int32_t> copy_from;  // partner index, -1 unless dynamic
  BitVector frozen_values;
  std::vector<int> payload_map;
  std::optional<CrcSpec> crc;

  int info_count() const;
  int payload_size() const { return static_cast<int>(payload_map.size()); }
  int message_size() const {
    return payload_size() - (crc ? crc->length : 0);
  }
  void validate() const;

  /// Copy of this spec with the given information positions re-frozen to
  /// known values (incremental-freezing re-decode).
  FrozenSpec with_pinned_bits(
      std::span<const std::pair<int, std::uint8_t>> pins) const;
};

FrozenSpec make_frozen_spec(const CodeConfig& config,
                            std::optional<CrcSpec> crc = std::nullopt);

/// Source vector for `message`: payload bits (message + CRC) at their mapped
/// positions, frozen positions at their forced values, copy partners equal.
BitVector build_source(std::span<const std::uint8_t> message,
                       const FrozenSpec& spec);

BitVector extract_payload(const BitVector& u, const FrozenSpec& spec);
BitVector extract_message(const BitVector& u, const FrozenSpec& spec);

struct DecodeOptions {
  bool min_sum = false;  // min-sum check-node rule instead of exact tanh rule
};

struct DecodeResult {
  BitVector u_hat;
  BitVector message;   // payload without CRC
  BitVector codeword;  // re-encoded hard decisions
  bool crc_ok = true;  // true when the spec carries no CRC
};

/// Successive cancellation decoder. Owns scratch buffers; one instance must
/// not be shared mid-decode, independent instances may run concurrently.
class ScDecoder {
 public:
  explicit ScDecoder(DecodeOptions options = {}) : options_(options) {}
  DecodeResult decode(const LlrVector& llr, const FrozenSpec& spec);

 private:
  DecodeOptions options_;
  std::vector<std::vector<double>> llr_;        // llr_[d] has 2^d entries
  std::vector<std::vector<std::uint8_t>> bits_;  // partial sums per level
};

DecodeResult sc_decode(const LlrVector& llr, const FrozenSpec& spec,
                       const DecodeOptions& options = {});

/// Per-stage path metric envelope of a list decode (one entry per bit index).
struct ListTrace {
  std::vector<double> best_pm;
  std::vector<double> worst_pm;
};

/// LLR-based successive cancellation list decoder. Information bits fork
/// paths, frozen and dynamic-frozen bits extend every path with its forced
/// value. With a CRC the best-metric CRC-passing path wins, otherwise (and
/// as fallback) the best-metric path. L = 1 reproduces sc_decode bit-exactly.
class ScListDecoder {
 public:
  explicit ScListDecoder(int list_size, DecodeOptions options = {});
  DecodeResult decode(const LlrVector& llr, const FrozenSpec& spec,
                      ListTrace* trace = nullptr);

 private:
  int list_size_;
  DecodeOptions options_;
};

DecodeResult scl_decode(const LlrVector& llr, const FrozenSpec& spec,
                        int list_size, const DecodeOptions& options = {});

}  // namespace polarharq
