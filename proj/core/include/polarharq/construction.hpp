#pragma once

#include <string>
#include <vector>

namespace polarharq {

/// Quality metric stored in a ReliabilityTable.
enum class Metric {
  bec_erasure,  ///< per-channel erasure probability in [0, 1], lower is better
  ga_mean,      ///< Gaussian-approximation mean LLR >= 0, higher is better
};

std::string to_string(Metric metric);
Metric metric_from_string(const std::string& name);

/// Per synthetic-channel quality for a length-2^n polar code.
///
/// Channels use the natural (Arikan) index order of the u-domain: index 0 is
/// the least reliable end of the transform, index 2^n - 1 the most reliable.
/// External JSON and CLI output convert to 1-based canonical indices.
struct ReliabilityTable {
  int n = 0;  ///< log2 of code length
  Metric kind = Metric::bec_erasure;
  double design_param = 0.0;  ///< erasure probability or design SNR in dB
  std::vector<double> values;

  int block_length() const { return 1 << n; }
};

/// Channel indices sorted most reliable first (ties by ascending index).
struct CapacitySequence {
  std::vector<int> order;  // 0-based channel indices, best channel first
  Metric metric = Metric::bec_erasure;
  double design_param = 0.0;
};

/// Information/frozen split of a length-N polar code.
struct CodeConfig {
  int block_length = 0;
  int info_count = 0;
  std::vector<int> info_set;    // ascending, 0-based
  std::vector<int> frozen_set;  // ascending, 0-based
  Metric metric = Metric::bec_erasure;
  double design_param = 0.0;
};

/// Uniform comparison key: higher key means a more reliable channel,
/// independent of the metric kind.
inline double reliability_key(Metric kind, double value) {
  return kind == Metric::bec_erasure ? -value : value;
}

/// Erasure probabilities of the 2^n synthetic BEC channels at channel
/// erasure probability p. The check-side child of a channel with erasure z
/// has erasure 2z - z^2, the variable-side child z^2.
ReliabilityTable bec_reliability(int n, double p);

/// Mean-LLR tracking function of the Gaussian approximation. Two closed
/// forms switching at x = 10; the small-x branch uses exponent +0.86 and is
/// capped at 1 so the range stays (0, 1].
double phi(double x);

/// Inverse of phi by bisection on the matching branch (absolute tolerance
/// 1e-9, bracket [0, 1e4]). phi_inv(1) = 0 exactly.
double phi_inv(double y);

/// Gaussian-approximation construction from an explicit root mean LLR.
/// Variable-side children double the mean exactly; check-side children go
/// through phi_inv(1 - (1 - phi(m))^2). Means are clamped at 1e4.
ReliabilityTable ga_reliability_from_mean(int n, double root_mean);

/// Gaussian-approximation construction at a design SNR in dB. The root mean
/// is 2/sigma^2 with sigma^2 = 10^(-snr/10), the per-binary-channel noise
/// variance of a unit-amplitude AWGN channel (QPSK at Es/N0 = snr behaves as
/// two such channels).
ReliabilityTable ga_reliability(int n, double design_snr_db);

/// Sort channels best first; equal metrics order by ascending index so the
/// construction is fully deterministic.
CapacitySequence capacity_sequence(const ReliabilityTable& table);

/// Take the top `info_count` channels of the sequence as the information
/// set and freeze the rest.
CodeConfig select_code(const CapacitySequence& sequence, int block_length,
                       int info_count);

}  // namespace polarharq
