#include "polarharq/construction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace polarharq {

namespace {

constexpr double kGaMeanClamp = 1e4;
constexpr double kPhiFloor = 1e-300;
constexpr double kPhiBranch = 10.0;
constexpr double kPhiInvTol = 1e-9;

double phi_small(double x) {
  return std::exp(-0.4527 * std::pow(x, 0.86) + 0.0218);
}

double phi_large(double x) {
  return std::sqrt(std::numbers::pi / x) * (1.0 - 10.0 / (7.0 * x)) *
         std::exp(-x / 4.0);
}

// Bisection for phi(x) == y on [lo, hi]; phi is strictly decreasing there.
double invert_branch(double y, double lo, double hi) {
  while (hi - lo > kPhiInvTol) {
    const double mid = 0.5 * (lo + hi);
    if (phi(mid) > y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::string to_string(Metric metric) {
  return metric == Metric::bec_erasure ? "bec_erasure" : "ga_mean";
}

Metric metric_from_string(const std::string& name) {
  if (name == "bec_erasure") return Metric::bec_erasure;
  if (name == "ga_mean") return Metric::ga_mean;
  throw std::invalid_argument("unknown metric kind: " + name);
}

ReliabilityTable bec_reliability(int n, double p) {
  if (n < 0) throw std::invalid_argument("bec_reliability: n must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(
        "bec_reliability: erasure probability must be in [0, 1]");
  }
  std::vector<double> z{p};
  for (int level = 0; level < n; ++level) {
    std::vector<double> next(z.size() * 2);
    for (std::size_t i = 0; i < z.size(); ++i) {
      next[2 * i] = 2.0 * z[i] - z[i] * z[i];
      next[2 * i + 1] = z[i] * z[i];
    }
    z = std::move(next);
  }
  return {n, Metric::bec_erasure, p, std::move(z)};
}

double phi(double x) {
  if (x < 0.0) throw std::invalid_argument("phi: x must be non-negative");
  if (x == 0.0) return 1.0;
  // The small-x closed form exceeds 1 below x ~= 0.03; cap it there.
  const double v = x < kPhiBranch ? std::min(phi_small(x), 1.0) : phi_large(x);
  return std::max(v, kPhiFloor);
}

double phi_inv(double y) {
  if (!(y > 0.0 && y <= 1.0)) {
    throw std::invalid_argument("phi_inv: y must be in (0, 1]");
  }
  if (y == 1.0) return 0.0;
  const double seam = phi_small(kPhiBranch);
  if (y >= seam) return invert_branch(y, 0.0, kPhiBranch);
  return invert_branch(y, kPhiBranch, kGaMeanClamp);
}

ReliabilityTable ga_reliability_from_mean(int n, double root_mean) {
  if (n < 0) {
    throw std::invalid_argument("ga_reliability: n must be >= 0");
  }
  if (!(root_mean >= 0.0)) {
    throw std::invalid_argument("ga_reliability: root mean must be >= 0");
  }
  std::vector<double> m{std::min(root_mean, kGaMeanClamp)};
  for (int level = 0; level < n; ++level) {
    std::vector<double> next(m.size() * 2);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0.0) {
        next[2 * i] = 0.0;
      } else {
        const double t = phi(m[i]);
        next[2 * i] = phi_inv(t * (2.0 - t));
      }
      next[2 * i + 1] = std::min(2.0 * m[i], kGaMeanClamp);
    }
    m = std::move(next);
  }
  return {n, Metric::ga_mean, 0.0, std::move(m)};
}

ReliabilityTable ga_reliability(int n, double design_snr_db) {
  const double sigma_sq = std::pow(10.0, -design_snr_db / 10.0);
  ReliabilityTable table = ga_reliability_from_mean(n, 2.0 / sigma_sq);
  table.design_param = design_snr_db;
  return table;
}

CapacitySequence capacity_sequence(const ReliabilityTable& table) {
  if (static_cast<int>(table.values.size()) != table.block_length()) {
    throw std::invalid_argument("capacity_sequence: table length != 2^n");
  }
  std::vector<int> order(table.values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ka = reliability_key(table.kind, table.values[a]);
    const double kb = reliability_key(table.kind, table.values[b]);
    if (ka != kb) return ka > kb;
    return a < b;
  });
  return {std::move(order), table.kind, table.design_param};
}

CodeConfig select_code(const CapacitySequence& sequence, int block_length,
                       int info_count) {
  const int n_channels = static_cast<int>(sequence.order.size());
  if (block_length != n_channels) {
    throw std::invalid_argument("select_code: block length != sequence size");
  }
  if (info_count < 0 || info_count > block_length) {
    throw std::invalid_argument("select_code: need 0 <= K <= N");
  }
  CodeConfig config;
  config.block_length = block_length;
  config.info_count = info_count;
  config.metric = sequence.metric;
  config.design_param = sequence.design_param;
  config.info_set.assign(sequence.order.begin(),
                         sequence.order.begin() + info_count);
  config.frozen_set.assign(sequence.order.begin() + info_count,
                           sequence.order.end());
  std::sort(config.info_set.begin(), config.info_set.end());
  std::sort(config.frozen_set.begin(), config.frozen_set.end());
  return config;
}

}  // namespace polarharq
