#pragma once

#include <ostream>
#include <span>
#include <string>

#include "polarharq/harq.hpp"
#include "polarharq/sim.hpp"

namespace polarharq {

// All JSON and CSV output uses 1-based canonical channel indices; the
// in-memory API is 0-based.

/// {n, metric_kind, design_param, values[], info_set[]}
std::string code_config_to_json(const ReliabilityTable& table,
                                const CodeConfig& config);

struct LoadedCode {
  ReliabilityTable table;
  CodeConfig config;
};
LoadedCode code_config_from_json(const std::string& text);

/// {parent_N, design_param, pairs[[source,target]...], effective_info_set[]}
std::string plan_to_json(const ExtensionPlan& plan);

/// JSON array of plan objects, one per extension round.
std::string chain_to_json(std::span<const ExtensionPlan> chain);

inline constexpr const char* kCsvHeader =
    "snr_db,round,trials,block_errors,bit_errors,bler,ber,t_bar,throughput,"
    "stderr_bler";

/// CSV rows per (channel parameter, round). A non-null scheme label prepends
/// a `scheme` column (joined output of the compare command).
void write_csv(std::ostream& out, const SimResult& result,
               const char* scheme_label = nullptr,
               bool with_header = true);

std::string result_to_csv(const SimResult& result,
                          const char* scheme_label = nullptr,
                          bool with_header = true);

}  // namespace polarharq
