#include "polarharq/io.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace polarharq {

namespace {

using nlohmann::json;

std::vector<int> to_one_based(std::span<const int> indices) {
  std::vector<int> out(indices.begin(), indices.end());
  for (int& i : out) ++i;
  return out;
}

std::string fmt(const char* format, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), format, value);
  return buffer;
}

}  // namespace

std::string code_config_to_json(const ReliabilityTable& table,
                                const CodeConfig& config) {
  if (table.block_length() != config.block_length) {
    throw std::invalid_argument("code_config_to_json: table/config mismatch");
  }
  json doc;
  doc["n"] = table.n;
  doc["metric_kind"] = to_string(table.kind);
  doc["design_param"] = table.design_param;
  doc["values"] = table.values;
  doc["info_set"] = to_one_based(config.info_set);
  return doc.dump(2) + "\n";
}

LoadedCode code_config_from_json(const std::string& text) {
  const json doc = json::parse(text);
  LoadedCode loaded;
  loaded.table.n = doc.at("n").get<int>();
  loaded.table.kind = metric_from_string(doc.at("metric_kind").get<std::string>());
  loaded.table.design_param = doc.at("design_param").get<double>();
  loaded.table.values = doc.at("values").get<std::vector<double>>();
  if (static_cast<int>(loaded.table.values.size()) !=
      loaded.table.block_length()) {
    throw std::invalid_argument("code config JSON: values length != 2^n");
  }

  loaded.config.block_length = loaded.table.block_length();
  loaded.config.metric = loaded.table.kind;
  loaded.config.design_param = loaded.table.design_param;
  for (int idx : doc.at("info_set").get<std::vector<int>>()) {
    if (idx < 1 || idx > loaded.config.block_length) {
      throw std::invalid_argument("code config JSON: info index out of range");
    }
    loaded.config.info_set.push_back(idx - 1);
  }
  std::sort(loaded.config.info_set.begin(), loaded.config.info_set.end());
  loaded.config.info_count = static_cast<int>(loaded.config.info_set.size());
  std::vector<char> is_info(loaded.config.block_length, 0);
  for (int idx : loaded.config.info_set) is_info[idx] = 1;
  for (int idx = 0; idx < loaded.config.block_length; ++idx) {
    if (!is_info[idx]) loaded.config.frozen_set.push_back(idx);
  }
  return loaded;
}

namespace {

json plan_to_json_object(const ExtensionPlan& plan) {
  json doc;
  doc["parent_N"] = plan.parent_block_length;
  doc["design_param"] = plan.design_param;
  json pairs = json::array();
  for (const CopyPair& pair : plan.pairs) {
    pairs.push_back(json::array({pair.source + 1, pair.target + 1}));
  }
  doc["pairs"] = std::move(pairs);
  doc["effective_info_set"] = to_one_based(plan.effective_info_set);
  return doc;
}

}  // namespace

std::string plan_to_json(const ExtensionPlan& plan) {
  return plan_to_json_object(plan).dump(2) + "\n";
}

std::string chain_to_json(std::span<const ExtensionPlan> chain) {
  json doc = json::array();
  for (const ExtensionPlan& plan : chain) {
    doc.push_back(plan_to_json_object(plan));
  }
  return doc.dump(2) + "\n";
}

void write_csv(std::ostream& out, const SimResult& result,
               const char* scheme_label, bool with_header) {
  if (with_header) {
    if (scheme_label != nullptr) out << "scheme,";
    out << kCsvHeader << "\n";
  }
  for (const PointResult& point : result.points) {
    for (std::size_t r = 0; r < point.rounds.size(); ++r) {
      const RoundStats& stats = point.rounds[r];
      if (scheme_label != nullptr) out << scheme_label << ",";
      out << fmt("%.6g", point.channel_param) << "," << (r + 1) << ","
          << stats.trials << "," << stats.block_errors << ","
          << stats.bit_errors << "," << fmt("%.8e", stats.bler) << ","
          << fmt("%.8e", stats.ber) << "," << fmt("%.6f", stats.t_bar) << ","
          << fmt("%.8e", stats.throughput) << ","
          << fmt("%.8e", stats.stderr_bler) << "\n";
    }
  }
}

std::string result_to_csv(const SimResult& result, const char* scheme_label,
                          bool with_header) {
  std::ostringstream out;
  write_csv(out, result, scheme_label, with_header);
  return out.str();
}

}  // namespace polarharq
