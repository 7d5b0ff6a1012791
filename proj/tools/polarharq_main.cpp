#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polarharq/io.hpp"

namespace {

using namespace polarharq;
using nlohmann::json;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream stream(text);
  std::string part;
  while (std::getline(stream, part, sep)) parts.push_back(part);
  return parts;
}

// "start:step:stop" (inclusive) or a comma-separated list.
std::vector<double> parse_sweep(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty sweep specification");
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) {
      throw std::invalid_argument("sweep range must be start:step:stop");
    }
    const double start = std::stod(parts[0]);
    const double step = std::stod(parts[1]);
    const double stop = std::stod(parts[2]);
    if (step <= 0.0 || stop < start) {
      throw std::invalid_argument("sweep range needs step > 0 and stop >= start");
    }
    std::vector<double> values;
    const int count =
        static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (int i = 0; i < count; ++i) values.push_back(start + i * step);
    return values;
  }
  std::vector<double> values;
  for (const std::string& part : split(text, ',')) {
    values.push_back(std::stod(part));
  }
  return values;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  for (const std::string& part : split(text, ',')) {
    values.push_back(std::stod(part));
  }
  return values;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int require_power_of_two(int n, const char* what) {
  if (n < 1 || (n & (n - 1)) != 0) {
    throw std::invalid_argument(std::string(what) + " must be a power of two");
  }
  return n;
}

// ---------------------------------------------------------------------------
// construct / plan

struct CodeArgs {
  int n = 8;
  int k = 4;
  double bec = -1.0;
  double ga = 0.0;
  bool has_bec = false;
  bool has_ga = false;
  std::string parent_json;  // plan only
};

std::pair<ReliabilityTable, CodeConfig> build_code(const CodeArgs& args) {
  require_power_of_two(args.n, "--n: N");
  if (args.k < 0 || args.k > args.n) {
    throw std::invalid_argument("--k: need 0 <= K <= N");
  }
  if (args.has_bec == args.has_ga) {
    throw std::invalid_argument("give exactly one of --bec or --ga");
  }
  const int n_log = std::bit_width(static_cast<unsigned>(args.n)) - 1;
  ReliabilityTable table = args.has_bec ? bec_reliability(n_log, args.bec)
                                        : ga_reliability(n_log, args.ga);
  CodeConfig config = select_code(capacity_sequence(table), args.n, args.k);
  return {std::move(table), std::move(config)};
}

int run_construct(const CodeArgs& args, const std::string& out) {
  const auto [table, config] = build_code(args);
  write_text(out, code_config_to_json(table, config));
  return 0;
}

int run_plan(const CodeArgs& args, int rounds, const std::string& retx_params,
             const std::string& out) {
  if (rounds < 1) throw std::invalid_argument("--rounds must be >= 1");

  CodeConfig config;
  if (!args.parent_json.empty()) {
    std::ifstream in(args.parent_json);
    if (!in) throw std::runtime_error("cannot read " + args.parent_json);
    std::stringstream buffer;
    buffer << in.rdbuf();
    config = code_config_from_json(buffer.str()).config;
  } else {
    config = build_code(args).second;
  }
  const FrozenSpec spec = make_frozen_spec(config);

  std::vector<double> params;
  if (!retx_params.empty()) {
    params = parse_list(retx_params);
  } else if (config.metric == Metric::ga_mean) {
    for (int r = 2; r <= rounds; ++r) params.push_back(1.0 - 3.0 * (r - 2));
  }
  if (static_cast<int>(params.size()) < rounds - 1) {
    throw std::invalid_argument(
        "--retx-param: need a design parameter per extension round");
  }
  const auto chain = plan_chain(spec, config.metric, rounds, params);
  write_text(out, chain_to_json(chain));
  return 0;
}

// ---------------------------------------------------------------------------
// simulate / sweep / compare

struct SimArgs {
  std::string scheme = "proposed";
  int n = 128;
  int k = 64;
  int crc = 0;
  std::string decoder = "sc";
  int list_size = 8;
  bool min_sum = false;
  std::string channel = "awgn_qpsk";
  std::string snr;
  std::string erasure;
  std::string snr_unit = "esn0";
  int max_rounds = 2;
  std::string design_snr;
  std::string design_bec;
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
  int kprime = -1;
  bool crc_detect = false;
  std::string out;
  std::string manifest;
  std::string config_path;
};

struct SimOptionSet {
  CLI::Option* scheme = nullptr;
  CLI::Option* n = nullptr;
  CLI::Option* k = nullptr;
  CLI::Option* crc = nullptr;
  CLI::Option* decoder = nullptr;
  CLI::Option* list_size = nullptr;
  CLI::Option* min_sum = nullptr;
  CLI::Option* channel = nullptr;
  CLI::Option* snr = nullptr;
  CLI::Option* erasure = nullptr;
  CLI::Option* snr_unit = nullptr;
  CLI::Option* max_rounds = nullptr;
  CLI::Option* design_snr = nullptr;
  CLI::Option* design_bec = nullptr;
  CLI::Option* trials = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* workers = nullptr;
  CLI::Option* kprime = nullptr;
  CLI::Option* crc_detect = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* manifest = nullptr;
};

SimOptionSet add_sim_options(CLI::App* cmd, SimArgs& args, bool with_scheme) {
  SimOptionSet opts;
  if (with_scheme) {
    opts.scheme = cmd->add_option("--scheme", args.scheme,
                                  "proposed | if_baseline | direct");
  }
  opts.n = cmd->add_option("--n", args.n,
                           "code length N of the first transmission");
  opts.k = cmd->add_option("--k", args.k, "information bits (CRC excluded)");
  opts.crc = cmd->add_option("--crc", args.crc, "CRC length (0 disables)");
  opts.decoder = cmd->add_option("--decoder", args.decoder, "sc | scl");
  opts.list_size = cmd->add_option("--list", args.list_size, "SCL list size");
  opts.min_sum =
      cmd->add_flag("--min-sum", args.min_sum, "min-sum check-node rule");
  opts.channel =
      cmd->add_option("--channel", args.channel, "awgn_qpsk | awgn_bpsk | bec");
  opts.snr = cmd->add_option(
      "--snr", args.snr, "SNR sweep: list a,b,c or range start:step:stop (dB)");
  opts.erasure = cmd->add_option(
      "--erasure", args.erasure, "erasure-probability sweep for --channel bec");
  opts.snr_unit = cmd->add_option(
      "--snr-unit", args.snr_unit,
      "esn0 | ebn0 (ebn0 adds 10*log10(R*log2(M)) with R = K/N)");
  opts.max_rounds = cmd->add_option("--max-rounds", args.max_rounds,
                                    "HARQ transmission budget");
  opts.design_snr = cmd->add_option(
      "--design-snr", args.design_snr,
      "per-round construction SNRs in dB (default 4,1,-2,...)");
  opts.design_bec = cmd->add_option(
      "--design-bec", args.design_bec,
      "per-round construction erasure probabilities (BEC channel)");
  opts.trials = cmd->add_option("--trials", args.trials, "trials per point");
  opts.seed = cmd->add_option("--seed", args.seed, "master RNG seed");
  opts.workers = cmd->add_option("--workers", args.workers,
                                 "worker threads (does not change results)");
  opts.kprime =
      cmd->add_option("--kprime", args.kprime,
                      "incremental-freezing payload size (default K/2)");
  opts.crc_detect = cmd->add_flag("--crc-detect", args.crc_detect,
                                  "stop on CRC pass instead of genie check");
  opts.out =
      cmd->add_option("--out", args.out, "CSV output path (default stdout)");
  opts.manifest = cmd->add_option("--manifest", args.manifest,
                                  "manifest path (default <out>.manifest.json)");
  cmd->add_option("--config", args.config_path,
                  "JSON config file; explicit flags win");
  return opts;
}

template <typename T>
void overlay(const json& cfg, const CLI::Option* opt, const char* key,
             T& value) {
  if (opt != nullptr && opt->count() == 0 && cfg.contains(key)) {
    value = cfg.at(key).get<T>();
  }
}

void apply_config_file(const SimOptionSet& opts, SimArgs& args) {
  if (args.config_path.empty()) return;
  std::ifstream in(args.config_path);
  if (!in) throw std::runtime_error("cannot read " + args.config_path);
  json cfg;
  in >> cfg;
  overlay(cfg, opts.scheme, "scheme", args.scheme);
  overlay(cfg, opts.n, "n", args.n);
  overlay(cfg, opts.k, "k", args.k);
  overlay(cfg, opts.crc, "crc", args.crc);
  overlay(cfg, opts.decoder, "decoder", args.decoder);
  overlay(cfg, opts.list_size, "list", args.list_size);
  overlay(cfg, opts.min_sum, "min_sum", args.min_sum);
  overlay(cfg, opts.channel, "channel", args.channel);
  overlay(cfg, opts.snr, "snr", args.snr);
  overlay(cfg, opts.erasure, "erasure", args.erasure);
  overlay(cfg, opts.snr_unit, "snr_unit", args.snr_unit);
  overlay(cfg, opts.max_rounds, "max_rounds", args.max_rounds);
  overlay(cfg, opts.design_snr, "design_snr", args.design_snr);
  overlay(cfg, opts.design_bec, "design_bec", args.design_bec);
  overlay(cfg, opts.trials, "trials", args.trials);
  overlay(cfg, opts.seed, "seed", args.seed);
  overlay(cfg, opts.workers, "workers", args.workers);
  overlay(cfg, opts.kprime, "kprime", args.kprime);
  overlay(cfg, opts.crc_detect, "crc_detect", args.crc_detect);
  overlay(cfg, opts.out, "out", args.out);
  overlay(cfg, opts.manifest, "manifest", args.manifest);
}

SimConfig resolve_sim_config(const SimArgs& args) {
  SimConfig config;
  config.scheme = scheme_from_string(args.scheme);
  config.block_length = require_power_of_two(args.n, "--n: N");
  config.message_bits = args.k;
  config.crc_length = args.crc;
  if (args.decoder == "sc") {
    config.decoder.kind = DecoderChoice::Kind::sc;
  } else if (args.decoder == "scl") {
    config.decoder.kind = DecoderChoice::Kind::scl;
  } else {
    throw std::invalid_argument("--decoder must be sc or scl");
  }
  config.decoder.list_size = args.list_size;
  config.decoder.options.min_sum = args.min_sum;
  config.channel = channel_kind_from_string(args.channel);
  config.max_rounds = args.max_rounds;
  config.trials = args.trials;
  config.seed = args.seed;
  config.workers = args.workers;
  config.if_kprime = args.kprime;
  config.crc_success = args.crc_detect;

  if (config.channel == ChannelKind::bec) {
    if (args.erasure.empty() || !args.snr.empty()) {
      throw std::invalid_argument("--channel bec sweeps --erasure, not --snr");
    }
    config.channel_params = parse_sweep(args.erasure);
    if (args.design_bec.empty()) {
      throw std::invalid_argument("--design-bec is required with --channel bec");
    }
    config.design_params = parse_list(args.design_bec);
  } else {
    if (args.snr.empty() || !args.erasure.empty()) {
      throw std::invalid_argument("AWGN channels sweep --snr, not --erasure");
    }
    config.channel_params = parse_sweep(args.snr);
    if (args.snr_unit == "ebn0") {
      const double rate =
          static_cast<double>(args.k) / static_cast<double>(args.n);
      const double shift = 10.0 * std::log10(
          rate * std::log2(modulation_order(config.channel)));
      for (double& v : config.channel_params) v += shift;
    } else if (args.snr_unit != "esn0") {
      throw std::invalid_argument("--snr-unit must be esn0 or ebn0");
    }
    if (!args.design_snr.empty()) {
      config.design_params = parse_list(args.design_snr);
    } else {
      config.design_params.push_back(4.0);
      for (int r = 2; r <= config.max_rounds; ++r) {
        config.design_params.push_back(1.0 - 3.0 * (r - 2));
      }
    }
  }
  if (static_cast<int>(config.design_params.size()) < config.max_rounds) {
    throw std::invalid_argument("need a design parameter per round");
  }
  return config;
}

json manifest_json(const std::string& command, const SimArgs& args,
                   const SimConfig& config,
                   const std::vector<std::string>& schemes) {
  json doc;
  doc["command"] = command;
  doc["schemes"] = schemes;
  doc["n"] = config.block_length;
  doc["k"] = config.message_bits;
  doc["crc"] = config.crc_length;
  doc["decoder"] = args.decoder;
  doc["list"] = config.decoder.list_size;
  doc["min_sum"] = config.decoder.options.min_sum;
  doc["channel"] = to_string(config.channel);
  doc["channel_params"] = config.channel_params;
  doc["snr_unit"] = args.snr_unit;
  doc["max_rounds"] = config.max_rounds;
  doc["design_params"] = config.design_params;
  doc["trials"] = config.trials;
  doc["seed"] = config.seed;
  doc["workers"] = config.workers;
  doc["kprime"] = config.if_kprime;
  doc["crc_detect"] = config.crc_success;
  doc["csv"] = args.out.empty() ? "-" : args.out;
  doc["csv_schema"] =
      std::string(schemes.size() > 1 ? "scheme," : "") + kCsvHeader;
  return doc;
}

void write_manifest(const std::string& command, const SimArgs& args,
                    const SimConfig& config,
                    const std::vector<std::string>& schemes) {
  std::string path = args.manifest;
  if (path.empty()) {
    path = args.out.empty() ? "polarharq_manifest.json"
                            : args.out + ".manifest.json";
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << manifest_json(command, args, config, schemes).dump(2) << "\n";
}

int run_simulate(const std::string& command, const SimArgs& args) {
  const SimConfig config = resolve_sim_config(args);

  if (command == "compare") {
    std::ostringstream csv;
    bool first = true;
    for (Scheme scheme :
         {Scheme::proposed, Scheme::if_baseline, Scheme::direct}) {
      SimConfig run = config;
      run.scheme = scheme;
      std::cerr << "compare: running " << to_string(scheme) << " ("
                << run.channel_params.size() << " points x " << run.trials
                << " trials)\n";
      const SimResult result = monte_carlo(run);
      write_csv(csv, result, to_string(scheme).c_str(), first);
      first = false;
    }
    write_text(args.out, csv.str());
    write_manifest(command, args, config,
                   {"proposed", "if_baseline", "direct"});
    return 0;
  }

  std::cerr << command << ": running " << to_string(config.scheme) << " ("
            << config.channel_params.size() << " points x " << config.trials
            << " trials)\n";
  const SimResult result = monte_carlo(config);
  write_text(args.out, result_to_csv(result));
  write_manifest(command, args, config, {to_string(config.scheme)});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polar-code codec with copy-pair IR-HARQ extension"};
  app.require_subcommand(1);

  CodeArgs construct_args;
  std::string construct_out;
  CLI::App* construct = app.add_subcommand(
      "construct", "build a polar code and emit its JSON description");
  construct->add_option("--n", construct_args.n, "code length N")->required();
  construct->add_option("--k", construct_args.k, "information bits")
      ->required();
  CLI::Option* cbec = construct->add_option("--bec", construct_args.bec,
                                            "BEC design erasure probability");
  CLI::Option* cga = construct->add_option("--ga", construct_args.ga,
                                           "AWGN design SNR in dB");
  cbec->excludes(cga);
  construct->add_option("--out", construct_out, "output path (default stdout)");

  CodeArgs plan_args;
  std::string plan_out, plan_retx;
  int plan_rounds = 2;
  CLI::App* plan = app.add_subcommand(
      "plan", "plan copy-pair extension rounds and emit the JSON chain");
  plan->add_option("--n", plan_args.n, "parent code length N");
  plan->add_option("--k", plan_args.k, "parent information bits");
  CLI::Option* pbec =
      plan->add_option("--bec", plan_args.bec, "parent BEC design erasure");
  CLI::Option* pga =
      plan->add_option("--ga", plan_args.ga, "parent AWGN design SNR in dB");
  pbec->excludes(pga);
  plan->add_option("--parent", plan_args.parent_json,
                   "read the parent code from a construct JSON file");
  plan->add_option("--rounds", plan_rounds,
                   "total transmission rounds (rounds-1 extensions)");
  plan->add_option("--retx-param", plan_retx,
                   "per-extension design parameters, comma separated");
  plan->add_option("--out", plan_out, "output path (default stdout)");

  SimArgs simulate_args, sweep_args, compare_args;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo run at explicit channel points");
  const SimOptionSet simulate_opts =
      add_sim_options(simulate, simulate_args, true);
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Monte Carlo run over a start:step:stop range");
  const SimOptionSet sweep_opts = add_sim_options(sweep, sweep_args, true);
  CLI::App* compare = app.add_subcommand(
      "compare", "run proposed, if_baseline and direct on identical seeds");
  const SimOptionSet compare_opts =
      add_sim_options(compare, compare_args, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(construct)) {
      construct_args.has_bec = cbec->count() > 0;
      construct_args.has_ga = cga->count() > 0;
      return run_construct(construct_args, construct_out);
    }
    if (app.got_subcommand(plan)) {
      plan_args.has_bec = pbec->count() > 0;
      plan_args.has_ga = pga->count() > 0;
      return run_plan(plan_args, plan_rounds, plan_retx, plan_out);
    }
    if (app.got_subcommand(simulate)) {
      apply_config_file(simulate_opts, simulate_args);
      return run_simulate("simulate", simulate_args);
    }
    if (app.got_subcommand(sweep)) {
      apply_config_file(sweep_opts, sweep_args);
      return run_simulate("sweep", sweep_args);
    }
    if (app.got_subcommand(compare)) {
      apply_config_file(compare_opts, compare_args);
      return run_simulate("compare", compare_args);
    }
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
