#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nssbm/greedy.hpp"
#include "nssbm/icl.hpp"
#include "nssbm/ingest.hpp"
#include "nssbm/metrics.hpp"
#include "nssbm/simulate.hpp"
#include "nssbm/tensor.hpp"
#include "nssbm/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// --------------------------------------------------------------------------
// small helpers
// --------------------------------------------------------------------------

std::uint64_t fnv1a64_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buffer[1 << 16];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ull;
    }
  }
  return hash;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setfill('0') << std::setw(16) << v;
  return out.str();
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    values.push_back(std::stod(token));
  }
  return values;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << content;
  if (!out) {
    throw std::runtime_error("short write to " + path.string());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return json::parse(in);
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const json& parameters, std::uint64_t seed,
                    const std::vector<fs::path>& inputs,
                    const std::vector<std::string>& outputs) {
  json manifest;
  manifest["tool"] = "nssbm";
  manifest["tool_version"] = nssbm::kVersion;
  manifest["command"] = command;
  manifest["parameters"] = parameters;
  manifest["seed"] = seed;
  json in = json::array();
  for (const fs::path& p : inputs) {
    in.push_back({{"path", p.string()}, {"digest_fnv1a64", hex64(fnv1a64_file(p))}});
  }
  manifest["inputs"] = in;
  manifest["outputs"] = outputs;
  write_json_file(out_dir / "manifest.json", manifest);
}

json rate_grid_json(const nssbm::RateGrid& grid) {
  return {{"num_node_clusters", grid.num_node_clusters},
          {"num_time_clusters", grid.num_time_clusters},
          {"values", grid.values}};
}

// --------------------------------------------------------------------------
// simulate
// --------------------------------------------------------------------------

struct SimulateArgs {
  int nodes = 0;
  int bins = 0;
  int k = 0;
  int d = 0;
  std::string s1, s2, s3;
  std::string rates_file;
  std::string node_weights, time_weights;
  double delta = 1.0;
  std::string mode = "directed";
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

int run_simulate(const SimulateArgs& args) {
  nssbm::GenerativeSpec spec;
  spec.num_nodes = args.nodes;
  spec.num_bins = args.bins;
  spec.delta = args.delta;
  spec.mode = nssbm::mode_from_name(args.mode);
  spec.seed = args.seed;

  if (!args.rates_file.empty()) {
    const json j = load_json_file(args.rates_file);
    spec.rates.num_node_clusters = j.at("num_node_clusters").get<int>();
    spec.rates.num_time_clusters = j.at("num_time_clusters").get<int>();
    spec.rates.values = j.at("values").get<std::vector<double>>();
  } else {
    if (args.s1.empty() || args.s2.empty() || args.s3.empty()) {
      throw CLI::ValidationError("simulate", "need --s1/--s2/--s3 or --rates-file");
    }
    spec.rates = nssbm::additive_rates(parse_double_list(args.s1), parse_double_list(args.s2),
                                       parse_double_list(args.s3));
  }
  if (args.k > 0 && args.k != spec.rates.num_node_clusters) {
    throw CLI::ValidationError("simulate", "--k disagrees with the rate grid");
  }
  if (args.d > 0 && args.d != spec.rates.num_time_clusters) {
    throw CLI::ValidationError("simulate", "--d disagrees with the rate grid");
  }

  const int k = spec.rates.num_node_clusters;
  const int d = spec.rates.num_time_clusters;
  spec.node_weights = args.node_weights.empty()
                          ? std::vector<double>(k, 1.0 / k)
                          : parse_double_list(args.node_weights);
  spec.time_weights = args.time_weights.empty()
                          ? std::vector<double>(d, 1.0 / d)
                          : parse_double_list(args.time_weights);
  spec.validate();

  const nssbm::SimulatedData data = nssbm::simulate(spec);

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);

  std::ostringstream events;
  nssbm::write_prebinned_csv(events, data.tensor);
  write_text_file(out_dir / "events.csv", events.str());

  json truth;
  truth["tool_version"] = nssbm::kVersion;
  truth["num_nodes"] = spec.num_nodes;
  truth["num_bins"] = spec.num_bins;
  truth["K"] = k;
  truth["D"] = d;
  truth["node_labels"] = data.node_labels;
  truth["time_labels"] = data.time_labels;
  truth["rates"] = rate_grid_json(spec.rates);
  truth["node_weights"] = spec.node_weights;
  truth["time_weights"] = spec.time_weights;
  truth["delta"] = spec.delta;
  truth["mode"] = nssbm::mode_name(spec.mode);
  truth["seed"] = spec.seed;
  truth["total_count"] = data.tensor.total_count();
  try {
    // ICL evaluated at the generating labels, when every cluster is hit
    nssbm::Hyperparameters h;
    h.delta = spec.delta;
    const nssbm::IclValue at_truth =
        nssbm::icl(data.tensor, nssbm::NodePartition(data.node_labels, k),
                   nssbm::TimePartition(data.time_labels, d), h);
    truth["icl_at_truth"] = {{"total", at_truth.total},
                             {"emission_term", at_truth.emission_term},
                             {"label_term", at_truth.label_term}};
  } catch (const std::invalid_argument&) {
    // a cluster came out empty in the draw; no reference ICL then
  }
  write_json_file(out_dir / "truth.json", truth);

  json params;
  params["nodes"] = args.nodes;
  params["bins"] = args.bins;
  params["rates"] = rate_grid_json(spec.rates);
  params["node_weights"] = spec.node_weights;
  params["time_weights"] = spec.time_weights;
  params["delta"] = spec.delta;
  params["mode"] = nssbm::mode_name(spec.mode);
  write_manifest(out_dir, "simulate", params, spec.seed, {},
                 {"events.csv", "truth.json", "manifest.json"});

  std::cout << "simulated " << spec.num_nodes << " nodes x " << spec.num_bins << " bins ("
            << nssbm::mode_name(spec.mode) << "), total events " << data.tensor.total_count()
            << "\nwrote " << (out_dir / "events.csv").string() << ", truth.json, manifest.json"
            << std::endl;
  return 0;
}

// --------------------------------------------------------------------------
// fit
// --------------------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string format = "auto";
  std::string mode = "undirected";
  // raw log binning
  std::int64_t origin = 0;
  std::int64_t bin_width = 900;
  int num_bins = 0;
  std::string out_of_range = "drop";
  // pre-binned dimension overrides
  int nodes = 0;
  int bins = 0;
  // hyperparameters
  double a = 1.0, b = 1.0, alpha = 1.0, gamma = 1.0, delta = 1.0;
  // search
  int kmax = 10, dmax = 10, restarts = 5, max_sweeps = 100;
  double epsilon = 1e-10;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir = ".";
};

std::string detect_format(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string tok;
    std::vector<std::string> tokens;
    while (fields >> tok) tokens.push_back(tok);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (line.find(',') != std::string::npos) return "prebinned";
    return tokens.size() == 4 ? "prebinned" : "raw";
  }
  return "prebinned";  // empty file: zero-event pre-binned input
}

int run_fit(const FitArgs& args) {
  const fs::path input(args.input);
  std::string format = args.format;
  if (format == "auto") {
    format = detect_format(input);
  }

  nssbm::InteractionTensor tensor;
  std::optional<nssbm::NodeIndexMap> node_map;
  std::int64_t dropped = 0;

  if (format == "raw") {
    if (args.num_bins < 1) {
      throw CLI::ValidationError("fit", "--num-bins is required for raw contact logs");
    }
    if (args.mode != "undirected") {
      throw CLI::ValidationError("fit", "raw contact logs are undirected");
    }
    std::ifstream in(input);
    if (!in) {
      throw std::runtime_error("cannot open " + input.string());
    }
    nssbm::ParsedContactLog log = nssbm::parse_contact_log(in);
    nssbm::BinningSpec binning{args.origin, args.bin_width, args.num_bins,
                               args.out_of_range == "drop"};
    auto agg = nssbm::aggregate_bins(log.events, log.nodes, binning);
    tensor = std::move(agg.tensor);
    dropped = agg.dropped;
    node_map = std::move(log.nodes);
  } else if (format == "prebinned") {
    std::ifstream in(input);
    if (!in) {
      throw std::runtime_error("cannot open " + input.string());
    }
    const nssbm::PrebinnedData data = nssbm::read_prebinned(in);
    const int num_nodes = args.nodes > 0 ? args.nodes : data.max_node + 1;
    const int num_bins = args.bins > 0 ? args.bins : data.max_bin + 1;
    tensor = nssbm::build_tensor(data.records, std::max(num_nodes, 1), std::max(num_bins, 1),
                                 nssbm::mode_from_name(args.mode));
  } else {
    throw CLI::ValidationError("fit", "unknown --format " + format);
  }

  nssbm::Hyperparameters h{args.a, args.b, args.alpha, args.gamma, args.delta};
  nssbm::SearchConfig cfg;
  cfg.k_max = args.kmax;
  cfg.d_max = args.dmax;
  cfg.num_restarts = args.restarts;
  cfg.max_sweeps = args.max_sweeps;
  cfg.improvement_epsilon = args.epsilon;
  cfg.seed = args.seed;
  cfg.num_threads = args.threads;

  const nssbm::FitResult fit = nssbm::greedy_fit(tensor, h, cfg);

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);

  json out;
  out["tool_version"] = nssbm::kVersion;
  out["mode"] = nssbm::mode_name(tensor.mode());
  out["num_nodes"] = tensor.num_nodes();
  out["num_bins"] = tensor.num_bins();
  out["total_count"] = tensor.total_count();
  out["K"] = fit.num_node_clusters;
  out["D"] = fit.num_time_clusters;
  out["node_labels"] = fit.node_partition.labels();
  out["time_labels"] = fit.time_partition.labels();
  out["node_sizes"] = fit.node_partition.cluster_sizes();
  out["time_sizes"] = fit.time_partition.cluster_sizes();
  out["icl"] = {{"total", fit.icl.total},
                {"emission_term", fit.icl.emission_term},
                {"label_term", fit.icl.label_term}};
  out["hyperparameters"] = {
      {"a", h.a}, {"b", h.b}, {"alpha", h.alpha}, {"gamma", h.gamma}, {"delta", h.delta}};
  out["search"] = {{"k_max", cfg.k_max},
                   {"d_max", cfg.d_max},
                   {"num_restarts", cfg.num_restarts},
                   {"max_sweeps", cfg.max_sweeps},
                   {"improvement_epsilon", cfg.improvement_epsilon},
                   {"seed", cfg.seed},
                   {"winner_restart", fit.restart_id},
                   {"revalidation_error", fit.revalidation_error}};

  const nssbm::BlockStats stats =
      nssbm::compute_block_stats(tensor, fit.node_partition, fit.time_partition);
  json blocks = json::array();
  for (int k = 0; k < fit.num_node_clusters; ++k) {
    const int g0 = tensor.mode() == nssbm::Mode::undirected ? k : 0;
    for (int g = g0; g < fit.num_node_clusters; ++g) {
      for (int d = 0; d < fit.num_time_clusters; ++d) {
        blocks.push_back({{"k", k},
                          {"g", g},
                          {"d", d},
                          {"S", stats.s(k, g, d)},
                          {"R", stats.r(k, g, d)},
                          {"rate", fit.rates.at(k, g, d)}});
      }
    }
  }
  out["blocks"] = blocks;

  std::vector<nssbm::count_t> bin_totals(static_cast<std::size_t>(tensor.num_bins()));
  for (int u = 0; u < tensor.num_bins(); ++u) {
    bin_totals[static_cast<std::size_t>(u)] = tensor.bin_total(u);
  }
  out["bin_totals"] = bin_totals;
  if (dropped > 0) {
    out["dropped_events"] = dropped;
  }

  json trace = json::array();
  for (const nssbm::TraceEntry& t : fit.trace) {
    trace.push_back({{"sweep", t.sweep},
                     {"kind", nssbm::move_kind_name(t.kind)},
                     {"delta", t.delta},
                     {"icl_after", t.icl_after}});
  }
  out["trace"] = trace;
  out["input"] = {{"path", input.string()},
                  {"format", format},
                  {"digest_fnv1a64", hex64(fnv1a64_file(input))}};
  write_json_file(out_dir / "fit.json", out);

  std::vector<std::string> outputs = {"fit.json", "manifest.json"};
  if (node_map) {
    std::ostringstream map_csv;
    nssbm::write_node_map_csv(map_csv, *node_map);
    write_text_file(out_dir / "node_map.csv", map_csv.str());
    outputs.push_back("node_map.csv");
  }

  json params;
  params["input"] = input.string();
  params["format"] = format;
  params["mode"] = nssbm::mode_name(tensor.mode());
  params["origin"] = args.origin;
  params["bin_width"] = args.bin_width;
  params["num_bins"] = format == "raw" ? args.num_bins : tensor.num_bins();
  params["out_of_range"] = args.out_of_range;
  params["hyperparameters"] = out["hyperparameters"];
  params["search"] = {{"k_max", cfg.k_max},
                      {"d_max", cfg.d_max},
                      {"num_restarts", cfg.num_restarts},
                      {"max_sweeps", cfg.max_sweeps},
                      {"improvement_epsilon", cfg.improvement_epsilon}};
  write_manifest(out_dir, "fit", params, cfg.seed, {input}, outputs);

  std::cout << std::fixed << std::setprecision(6);
  std::cout << "ICL = " << fit.icl.total << " (emission " << fit.icl.emission_term
            << ", label " << fit.icl.label_term << ")\n"
            << "K = " << fit.num_node_clusters << ", D = " << fit.num_time_clusters
            << ", winning restart " << fit.restart_id << ", accepted moves "
            << fit.trace.size();
  if (dropped > 0) {
    std::cout << "\ndropped " << dropped << " out-of-range events";
  }
  std::cout << std::endl;
  return 0;
}

// --------------------------------------------------------------------------
// eval
// --------------------------------------------------------------------------

int run_eval(const std::string& pred_path, const std::string& truth_path) {
  const json pred = load_json_file(pred_path);
  const json truth = load_json_file(truth_path);
  const auto pred_nodes = pred.at("node_labels").get<std::vector<std::int32_t>>();
  const auto truth_nodes = truth.at("node_labels").get<std::vector<std::int32_t>>();
  const auto pred_time = pred.at("time_labels").get<std::vector<std::int32_t>>();
  const auto truth_time = truth.at("time_labels").get<std::vector<std::int32_t>>();

  json out;
  out["ari_nodes"] = nssbm::adjusted_rand_index(pred_nodes, truth_nodes);
  out["ari_time"] = nssbm::adjusted_rand_index(pred_time, truth_time);
  std::cout << out.dump() << std::endl;
  return 0;
}

// --------------------------------------------------------------------------
// summarize
// --------------------------------------------------------------------------

int run_summarize(const std::string& fit_path, const std::string& out_dir_str) {
  const json fit = load_json_file(fit_path);
  for (const char* field : {"blocks", "bin_totals", "time_labels", "node_labels"}) {
    if (!fit.contains(field)) {
      throw std::runtime_error("fit.json is missing required field '" + std::string(field) + "'");
    }
  }

  const fs::path out_dir(out_dir_str);
  fs::create_directories(out_dir);

  std::ostringstream block_rates;
  block_rates << "k,g,d,S,R,rate\n";
  for (const json& b : fit.at("blocks")) {
    block_rates << b.at("k").get<int>() << ',' << b.at("g").get<int>() << ','
                << b.at("d").get<int>() << ',' << b.at("S").get<std::int64_t>() << ','
                << b.at("R").get<std::int64_t>() << ',' << b.at("rate").get<double>() << '\n';
  }
  write_text_file(out_dir / "block_rates.csv", block_rates.str());

  const auto time_labels = fit.at("time_labels").get<std::vector<int>>();
  const auto bin_totals = fit.at("bin_totals").get<std::vector<std::int64_t>>();
  if (time_labels.size() != bin_totals.size()) {
    throw std::runtime_error("fit.json: time_labels and bin_totals lengths differ");
  }
  std::ostringstream time_clusters;
  time_clusters << "bin,cluster,total_interactions\n";
  for (std::size_t u = 0; u < time_labels.size(); ++u) {
    time_clusters << u << ',' << time_labels[u] << ',' << bin_totals[u] << '\n';
  }
  write_text_file(out_dir / "time_clusters.csv", time_clusters.str());

  const auto node_labels = fit.at("node_labels").get<std::vector<int>>();
  std::ostringstream node_clusters;
  node_clusters << "node,cluster\n";
  for (std::size_t i = 0; i < node_labels.size(); ++i) {
    node_clusters << i << ',' << node_labels[i] << '\n';
  }
  write_text_file(out_dir / "node_clusters.csv", node_clusters.str());

  json params;
  params["fit"] = fit_path;
  write_manifest(out_dir, "summarize", params, 0, {fit_path},
                 {"block_rates.csv", "time_clusters.csv", "node_clusters.csv", "manifest.json"});

  std::cout << "wrote block_rates.csv, time_clusters.csv, node_clusters.csv to " << out_dir
            << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-stationary stochastic block model: simulate, fit, evaluate, summarize"};
  app.set_version_flag("--version", nssbm::kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "draw a synthetic interaction tensor");
  simulate->add_option("--nodes", sim.nodes, "number of nodes")->required();
  simulate->add_option("--bins", sim.bins, "number of time bins")->required();
  simulate->add_option("--k", sim.k, "number of node clusters (validated against rates)");
  simulate->add_option("--d", sim.d, "number of time clusters (validated against rates)");
  simulate->add_option("--s1", sim.s1, "additive rate component, node axis 1 (comma separated)");
  simulate->add_option("--s2", sim.s2, "additive rate component, node axis 2");
  simulate->add_option("--s3", sim.s3, "additive rate component, time axis");
  simulate->add_option("--rates-file", sim.rates_file, "JSON rate grid instead of --s1/--s2/--s3");
  simulate->add_option("--node-weights", sim.node_weights, "label weights (default uniform)");
  simulate->add_option("--time-weights", sim.time_weights, "label weights (default uniform)");
  simulate->add_option("--delta", sim.delta, "bin width")->capture_default_str();
  simulate->add_option("--mode", sim.mode, "directed|undirected")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  simulate->add_option("--out", sim.out_dir, "output directory")->capture_default_str();

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "greedy ICL fit of a contact log or event CSV");
  fit_cmd->add_option("--input", fit.input, "raw contact log or pre-binned CSV")->required();
  fit_cmd->add_option("--format", fit.format, "auto|raw|prebinned")->capture_default_str();
  fit_cmd->add_option("--mode", fit.mode, "directed|undirected")->capture_default_str();
  fit_cmd->add_option("--origin", fit.origin, "timestamp where bin 0 starts (raw)")->capture_default_str();
  fit_cmd->add_option("--bin-width", fit.bin_width, "bin width in seconds (raw)")->capture_default_str();
  fit_cmd->add_option("--num-bins", fit.num_bins, "number of bins U (raw)");
  fit_cmd->add_option("--out-of-range", fit.out_of_range, "drop|error (raw)")->capture_default_str();
  fit_cmd->add_option("--nodes", fit.nodes, "node count override (prebinned)");
  fit_cmd->add_option("--bins", fit.bins, "bin count override (prebinned)");
  fit_cmd->add_option("--a", fit.a, "Gamma shape")->capture_default_str();
  fit_cmd->add_option("--b", fit.b, "Gamma rate")->capture_default_str();
  fit_cmd->add_option("--alpha", fit.alpha, "Dirichlet concentration, nodes")->capture_default_str();
  fit_cmd->add_option("--gamma", fit.gamma, "Dirichlet concentration, time")->capture_default_str();
  fit_cmd->add_option("--delta", fit.delta, "model bin width")->capture_default_str();
  fit_cmd->add_option("--kmax", fit.kmax, "initial node clusters")->capture_default_str();
  fit_cmd->add_option("--dmax", fit.dmax, "initial time clusters")->capture_default_str();
  fit_cmd->add_option("--restarts", fit.restarts, "independent restarts")->capture_default_str();
  fit_cmd->add_option("--max-sweeps", fit.max_sweeps, "sweep cap per restart")->capture_default_str();
  fit_cmd->add_option("--epsilon", fit.epsilon, "minimal accepted improvement")->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "RNG seed")->capture_default_str();
  fit_cmd->add_option("--threads", fit.threads, "restart threads (0: NSSBM_THREADS or auto)");
  fit_cmd->add_option("--out", fit.out_dir, "output directory")->capture_default_str();

  std::string pred_path, truth_path;
  CLI::App* eval_cmd = app.add_subcommand("eval", "adjusted Rand index between two labelings");
  eval_cmd->add_option("--pred", pred_path, "fit.json (or any JSON with *_labels)")->required();
  eval_cmd->add_option("--truth", truth_path, "truth.json (or any JSON with *_labels)")->required();

  std::string fit_path, summarize_out = ".";
  CLI::App* summarize_cmd = app.add_subcommand("summarize", "plot-ready CSV exports of a fit");
  summarize_cmd->add_option("--fit", fit_path, "fit.json produced by `fit`")->required();
  summarize_cmd->add_option("--out", summarize_out, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (fit_cmd->parsed()) return run_fit(fit);
    if (eval_cmd->parsed()) return run_eval(pred_path, truth_path);
    if (summarize_cmd->parsed()) return run_summarize(fit_path, summarize_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
