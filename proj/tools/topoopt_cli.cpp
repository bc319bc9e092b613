// topoopt: scenario runner for direct-connect training-cluster studies.
//
// Subcommands: perms, optimize, simulate, sweep, cost, multijob.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "topoopt/altopt.hpp"
#include "topoopt/costmodel.hpp"
#include "topoopt/error.hpp"
#include "topoopt/json_io.hpp"
#include "topoopt/permutations.hpp"
#include "topoopt/presets.hpp"

namespace {

using namespace topoopt;

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

const std::vector<std::string> kSimArchitectures = {
    "topoopt",        "ideal_switch", "fattree_eq", "oversub_fattree",
    "expander",       "ocs_reconfig", "ocs_reconfig_nofw", "sipml"};

struct Scenario {
  std::string job = "dlrm16";
  int n = 16;
  int d = 4;
  double bandwidth_gbps = 100.0;
  std::string architecture = "topoopt";
  SearchConfig search;
  ReconfigPolicy reconfig;
  std::string out_dir = "out";
  uint64_t seed = 1;
  std::string config_dir;

  static Scenario from_json(const Json& j) {
    Scenario s;
    s.job = j.value("job", s.job);
    if (j.contains("cluster")) {
      const Json& c = j.at("cluster");
      s.n = c.value("n", s.n);
      s.d = c.value("d", s.d);
      s.bandwidth_gbps = c.value("bandwidth_gbps", s.bandwidth_gbps);
      s.architecture = c.value("architecture", s.architecture);
    }
    if (j.contains("search")) {
      const Json& c = j.at("search");
      s.search.mcmc_budget = c.value("mcmc_budget", s.search.mcmc_budget);
      s.search.initial_temp_fraction =
          c.value("initial_temp_fraction", s.search.initial_temp_fraction);
      s.search.temp_decay = c.value("temp_decay", s.search.temp_decay);
      s.search.alt_rounds = c.value("alt_rounds", s.search.alt_rounds);
      s.search.convergence_epsilon =
          c.value("convergence_epsilon", s.search.convergence_epsilon);
    }
    if (j.contains("reconfig")) {
      const Json& c = j.at("reconfig");
      s.reconfig.interval_us = c.value("interval_us", s.reconfig.interval_us);
      s.reconfig.reconfig_latency_us =
          c.value("reconfig_latency_us", s.reconfig.reconfig_latency_us);
      s.reconfig.forwarding = c.value("forwarding", s.reconfig.forwarding);
    }
    s.out_dir = j.value("out_dir", s.out_dir);
    s.seed = j.value("seed", s.seed);
    return s;
  }

  Json to_json() const {
    return Json{{"job", job},
                {"cluster", Json{{"n", n},
                                 {"d", d},
                                 {"bandwidth_gbps", bandwidth_gbps},
                                 {"architecture", architecture}}},
                {"search", Json{{"mcmc_budget", search.mcmc_budget},
                                {"initial_temp_fraction", search.initial_temp_fraction},
                                {"temp_decay", search.temp_decay},
                                {"alt_rounds", search.alt_rounds},
                                {"convergence_epsilon", search.convergence_epsilon}}},
                {"reconfig", Json{{"interval_us", reconfig.interval_us},
                                  {"reconfig_latency_us", reconfig.reconfig_latency_us},
                                  {"forwarding", reconfig.forwarding}}},
                {"out_dir", out_dir},
                {"seed", seed}};
  }
};

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, "cannot create output directory " + dir);
}

void write_manifest(const Scenario& s, const std::string& command) {
  Json config = s.to_json();
  config.erase("out_dir");  // output location is not part of the experiment
  Json manifest{{"command", command},
                {"config", config},
                {"config_hash", config_hash(config)},
                {"seed", s.seed},
                {"version", kVersion}};
  write_json_file(s.out_dir + "/manifest.json", manifest);
}

void check_architecture(const std::string& arch) {
  for (const std::string& a : kSimArchitectures) {
    if (a == arch) return;
  }
  throw UsageError("unknown architecture '" + arch + "'");
}

struct SimOutcome {
  SimResult result;
  Metrics metrics;
};

// Builds and runs one scenario end to end. TopoOpt alternates strategy and
// topology; the fixed fabrics search the strategy on their own topology; the
// reconfigurable fabrics search against an ideal fabric and then run under
// periodic reconfiguration.
SimOutcome run_architecture(const Scenario& s, const JobSpec& job) {
  check_architecture(s.architecture);
  SearchConfig cfg = s.search;
  cfg.seed = s.seed;
  SimOutcome out;

  if (s.architecture == "topoopt") {
    OptResult opt = alternate_optimize(job, s.n, s.d, s.bandwidth_gbps, cfg);
    const std::vector<Task> tasks = build_task_graph(job, opt.strategy, opt.topology, opt.routes);
    out.result = simulate(tasks, opt.topology, s.bandwidth_gbps);
    out.metrics = compute_metrics(out.result, opt.topology);
    return out;
  }

  if (s.architecture == "ideal_switch" || s.architecture == "fattree_eq" ||
      s.architecture == "oversub_fattree" || s.architecture == "expander") {
    Topology topo{1, 1};
    double bandwidth = s.bandwidth_gbps;
    if (s.architecture == "ideal_switch") {
      topo = make_switch_star(s.n, static_cast<double>(s.d));
    } else if (s.architecture == "fattree_eq") {
      const int bprime = cost_equivalent_fattree_bandwidth(
          s.n, s.d, static_cast<int>(s.bandwidth_gbps), PriceTable::defaults(), s.seed);
      topo = make_switch_star(s.n, static_cast<double>(s.d) * bprime / s.bandwidth_gbps);
    } else if (s.architecture == "oversub_fattree") {
      topo = make_switch_star(s.n, static_cast<double>(s.d),
                              static_cast<double>(s.n) * s.d / 2.0);
    } else {
      topo = make_expander(s.n, s.d, s.seed);
    }
    RoutingTable routes;
    McmcResult mc = mcmc_search(job, topo, routes, bandwidth, cfg,
                                ParallelStrategy::pure_data_parallel(job));
    const std::vector<Task> tasks = build_task_graph(job, mc.strategy, topo, routes);
    out.result = simulate(tasks, topo, bandwidth);
    out.metrics = compute_metrics(out.result, topo);
    return out;
  }

  // Reconfigurable fabrics: strategy searched against an ideal fabric (the
  // search plane is unaware of reconfiguration), tasks routed dynamically.
  Topology ideal = make_switch_star(s.n, static_cast<double>(s.d));
  RoutingTable routes;
  McmcResult mc = mcmc_search(job, ideal, routes, s.bandwidth_gbps, cfg,
                              ParallelStrategy::pure_data_parallel(job));
  ReconfigPolicy policy = s.reconfig;
  policy.mode = ReconfigPolicy::Mode::kPeriodic;
  if (s.architecture == "ocs_reconfig_nofw") {
    policy.forwarding = false;
  } else if (s.architecture == "sipml") {
    policy.forwarding = false;
    policy.discount = ReconfigPolicy::Discount::kUnity;
    policy.reconfig_latency_us = 25.0;
  }
  const std::vector<Task> tasks =
      build_task_graph(job, mc.strategy, ideal, routes, false, /*static_paths=*/false);
  out.result = simulate_reconfig(tasks, s.n, policy, s.d, s.bandwidth_gbps);
  out.metrics.bandwidth_tax = out.result.bandwidth_tax;
  // The topology changes across the run, so path statistics come from the
  // flows as routed, not from a single snapshot.
  double hop_sum = 0.0;
  for (const FlowRecord& f : out.result.flows) {
    if (f.hops >= static_cast<int>(out.metrics.path_length_histogram.size())) {
      out.metrics.path_length_histogram.resize(f.hops + 1, 0);
    }
    ++out.metrics.path_length_histogram[f.hops];
    hop_sum += f.hops;
  }
  if (!out.result.flows.empty()) {
    out.metrics.mean_path_length = hop_sum / static_cast<double>(out.result.flows.size());
  }
  return out;
}

std::string format_csv_double(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

int cmd_perms(int n, int k, int d_k, bool prime_only) {
  PermSet perms = totient_perms(n, k, prime_only);
  Json j{{"n", n}, {"k", k}, {"prime_only", prime_only}, {"strides", perms.strides}};
  if (d_k > 0) {
    j["selected"] = select_permutations(n, d_k, perms);
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_optimize(const Scenario& s) {
  const JobSpec job_template = resolve_job(s.job, s.config_dir);
  JobSpec job = job_template;
  job.num_servers = s.n;
  SearchConfig cfg = s.search;
  cfg.seed = s.seed;

  ensure_out_dir(s.out_dir);
  OptResult opt = alternate_optimize(job, s.n, s.d, s.bandwidth_gbps, cfg);

  write_json_file(s.out_dir + "/topology.json", topology_to_json(opt.topology));
  write_json_file(s.out_dir + "/routing.json", routing_to_json(opt.routes));
  write_json_file(s.out_dir + "/strategy.json", strategy_to_json(opt.strategy));

  // Traffic heatmap under the final strategy, rings assigned as built.
  {
    const TransferSet ts = derive_transfers(job, opt.strategy);
    std::map<int, std::vector<int>> rings;
    for (const TopoEdge& e : opt.topology.edges()) {
      if (e.tag == EdgeTag::kAllReduce) {
        auto& lst = rings[e.group];
        if (std::find(lst.begin(), lst.end(), e.stride) == lst.end()) lst.push_back(e.stride);
      }
    }
    for (auto& [gid, lst] : rings) std::sort(lst.begin(), lst.end());
    export_heatmap(traffic_matrix(ts, rings), s.out_dir + "/traffic_heatmap.csv");
  }
  std::ostringstream rounds;
  for (const RoundRecord& r : opt.rounds) {
    rounds << Json{{"type", "round"}, {"round", r.round}, {"best_iteration_us", r.best_iteration_us}}
                  .dump()
           << '\n';
  }
  for (const AcceptedProposal& a : opt.accepted_log) {
    rounds << Json{{"type", "accept"},
                   {"proposal", a.proposal_index},
                   {"layer", a.layer},
                   {"choice", a.choice},
                   {"cost_us", a.cost_us}}
                  .dump()
           << '\n';
  }
  write_text_file(s.out_dir + "/rounds.jsonl", rounds.str());
  write_manifest(s, "optimize");
  std::cout << "best iteration time: " << opt.best_iteration_us << " us over "
            << opt.rounds.size() << " rounds\n";
  return 0;
}

int cmd_simulate(const Scenario& s) {
  const JobSpec job_template = resolve_job(s.job, s.config_dir);
  JobSpec job = job_template;
  job.num_servers = s.n;
  ensure_out_dir(s.out_dir);

  SimOutcome outcome = run_architecture(s, job);
  write_json_file(s.out_dir + "/simresult.json", simresult_to_json(outcome.result));
  write_json_file(s.out_dir + "/metrics.json", metrics_to_json(outcome.metrics));

  std::ostringstream links;
  links << "src,dst,bytes\n";
  for (const auto& [pair, bytes] : outcome.result.link_bytes) {
    links << pair.first << ',' << pair.second << ',' << format_csv_double(bytes) << '\n';
  }
  write_text_file(s.out_dir + "/link_load.csv", links.str());

  std::ostringstream cdf;
  cdf << "hops,pairs\n";
  for (size_t h = 0; h < outcome.metrics.path_length_histogram.size(); ++h) {
    cdf << h << ',' << outcome.metrics.path_length_histogram[h] << '\n';
  }
  write_text_file(s.out_dir + "/path_cdf.csv", cdf.str());
  write_manifest(s, "simulate");
  std::cout << "iteration time: " << outcome.result.iteration_time_us << " us, tax "
            << outcome.result.bandwidth_tax << '\n';
  return 0;
}

struct SweepRow {
  std::string architecture;
  double value = 0.0;
  bool ok = false;
  std::string error;
  double mean_us = 0.0;
  double p99_us = 0.0;
  double tax = 0.0;
  double path_len = 0.0;
};

int cmd_multijob(const Scenario& s, int num_jobs, int servers_per_job);

int cmd_sweep(const Scenario& s, const std::string& axis, const std::vector<double>& values,
              const std::vector<std::string>& architectures) {
  if (axis != "bandwidth" && axis != "degree" && axis != "load" && axis != "reconfig_latency") {
    throw UsageError("unknown sweep axis '" + axis + "'");
  }
  for (const std::string& a : architectures) check_architecture(a);
  ensure_out_dir(s.out_dir);

  std::vector<std::pair<std::string, double>> points;
  for (const std::string& arch : architectures) {
    for (double v : values) points.emplace_back(arch, v);
  }

  auto run_point = [&](const std::string& arch, double value) {
    SweepRow row;
    row.architecture = arch;
    row.value = value;
    try {
      Scenario point = s;
      point.architecture = arch;
      if (axis == "bandwidth") {
        point.bandwidth_gbps = value;
      } else if (axis == "degree") {
        point.d = static_cast<int>(value);
      } else if (axis == "reconfig_latency") {
        point.reconfig.reconfig_latency_us = value;
      }
      if (axis == "load") {
        const int jobs = static_cast<int>(value);
        JobSpec job = resolve_job(s.job, s.config_dir);
        const int per_job = std::max(1, s.n / std::max(1, jobs));
        std::vector<MultiJobRequest> reqs;
        for (int i = 0; i < jobs; ++i) {
          MultiJobRequest r;
          r.job = job;
          r.job.num_servers = per_job;
          r.servers = per_job;
          r.search = point.search;
          r.search.seed = point.seed + i;
          reqs.push_back(std::move(r));
        }
        MultiJobResult mr = multi_job_run(reqs, s.n, point.d, point.bandwidth_gbps);
        row.mean_us = mr.mean_iteration_us;
        row.p99_us = mr.p99_iteration_us;
        row.tax = 1.0;
        row.path_len = 0.0;
      } else {
        JobSpec job = resolve_job(point.job, point.config_dir);
        job.num_servers = point.n;
        SimOutcome oc = run_architecture(point, job);
        row.mean_us = oc.result.iteration_time_us;
        row.p99_us = oc.result.iteration_time_us;
        row.tax = oc.result.bandwidth_tax;
        row.path_len = oc.metrics.mean_path_length;
      }
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    return row;
  };

  // Worker pool over the sweep points; output ordered by (architecture, value).
  std::vector<std::future<SweepRow>> futures;
  for (const auto& [arch, value] : points) {
    futures.push_back(std::async(std::launch::async, run_point, arch, value));
  }
  std::vector<SweepRow> rows;
  for (auto& f : futures) rows.push_back(f.get());
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.architecture != b.architecture) return a.architecture < b.architecture;
    return a.value < b.value;
  });

  std::ostringstream csv;
  csv << "architecture,axis,value,status,mean_iteration_us,p99_iteration_us,bandwidth_tax,"
         "avg_path_length\n";
  for (const SweepRow& r : rows) {
    csv << r.architecture << ',' << axis << ',' << format_csv_double(r.value) << ','
        << (r.ok ? "ok" : "error:" + r.error) << ',' << format_csv_double(r.mean_us) << ','
        << format_csv_double(r.p99_us) << ',' << format_csv_double(r.tax) << ','
        << format_csv_double(r.path_len) << '\n';
  }
  write_text_file(s.out_dir + "/sweep.csv", csv.str());
  write_manifest(s, "sweep");
  std::cout << "sweep complete: " << rows.size() << " points -> " << s.out_dir << "/sweep.csv\n";
  return 0;
}

int cmd_cost(const Scenario& s, const std::vector<int>& n_values,
             const std::string& price_file) {
  ensure_out_dir(s.out_dir);
  PriceTable prices =
      price_file.empty() ? PriceTable::defaults() : price_table_from_json(load_json_file(price_file));

  const std::vector<Architecture> archs = {
      Architecture::kTopoOptPatchPanel, Architecture::kTopoOptOcs,
      Architecture::kIdealSwitch,       Architecture::kFatTreeCostEquivalent,
      Architecture::kOversubFatTree,    Architecture::kExpander};

  std::ostringstream csv;
  csv << "n,architecture,total,nic,transceiver,switch_port,patch_panel_port,ocs_port,"
         "one_by_two_switch,fiber,fat_tree_radix,equivalent_tier_gbps\n";
  double ideal_ratio_sum = 0.0;
  double ocs_ratio_sum = 0.0;
  for (int n : n_values) {
    std::map<Architecture, CostBreakdown> by_arch;
    for (Architecture a : archs) {
      CostBreakdown b =
          architecture_cost(a, n, s.d, static_cast<int>(s.bandwidth_gbps), prices, s.seed);
      csv << n << ',' << architecture_name(a) << ',' << format_csv_double(b.total) << ','
          << format_csv_double(b.item_total("nic")) << ','
          << format_csv_double(b.item_total("transceiver")) << ','
          << format_csv_double(b.item_total("switch_port")) << ','
          << format_csv_double(b.item_total("patch_panel_port")) << ','
          << format_csv_double(b.item_total("ocs_port")) << ','
          << format_csv_double(b.item_total("one_by_two_switch")) << ','
          << format_csv_double(b.item_total("fiber")) << ',' << b.fat_tree_radix << ','
          << b.equivalent_tier_gbps << '\n';
      by_arch[a] = std::move(b);
    }
    ideal_ratio_sum += by_arch[Architecture::kIdealSwitch].total /
                       by_arch[Architecture::kTopoOptPatchPanel].total;
    ocs_ratio_sum +=
        by_arch[Architecture::kTopoOptOcs].total / by_arch[Architecture::kTopoOptPatchPanel].total;
  }
  write_text_file(s.out_dir + "/cost.csv", csv.str());

  Json summary{{"mean_ideal_over_topoopt", ideal_ratio_sum / n_values.size()},
               {"mean_ocs_over_patch", ocs_ratio_sum / n_values.size()},
               {"n_values", n_values}};
  write_json_file(s.out_dir + "/cost_summary.json", summary);
  write_manifest(s, "cost");
  std::cout << "mean ideal/topoopt cost ratio: " << ideal_ratio_sum / n_values.size()
            << ", mean ocs/patch ratio: " << ocs_ratio_sum / n_values.size() << '\n';
  return 0;
}

int cmd_multijob(const Scenario& s, int num_jobs, int servers_per_job) {
  require(num_jobs >= 1, "multijob: need at least one job");
  ensure_out_dir(s.out_dir);
  // Shared-cluster mix: 40% DLRM, 30% BERT, 20% CANDLE, 10% VGG.
  std::vector<std::string> mix;
  const int dlrm = static_cast<int>(num_jobs * 0.4 + 0.5);
  const int bert = static_cast<int>(num_jobs * 0.3 + 0.5);
  const int candle = static_cast<int>(num_jobs * 0.2 + 0.5);
  for (int i = 0; i < num_jobs; ++i) {
    if (i < dlrm) {
      mix.push_back("dlrm16");
    } else if (i < dlrm + bert) {
      mix.push_back("bert");
    } else if (i < dlrm + bert + candle) {
      mix.push_back("candle");
    } else {
      mix.push_back("vgg");
    }
  }
  std::vector<MultiJobRequest> reqs;
  for (int i = 0; i < num_jobs; ++i) {
    MultiJobRequest r;
    r.job = resolve_job(mix[i], s.config_dir);
    r.job.num_servers = servers_per_job;
    r.servers = servers_per_job;
    r.search = s.search;
    r.search.seed = s.seed + i;
    reqs.push_back(std::move(r));
  }
  MultiJobResult mr = multi_job_run(reqs, s.n, s.d, s.bandwidth_gbps);

  std::ostringstream csv;
  csv << "job,preset,iteration_time_us\n";
  for (size_t i = 0; i < mr.iteration_times_us.size(); ++i) {
    csv << i << ',' << mix[i] << ',' << format_csv_double(mr.iteration_times_us[i]) << '\n';
  }
  write_text_file(s.out_dir + "/multijob.csv", csv.str());
  Json j{{"mean_iteration_us", mr.mean_iteration_us},
         {"p99_iteration_us", mr.p99_iteration_us},
         {"jobs", num_jobs},
         {"servers_per_job", servers_per_job}};
  write_json_file(s.out_dir + "/multijob.json", j);
  write_manifest(s, "multijob");
  std::cout << "mean " << mr.mean_iteration_us << " us, p99 " << mr.p99_iteration_us << " us\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-optimizes direct-connect topology, routing, and parallelization strategy"};
  app.require_subcommand(1);
  app.fallthrough();

  // The config file (when given) supplies scenario defaults; explicit flags
  // override it. Scan for it before wiring option defaults.
  Scenario defaults;
  if (const char* env = std::getenv("TOPOOPT_CONFIG_DIR")) defaults.config_dir = env;
  std::string config_file;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") config_file = argv[i + 1];
  }
  try {
    if (!config_file.empty()) {
      std::string dir = defaults.config_dir;
      defaults = Scenario::from_json(load_json_file(config_file));
      defaults.config_dir = dir;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  std::string config_echo;
  std::string out_dir;
  uint64_t seed = 0;
  app.add_option("--config", config_echo, "Scenario config JSON");
  app.add_option("--out", out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed");

  // perms
  auto* perms = app.add_subcommand("perms", "Ring permutation strides for an AllReduce group");
  int perms_n = 0, perms_k = 0, perms_dk = 0;
  bool prime_only = false;
  perms->add_option("n", perms_n, "Cluster size")->required();
  perms->add_option("k", perms_k, "Group size")->required();
  perms->add_option("d_k", perms_dk, "Degrees to select (optional)");
  perms->add_flag("--prime-only", prime_only, "Restrict strides to {1} and primes");

  auto add_cluster_opts = [](CLI::App* cmd, Scenario* s) {
    cmd->add_option("--job", s->job, "Job preset name or JSON file");
    cmd->add_option("--n", s->n, "Number of servers");
    cmd->add_option("--d", s->d, "Server degree");
    cmd->add_option("--bandwidth", s->bandwidth_gbps, "Per-link bandwidth (Gbps)");
  };

  auto* optimize = app.add_subcommand("optimize", "Alternating optimization for one job");
  Scenario opt_s = defaults;
  add_cluster_opts(optimize, &opt_s);
  optimize->add_option("--budget", opt_s.search.mcmc_budget, "MCMC proposals per round");
  optimize->add_option("--rounds", opt_s.search.alt_rounds, "Alternating rounds");

  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one job on one architecture");
  Scenario sim_s = defaults;
  add_cluster_opts(simulate_cmd, &sim_s);
  simulate_cmd->add_option("--arch", sim_s.architecture, "Architecture");
  simulate_cmd->add_option("--budget", sim_s.search.mcmc_budget, "MCMC proposals");
  simulate_cmd->add_option("--reconfig-latency", sim_s.reconfig.reconfig_latency_us,
                           "OCS reconfiguration latency (us)");
  simulate_cmd->add_option("--reconfig-interval", sim_s.reconfig.interval_us,
                           "Demand collection interval (us)");

  auto* sweep = app.add_subcommand("sweep", "Sweep an axis across architectures");
  Scenario sweep_s = defaults;
  std::string sweep_axis = "bandwidth";
  std::vector<double> sweep_values;
  std::vector<std::string> sweep_archs = {"topoopt", "ideal_switch", "fattree_eq"};
  add_cluster_opts(sweep, &sweep_s);
  sweep->add_option("--axis", sweep_axis, "bandwidth | degree | load | reconfig_latency");
  sweep->add_option("--values", sweep_values, "Axis values")->required();
  sweep->add_option("--archs", sweep_archs, "Architectures to sweep");
  sweep->add_option("--budget", sweep_s.search.mcmc_budget, "MCMC proposals");

  auto* cost = app.add_subcommand("cost", "Itemized interconnect cost sweep");
  Scenario cost_s = defaults;
  std::vector<int> cost_n = {128, 256, 384, 512, 640, 768, 896, 1024};
  std::string price_file;
  cost->add_option("--n-values", cost_n, "Cluster sizes");
  cost->add_option("--d", cost_s.d, "Server degree");
  cost->add_option("--bandwidth", cost_s.bandwidth_gbps, "Per-link bandwidth (Gbps)");
  cost->add_option("--prices", price_file, "Price table JSON (defaults built in)");

  auto* multijob = app.add_subcommand("multijob", "Shared-cluster run over disjoint shards");
  Scenario mj_s = defaults;
  int mj_jobs = 5, mj_servers = 16;
  add_cluster_opts(multijob, &mj_s);
  multijob->add_option("--jobs", mj_jobs, "Number of concurrent jobs");
  multijob->add_option("--servers-per-job", mj_servers, "Shard size per job");
  multijob->add_option("--budget", mj_s.search.mcmc_budget, "MCMC proposals");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    auto finalize = [&](Scenario s) {
      if (!out_dir.empty()) s.out_dir = out_dir;
      if (seed_opt->count() > 0) s.seed = seed;
      return s;
    };

    if (perms->parsed()) return cmd_perms(perms_n, perms_k, perms_dk, prime_only);
    if (optimize->parsed()) return cmd_optimize(finalize(opt_s));
    if (simulate_cmd->parsed()) return cmd_simulate(finalize(sim_s));
    if (sweep->parsed()) return cmd_sweep(finalize(sweep_s), sweep_axis, sweep_values, sweep_archs);
    if (cost->parsed()) return cmd_cost(finalize(cost_s), cost_n, price_file);
    if (multijob->parsed()) return cmd_multijob(finalize(mj_s), mj_jobs, mj_servers);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
