#include "topoopt/json_io.hpp"

#include <fstream>
#include <sstream>

#include "topoopt/error.hpp"

namespace topoopt {

namespace {

LayerKind layer_kind_from_string(const std::string& s) {
  if (s == "dense") return LayerKind::kDense;
  if (s == "embedding") return LayerKind::kEmbedding;
  if (s == "attention") return LayerKind::kAttention;
  if (s == "conv") return LayerKind::kConv;
  throw Error("unknown layer kind: " + s);
}

std::string layer_kind_to_string(LayerKind k) {
  switch (k) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kEmbedding: return "embedding";
    case LayerKind::kAttention: return "attention";
    case LayerKind::kConv: return "conv";
  }
  return "dense";
}

std::string edge_tag_to_string(EdgeTag t) {
  switch (t) {
    case EdgeTag::kAllReduce: return "allreduce";
    case EdgeTag::kMp: return "mp";
    case EdgeTag::kFabric: return "fabric";
  }
  return "fabric";
}

EdgeTag edge_tag_from_string(const std::string& s) {
  if (s == "allreduce") return EdgeTag::kAllReduce;
  if (s == "mp") return EdgeTag::kMp;
  if (s == "fabric") return EdgeTag::kFabric;
  throw Error("unknown edge tag: " + s);
}

}  // namespace

Json job_to_json(const JobSpec& job) {
  Json layers = Json::array();
  for (const LayerSpec& l : job.layers) {
    layers.push_back(Json{{"kind", layer_kind_to_string(l.kind)},
                          {"param_bytes", l.param_bytes},
                          {"activation_bytes_per_sample", l.activation_bytes_per_sample},
                          {"fwd_compute_us", l.fwd_compute_us},
                          {"bwd_compute_us", l.bwd_compute_us}});
  }
  return Json{{"name", job.name},
              {"batch_per_gpu", job.batch_per_gpu},
              {"num_servers", job.num_servers},
              {"precision_bytes", job.precision_bytes},
              {"layers", layers}};
}

JobSpec job_from_json(const Json& j) {
  JobSpec job;
  job.name = j.at("name").get<std::string>();
  job.batch_per_gpu = j.at("batch_per_gpu").get<int>();
  job.num_servers = j.at("num_servers").get<int>();
  job.precision_bytes = j.value("precision_bytes", 4);
  for (const Json& lj : j.at("layers")) {
    LayerSpec l;
    l.kind = layer_kind_from_string(lj.at("kind").get<std::string>());
    l.param_bytes = lj.value("param_bytes", 0.0);
    l.activation_bytes_per_sample = lj.value("activation_bytes_per_sample", 0.0);
    l.fwd_compute_us = lj.value("fwd_compute_us", 0.0);
    l.bwd_compute_us = lj.value("bwd_compute_us", 0.0);
    const int repeat = lj.value("repeat", 1);
    require(repeat >= 1, "job layer: repeat must be positive");
    for (int r = 0; r < repeat; ++r) job.layers.push_back(l);
  }
  job.validate();
  return job;
}

Json strategy_to_json(const ParallelStrategy& s) {
  Json arr = Json::array();
  for (const LayerAssignment& a : s.assignments) {
    arr.push_back(Json{{"replicated", a.replicated}, {"servers", a.servers}});
  }
  return Json{{"assignments", arr}};
}

ParallelStrategy strategy_from_json(const Json& j) {
  ParallelStrategy s;
  for (const Json& aj : j.at("assignments")) {
    LayerAssignment a;
    a.replicated = aj.at("replicated").get<bool>();
    a.servers = aj.at("servers").get<std::vector<int>>();
    s.assignments.push_back(std::move(a));
  }
  return s;
}

Json topology_to_json(const Topology& t) {
  Json edges = Json::array();
  for (const TopoEdge& e : t.edges()) {
    edges.push_back(Json{{"src", e.src},
                         {"dst", e.dst},
                         {"multiplicity", e.multiplicity},
                         {"tag", edge_tag_to_string(e.tag)},
                         {"group", e.group},
                         {"stride", e.stride},
                         {"capacity_factor", e.capacity_factor}});
  }
  return Json{{"num_servers", t.num_servers()},
              {"num_switch_nodes", t.num_nodes() - t.num_servers()},
              {"degree", t.degree_cap()},
              {"edges", edges}};
}

Topology topology_from_json(const Json& j) {
  Topology t(j.at("num_servers").get<int>(), j.at("degree").get<int>(),
             j.value("num_switch_nodes", 0));
  for (const Json& ej : j.at("edges")) {
    TopoEdge e;
    e.src = ej.at("src").get<int>();
    e.dst = ej.at("dst").get<int>();
    e.multiplicity = ej.at("multiplicity").get<int>();
    e.tag = edge_tag_from_string(ej.at("tag").get<std::string>());
    e.group = ej.value("group", -1);
    e.stride = ej.value("stride", 0);
    e.capacity_factor = ej.value("capacity_factor", 1.0);
    t.add_edge(e);
  }
  t.validate_degree();
  return t;
}

Json routing_to_json(const RoutingTable& r) {
  Json ar = Json::array();
  for (const auto& [gid, routes] : r.allreduce_stride_routes) {
    Json dist = Json::object();
    for (const auto& [d, strides] : routes) dist[std::to_string(d)] = strides;
    ar.push_back(Json{{"group", gid}, {"distance_routes", dist}});
  }
  Json mp = Json::array();
  for (const auto& [pair, paths] : r.mp_paths) {
    mp.push_back(Json{{"src", pair.first}, {"dst", pair.second}, {"paths", paths}});
  }
  return Json{{"allreduce", ar}, {"mp", mp}};
}

Json simresult_to_json(const SimResult& r) {
  Json links = Json::array();
  for (const auto& [pair, bytes] : r.link_bytes) {
    links.push_back(Json{{"src", pair.first}, {"dst", pair.second}, {"bytes", bytes}});
  }
  return Json{{"iteration_time_us", r.iteration_time_us},
              {"logical_bytes", r.logical_bytes},
              {"wire_bytes", r.wire_bytes},
              {"bandwidth_tax", r.bandwidth_tax},
              {"reconfig_count", r.reconfig_count},
              {"total_pause_us", r.total_pause_us},
              {"num_flows", r.flows.size()},
              {"link_bytes", links}};
}

Json metrics_to_json(const Metrics& m) {
  return Json{{"bandwidth_tax", m.bandwidth_tax},
              {"mean_path_length", m.mean_path_length},
              {"p99_path_length", m.p99_path_length},
              {"path_length_histogram", m.path_length_histogram}};
}

Json price_table_to_json(const PriceTable& t) {
  Json tiers = Json::object();
  for (const auto& [gbps, p] : t.tiers) {
    tiers[std::to_string(gbps)] = Json{{"transceiver", p.transceiver},
                                       {"nic", p.nic},
                                       {"switch_port", p.switch_port},
                                       {"patch_panel_port", p.patch_panel_port},
                                       {"ocs_port", p.ocs_port},
                                       {"one_by_two_switch", p.one_by_two_switch}};
  }
  return Json{{"tiers", tiers}, {"fiber_per_meter", t.fiber_per_meter}};
}

PriceTable price_table_from_json(const Json& j) {
  PriceTable t;
  t.fiber_per_meter = j.value("fiber_per_meter", 0.30);
  for (const auto& [key, pj] : j.at("tiers").items()) {
    TierPrices p;
    p.transceiver = pj.at("transceiver").get<double>();
    p.nic = pj.at("nic").get<double>();
    p.switch_port = pj.at("switch_port").get<double>();
    p.patch_panel_port = pj.at("patch_panel_port").get<double>();
    p.ocs_port = pj.at("ocs_port").get<double>();
    p.one_by_two_switch = pj.at("one_by_two_switch").get<double>();
    t.tiers[std::stoi(key)] = p;
  }
  require(!t.tiers.empty(), "price table: no tiers");
  return t;
}

Json load_json_file(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), "cannot open " + path);
  Json j;
  f >> j;
  return j;
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream f(path);
  require(f.good(), "cannot open " + path + " for writing");
  f << j.dump(2) << '\n';
  require(f.good(), "write failed for " + path);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  require(f.good(), "cannot open " + path + " for writing");
  f << text;
  require(f.good(), "write failed for " + path);
}

std::string config_hash(const Json& j) {
  const std::string s = j.dump();
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace topoopt
