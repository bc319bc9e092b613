#ifndef TOPOOPT_JSON_IO_HPP
#define TOPOOPT_JSON_IO_HPP

#include <string>

#include "json.hpp"
#include "topoopt/altopt.hpp"
#include "topoopt/costmodel.hpp"
#include "topoopt/routing.hpp"
#include "topoopt/simulator.hpp"
#include "topoopt/topology.hpp"
#include "topoopt/workload.hpp"

namespace topoopt {

using Json = nlohmann::json;

Json job_to_json(const JobSpec& job);
JobSpec job_from_json(const Json& j);

Json strategy_to_json(const ParallelStrategy& s);
ParallelStrategy strategy_from_json(const Json& j);

Json topology_to_json(const Topology& t);
Topology topology_from_json(const Json& j);

Json routing_to_json(const RoutingTable& r);
Json simresult_to_json(const SimResult& r);
Json metrics_to_json(const Metrics& m);

Json price_table_to_json(const PriceTable& t);
PriceTable price_table_from_json(const Json& j);

Json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);
void write_text_file(const std::string& path, const std::string& text);

// FNV-1a over the canonical serialization; pins run manifests.
std::string config_hash(const Json& j);

}  // namespace topoopt

#endif  // TOPOOPT_JSON_IO_HPP
