#ifndef TOPOOPT_PRESETS_HPP
#define TOPOOPT_PRESETS_HPP

#include <string>
#include <vector>

#include "topoopt/workload.hpp"

namespace topoopt {

// Built-in model configurations mirroring the shipped preset files.
std::vector<std::string> builtin_preset_names();
JobSpec builtin_preset(const std::string& name);

// Resolves `name_or_path` as a builtin preset, a JSON file path, or a file
// under <config_dir>/presets/<name>.json.
JobSpec resolve_job(const std::string& name_or_path, const std::string& config_dir = "");

// The DLRM hybrid placement: embedding layers pinned one table per listed
// server, everything else replicated cluster-wide.
ParallelStrategy dlrm_hybrid_strategy(const JobSpec& job, const std::vector<int>& table_servers);

}  // namespace topoopt

#endif  // TOPOOPT_PRESETS_HPP
