#include "topoopt/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "topoopt/error.hpp"
#include "topoopt/permutations.hpp"

namespace topoopt {

void JobSpec::validate() const {
  require(num_servers >= 1, "JobSpec: num_servers must be >= 1");
  require(batch_per_gpu >= 1, "JobSpec: batch_per_gpu must be >= 1");
  require(precision_bytes >= 1, "JobSpec: precision_bytes must be >= 1");
  require(!layers.empty(), "JobSpec: at least one layer required");
  for (const LayerSpec& l : layers) {
    require(l.param_bytes >= 0.0 && l.activation_bytes_per_sample >= 0.0 &&
                l.fwd_compute_us >= 0.0 && l.bwd_compute_us >= 0.0,
            "LayerSpec: byte and time fields must be nonnegative");
  }
}

ParallelStrategy ParallelStrategy::pure_data_parallel(const JobSpec& job) {
  ParallelStrategy s;
  std::vector<int> all(job.num_servers);
  for (int i = 0; i < job.num_servers; ++i) all[i] = i;
  s.assignments.assign(job.layers.size(), LayerAssignment{true, all});
  return s;
}

void ParallelStrategy::validate(const JobSpec& job) const {
  require(assignments.size() == job.layers.size(),
          "ParallelStrategy: every layer must be assigned");
  for (const LayerAssignment& a : assignments) {
    require(!a.servers.empty(), "ParallelStrategy: empty server assignment");
    std::set<int> seen;
    for (int s : a.servers) {
      require(s >= 0 && s < job.num_servers, "ParallelStrategy: server id out of range");
      if (a.replicated) {
        require(seen.insert(s).second, "ParallelStrategy: duplicate replica server");
      }
    }
  }
}

double TransferSet::total_allreduce_wire_bytes() const {
  double sum = 0.0;
  for (const AllReduceGroup& g : allreduce_groups) sum += g.total_wire_bytes();
  return sum;
}

double TransferSet::total_mp_bytes() const {
  double sum = 0.0;
  for (const MpTransfer& t : mp_transfers) sum += t.bytes;
  return sum;
}

double TrafficMatrix::total() const {
  double sum = 0.0;
  for (double b : bytes) sum += b;
  return sum;
}

namespace {

// Servers that consume a partitioned layer's activations: the nearest
// following replicated stage (embedding-style tables broadcast to the
// replicated stack and collect gradients back from it). Pure partitioned
// chains fall back to the neighboring layer's hosts.
std::set<int> consumer_servers(const JobSpec& job, const ParallelStrategy& strategy,
                               size_t layer_idx) {
  auto servers_of = [&](size_t idx) {
    const LayerAssignment& a = strategy.assignments[idx];
    return std::set<int>(a.servers.begin(), a.servers.end());
  };
  for (size_t l = layer_idx + 1; l < job.layers.size(); ++l) {
    if (strategy.assignments[l].replicated) return servers_of(l);
  }
  if (layer_idx + 1 < job.layers.size()) return servers_of(layer_idx + 1);
  for (size_t l = layer_idx; l-- > 0;) {
    if (strategy.assignments[l].replicated) return servers_of(l);
  }
  if (layer_idx > 0) return servers_of(layer_idx - 1);
  return {};
}

}  // namespace

TransferSet derive_transfers(const JobSpec& job, const ParallelStrategy& strategy) {
  job.validate();
  strategy.validate(job);

  TransferSet ts;
  ts.num_servers = job.num_servers;
  if (job.num_servers == 1) return ts;

  // Pool replicated layers by replica set.
  std::map<std::vector<int>, double> group_bytes;
  for (size_t i = 0; i < job.layers.size(); ++i) {
    const LayerAssignment& a = strategy.assignments[i];
    if (!a.replicated) continue;
    std::vector<int> members = a.servers;
    std::sort(members.begin(), members.end());
    if (members.size() < 2) continue;
    group_bytes[members] += job.layers[i].param_bytes;
  }
  int gid = 0;
  for (const auto& [members, bytes] : group_bytes) {
    if (bytes <= 0.0) continue;
    AllReduceGroup g;
    g.id = gid++;
    g.members = members;
    g.bytes_per_member = bytes;
    ts.allreduce_groups.push_back(g);
  }

  // Partitioned layers: each shard host exchanges activations (outbound) and
  // gradients (inbound) with every consumer server, one transfer of
  // batch * activation bytes per direction.
  for (size_t i = 0; i < job.layers.size(); ++i) {
    const LayerAssignment& a = strategy.assignments[i];
    if (a.replicated) continue;
    const double bytes =
        static_cast<double>(job.batch_per_gpu) * job.layers[i].activation_bytes_per_sample;
    if (bytes <= 0.0) continue;
    std::set<int> consumers = consumer_servers(job, strategy, i);
    for (int host : a.servers) {
      for (int c : consumers) {
        if (c == host) continue;
        ts.mp_transfers.push_back(MpTransfer{host, c, bytes});
        ts.mp_transfers.push_back(MpTransfer{c, host, bytes});
      }
    }
  }
  return ts;
}

TrafficMatrix traffic_matrix(
    const TransferSet& ts,
    const std::optional<std::map<int, std::vector<int>>>& ring_assignment) {
  TrafficMatrix tm;
  tm.n = ts.num_servers;
  tm.bytes.assign(static_cast<size_t>(tm.n) * tm.n, 0.0);

  for (const MpTransfer& t : ts.mp_transfers) {
    require(t.src != t.dst, "traffic_matrix: self transfer");
    tm.at(t.src, t.dst) += t.bytes;
  }

  for (const AllReduceGroup& g : ts.allreduce_groups) {
    const int k = static_cast<int>(g.members.size());
    std::vector<int> strides = {1};
    if (ring_assignment.has_value()) {
      auto it = ring_assignment->find(g.id);
      if (it != ring_assignment->end()) strides = it->second;
    }
    require(!strides.empty(), "traffic_matrix: empty stride set");
    for (int p : strides) {
      require(p >= 1 && p < k && gcd_int(p, k) == 1,
              "traffic_matrix: stride invalid for group");
    }
    const double per_edge = g.ring_volume_per_member() / static_cast<double>(strides.size());
    for (int p : strides) {
      for (int i = 0; i < k; ++i) {
        tm.at(g.members[i], g.members[(i + p) % k]) += per_edge;
      }
    }
  }
  return tm;
}

std::string heatmap_csv(const TrafficMatrix& tm) {
  std::ostringstream out;
  for (int r = 0; r < tm.n; ++r) {
    for (int c = 0; c < tm.n; ++c) {
      if (c > 0) out << ',';
      const double v = tm.at(r, c);
      if (v == std::floor(v) && std::abs(v) < 1e15) {
        out << static_cast<long long>(v);
      } else {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", v);
        out << buf;
      }
    }
    out << '\n';
  }
  return out.str();
}

void export_heatmap(const TrafficMatrix& tm, const std::string& path) {
  std::ofstream f(path);
  require(f.good(), "export_heatmap: cannot open " + path);
  f << heatmap_csv(tm);
  require(f.good(), "export_heatmap: write failed for " + path);
}

}  // namespace topoopt
