#ifndef TOPOOPT_WORKLOAD_HPP
#define TOPOOPT_WORKLOAD_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace topoopt {

enum class LayerKind { kDense, kEmbedding, kAttention, kConv };

// One DNN layer with profiled compute times. Compute profiles are inputs;
// nothing here models GPU kernels.
struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  double param_bytes = 0.0;
  double activation_bytes_per_sample = 0.0;
  double fwd_compute_us = 0.0;
  double bwd_compute_us = 0.0;
};

struct JobSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  int batch_per_gpu = 1;
  int num_servers = 1;
  int precision_bytes = 4;

  void validate() const;
};

// Per-layer placement: either replicated over a server set (synchronized via
// AllReduce) or partitioned shard-by-shard across servers.
struct LayerAssignment {
  bool replicated = true;
  std::vector<int> servers;        // replica set, or shard i -> servers[i]
};

struct ParallelStrategy {
  std::vector<LayerAssignment> assignments;  // one per layer

  static ParallelStrategy pure_data_parallel(const JobSpec& job);
  void validate(const JobSpec& job) const;
};

struct AllReduceGroup {
  int id = 0;
  std::vector<int> members;        // sorted, distinct, size >= 2
  double bytes_per_member = 0.0;   // S: synchronized parameter bytes

  // Send+receive volume each member moves for this group's synchronization
  // (reduce-scatter plus all-gather of S bytes).
  double per_member_traffic() const { return 2.0 * bytes_per_member; }
  // Exact ring volume one member pushes through its successor edges.
  double ring_volume_per_member() const {
    const double k = static_cast<double>(members.size());
    return 2.0 * (k - 1.0) / k * bytes_per_member;
  }
  // Network-wide bytes the group's ring synchronization moves.
  double total_wire_bytes() const {
    return ring_volume_per_member() * static_cast<double>(members.size());
  }
};

struct MpTransfer {
  int src = 0;
  int dst = 0;
  double bytes = 0.0;
};

struct TransferSet {
  int num_servers = 0;
  std::vector<AllReduceGroup> allreduce_groups;
  std::vector<MpTransfer> mp_transfers;

  double total_allreduce_wire_bytes() const;
  double total_mp_bytes() const;
  bool empty() const { return allreduce_groups.empty() && mp_transfers.empty(); }
};

struct TrafficMatrix {
  int n = 0;
  std::vector<double> bytes;       // row-major n*n, diagonal zero

  double& at(int src, int dst) { return bytes[static_cast<size_t>(src) * n + dst]; }
  double at(int src, int dst) const { return bytes[static_cast<size_t>(src) * n + dst]; }
  double total() const;
};

// Derives the per-iteration communication demand of a (job, strategy) pair:
// replicated layers pool their parameter bytes into the AllReduce group of
// their replica set; partitioned layers emit activation/gradient transfers
// between each shard host and the servers consuming its activations.
TransferSet derive_transfers(const JobSpec& job, const ParallelStrategy& strategy);

// Renders a TransferSet as an n-by-n byte matrix. AllReduce groups place
// their ring volume on successor edges, split evenly across the assigned
// strides (canonical +1 ring when no assignment is given).
TrafficMatrix traffic_matrix(
    const TransferSet& ts,
    const std::optional<std::map<int, std::vector<int>>>& ring_assignment = std::nullopt);

// CSV heatmap, one row per source server.
void export_heatmap(const TrafficMatrix& tm, const std::string& path);
std::string heatmap_csv(const TrafficMatrix& tm);

}  // namespace topoopt

#endif  // TOPOOPT_WORKLOAD_HPP
