#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "topoopt/error.hpp"
#include "topoopt/presets.hpp"
#include "topoopt/workload.hpp"

// resolve_job probes <config_dir>/presets/<name>.json for non-builtin names.

using namespace topoopt;

namespace {

// The 16-server recommendation-model example: four ~5 GB embedding tables
// plus a 2 GB dense stack (22 GB model), per-server batch 8192, 512-wide
// double-precision activations (4096 B/sample).
JobSpec dlrm_example() {
  JobSpec job;
  job.name = "dlrm_example";
  job.batch_per_gpu = 8192;
  job.num_servers = 16;
  job.precision_bytes = 4;
  for (int t = 0; t < 4; ++t) {
    job.layers.push_back(LayerSpec{LayerKind::kEmbedding, 5e9, 4096.0, 0.0, 0.0});
  }
  job.layers.push_back(LayerSpec{LayerKind::kDense, 2e9, 8192.0, 0.0, 0.0});
  return job;
}

}  // namespace

TEST_CASE("pure data parallel DLRM synchronizes 44 GB per member") {
  const JobSpec job = dlrm_example();
  const ParallelStrategy dp = ParallelStrategy::pure_data_parallel(job);
  const TransferSet ts = derive_transfers(job, dp);
  REQUIRE(ts.allreduce_groups.size() == 1);
  CHECK(ts.mp_transfers.empty());
  const AllReduceGroup& g = ts.allreduce_groups[0];
  CHECK(g.members.size() == 16);
  CHECK(g.bytes_per_member == doctest::Approx(22e9));
  CHECK(g.per_member_traffic() == doctest::Approx(44e9));
}

TEST_CASE("hybrid placement shrinks the max transfer to 4 GB and 32 MB MP") {
  const JobSpec job = dlrm_example();
  const ParallelStrategy hybrid = dlrm_hybrid_strategy(job, {0, 3, 8, 13});
  const TransferSet ts = derive_transfers(job, hybrid);

  REQUIRE(ts.allreduce_groups.size() == 1);
  const AllReduceGroup& g = ts.allreduce_groups[0];
  CHECK(g.bytes_per_member == doctest::Approx(2e9));
  CHECK(g.per_member_traffic() == doctest::Approx(4e9));

  // Each table host exchanges batch * activation bytes with every other
  // server, in both directions.
  CHECK(ts.mp_transfers.size() == 4 * 15 * 2);
  for (const MpTransfer& t : ts.mp_transfers) {
    CHECK(t.bytes == doctest::Approx(8192.0 * 4096.0));  // 32 MiB
  }
}

TEST_CASE("single server yields an empty TransferSet") {
  JobSpec job = dlrm_example();
  job.num_servers = 1;
  const TransferSet ts =
      derive_transfers(job, ParallelStrategy::pure_data_parallel(job));
  CHECK(ts.empty());
}

TEST_CASE("unassigned layer is a validation error") {
  const JobSpec job = dlrm_example();
  ParallelStrategy broken = ParallelStrategy::pure_data_parallel(job);
  broken.assignments.pop_back();
  CHECK_THROWS_AS(derive_transfers(job, broken), Error);
}

TEST_CASE("ring volume splits evenly over assigned strides") {
  TransferSet ts;
  ts.num_servers = 16;
  AllReduceGroup g;
  g.id = 0;
  for (int i = 0; i < 16; ++i) g.members.push_back(i);
  g.bytes_per_member = 1.6e9;
  ts.allreduce_groups.push_back(g);

  std::map<int, std::vector<int>> rings{{0, {1, 3, 7}}};
  const TrafficMatrix tm = traffic_matrix(ts, rings);
  const double per_edge = 2.0 * 15.0 / 16.0 * 1.6e9 / 3.0;
  CHECK(tm.at(0, 1) == doctest::Approx(per_edge));
  CHECK(tm.at(0, 3) == doctest::Approx(per_edge));
  CHECK(tm.at(0, 7) == doctest::Approx(per_edge));
  CHECK(tm.at(5, 6) == doctest::Approx(per_edge));
  CHECK(tm.at(0, 2) == 0.0);
}

TEST_CASE("empty TransferSet maps to the zero matrix") {
  TransferSet ts;
  ts.num_servers = 4;
  CHECK(traffic_matrix(ts).total() == 0.0);
}

TEST_CASE("one MP transfer lands in one cell") {
  TransferSet ts;
  ts.num_servers = 8;
  ts.mp_transfers.push_back(MpTransfer{2, 5, 1e6});
  const TrafficMatrix tm = traffic_matrix(ts);
  CHECK(tm.at(2, 5) == doctest::Approx(1e6));
  CHECK(tm.total() == doctest::Approx(1e6));
}

TEST_CASE("invalid stride for a group is rejected") {
  TransferSet ts;
  ts.num_servers = 12;
  AllReduceGroup g;
  g.id = 0;
  for (int i = 0; i < 12; ++i) g.members.push_back(i);
  g.bytes_per_member = 1.0;
  ts.allreduce_groups.push_back(g);
  std::map<int, std::vector<int>> bad{{0, {4}}};  // gcd(4,12) != 1
  CHECK_THROWS_AS(traffic_matrix(ts, bad), Error);
}

TEST_CASE("conservation: matrix total equals MP plus ring wire bytes") {
  const JobSpec job = dlrm_example();
  const ParallelStrategy hybrid = dlrm_hybrid_strategy(job, {0, 3, 8, 13});
  const TransferSet ts = derive_transfers(job, hybrid);
  const TrafficMatrix tm = traffic_matrix(ts);
  CHECK(tm.total() ==
        doctest::Approx(ts.total_mp_bytes() + ts.total_allreduce_wire_bytes()));
}

TEST_CASE("determinism: identical inputs give identical outputs") {
  const JobSpec job = dlrm_example();
  const ParallelStrategy hybrid = dlrm_hybrid_strategy(job, {0, 3, 8, 13});
  const TransferSet a = derive_transfers(job, hybrid);
  const TransferSet b = derive_transfers(job, hybrid);
  REQUIRE(a.mp_transfers.size() == b.mp_transfers.size());
  for (size_t i = 0; i < a.mp_transfers.size(); ++i) {
    CHECK(a.mp_transfers[i].src == b.mp_transfers[i].src);
    CHECK(a.mp_transfers[i].dst == b.mp_transfers[i].dst);
    CHECK(a.mp_transfers[i].bytes == b.mp_transfers[i].bytes);
  }
  CHECK(traffic_matrix(a).bytes == traffic_matrix(b).bytes);
}

TEST_CASE("permuting strides moves cells but keeps the total") {
  TransferSet ts;
  ts.num_servers = 16;
  AllReduceGroup g;
  g.id = 0;
  for (int i = 0; i < 16; ++i) g.members.push_back(i);
  g.bytes_per_member = 3.2e9;
  ts.allreduce_groups.push_back(g);

  const TrafficMatrix plus1 = traffic_matrix(ts);
  std::map<int, std::vector<int>> alt{{0, {3}}};
  const TrafficMatrix plus3 = traffic_matrix(ts, alt);
  CHECK(plus1.total() == doctest::Approx(plus3.total()));
  CHECK(plus1.at(0, 1) > 0.0);
  CHECK(plus3.at(0, 1) == 0.0);
  CHECK(plus3.at(0, 3) > 0.0);
}

TEST_CASE("heatmap CSV formatting") {
  TrafficMatrix zero;
  zero.n = 2;
  zero.bytes.assign(4, 0.0);
  CHECK(heatmap_csv(zero) == "0,0\n0,0\n");

  TrafficMatrix one;
  one.n = 2;
  one.bytes.assign(4, 0.0);
  one.at(0, 1) = 5.0;
  CHECK(heatmap_csv(one) == "0,5\n0,0\n");
}

TEST_CASE("heatmap of the hybrid example peaks at the AllReduce edge load") {
  const JobSpec job = dlrm_example();
  const ParallelStrategy hybrid = dlrm_hybrid_strategy(job, {0, 3, 8, 13});
  const TransferSet ts = derive_transfers(job, hybrid);
  const TrafficMatrix tm = traffic_matrix(ts);
  // Peak cell: an AllReduce successor edge leaving a table host, which also
  // carries that host's 32 MiB broadcast to the same neighbor.
  const double edge_load =
      ts.allreduce_groups[0].ring_volume_per_member() + 8192.0 * 4096.0;

  double max_cell = 0.0;
  for (int r = 0; r < tm.n; ++r) {
    for (int c = 0; c < tm.n; ++c) max_cell = std::max(max_cell, tm.at(r, c));
  }
  CHECK(max_cell == doctest::Approx(edge_load));

  const std::string path = "heatmap_test.csv";
  export_heatmap(tm, path);
  std::ifstream f(path);
  REQUIRE(f.good());
  int rows = 0;
  std::string line;
  while (std::getline(f, line)) ++rows;
  f.close();
  std::remove(path.c_str());
  CHECK(rows == 16);
}

TEST_CASE("builtin presets validate and resolve") {
  for (const std::string& name : builtin_preset_names()) {
    const JobSpec job = builtin_preset(name);
    CHECK_NOTHROW(job.validate());
    CHECK(job.name == name);
    CHECK_NOTHROW(resolve_job(name));
  }
  CHECK_THROWS_AS(resolve_job("no_such_model"), Error);
}

TEST_CASE("shipped preset files agree with the builtins") {
  const std::string dir = std::string(TOPOOPT_SOURCE_DIR) + "/configs";
  for (const std::string& name : builtin_preset_names()) {
    const JobSpec from_file = resolve_job(name + ".json", dir);  // <dir>/presets/<name>.json
    const JobSpec builtin = builtin_preset(name);
    CHECK(from_file.batch_per_gpu == builtin.batch_per_gpu);
    CHECK(from_file.num_servers == builtin.num_servers);
    REQUIRE(from_file.layers.size() == builtin.layers.size());
    for (size_t i = 0; i < builtin.layers.size(); ++i) {
      CHECK(from_file.layers[i].param_bytes == builtin.layers[i].param_bytes);
      CHECK(from_file.layers[i].activation_bytes_per_sample ==
            builtin.layers[i].activation_bytes_per_sample);
      CHECK(from_file.layers[i].fwd_compute_us == builtin.layers[i].fwd_compute_us);
    }
  }
}
