#include "topoopt/presets.hpp"

#include <fstream>

#include "topoopt/error.hpp"
#include "topoopt/json_io.hpp"

namespace topoopt {

namespace {

LayerSpec dense(double param_bytes, double act_bytes, double fwd_us, double bwd_us) {
  return LayerSpec{LayerKind::kDense, param_bytes, act_bytes, fwd_us, bwd_us};
}

LayerSpec embedding(double param_bytes, double act_bytes, double fwd_us, double bwd_us) {
  return LayerSpec{LayerKind::kEmbedding, param_bytes, act_bytes, fwd_us, bwd_us};
}

LayerSpec attention(double param_bytes, double act_bytes, double fwd_us, double bwd_us) {
  return LayerSpec{LayerKind::kAttention, param_bytes, act_bytes, fwd_us, bwd_us};
}

LayerSpec conv(double param_bytes, double act_bytes, double fwd_us, double bwd_us) {
  return LayerSpec{LayerKind::kConv, param_bytes, act_bytes, fwd_us, bwd_us};
}

// 16 servers, four ~5 GB embedding tables plus a 2 GB dense stack (22 GB
// total), per-server batch 8192, 512-wide double-precision activations.
JobSpec make_dlrm16() {
  JobSpec job;
  job.name = "dlrm16";
  job.batch_per_gpu = 8192;
  job.num_servers = 16;
  job.precision_bytes = 4;
  for (int t = 0; t < 4; ++t) {
    job.layers.push_back(embedding(5e9, 4096.0, 900.0, 1400.0));
  }
  for (int l = 0; l < 8; ++l) {
    job.layers.push_back(dense(2.5e8, 8192.0, 450.0, 800.0));
  }
  return job;
}

// 128 servers, one large embedding table per server in the hybrid layout,
// 512-wide fp32 activations at the largest published batch; the dense stack
// alone synchronizes ~1.2 GB.
JobSpec make_dlrm128() {
  JobSpec job;
  job.name = "dlrm128";
  job.batch_per_gpu = 2048;
  job.num_servers = 128;
  job.precision_bytes = 4;
  for (int t = 0; t < 128; ++t) {
    job.layers.push_back(embedding(5.12e9, 2048.0, 120.0, 200.0));
  }
  for (int l = 0; l < 8; ++l) {
    job.layers.push_back(dense(6.7e7, 8192.0, 300.0, 520.0));
  }
  for (int l = 0; l < 16; ++l) {
    job.layers.push_back(dense(4.2e7, 16384.0, 260.0, 430.0));
  }
  return job;
}

// Mostly data parallel; dense layers dominate both bytes and compute.
JobSpec make_candle() {
  JobSpec job;
  job.name = "candle";
  job.batch_per_gpu = 256;
  job.num_servers = 128;
  job.precision_bytes = 4;
  for (int l = 0; l < 8; ++l) {
    job.layers.push_back(dense(1.074e9, 65536.0, 2200.0, 4100.0));
  }
  for (int l = 0; l < 16; ++l) {
    job.layers.push_back(dense(2.68e8, 65536.0, 1100.0, 2000.0));
  }
  return job;
}

JobSpec make_bert() {
  JobSpec job;
  job.name = "bert";
  job.batch_per_gpu = 16;
  job.num_servers = 128;
  job.precision_bytes = 4;
  job.layers.push_back(embedding(6.3e7, 262144.0, 350.0, 600.0));
  for (int b = 0; b < 12; ++b) {
    job.layers.push_back(attention(5.0e7, 262144.0, 2400.0, 4300.0));
  }
  job.layers.push_back(dense(4.2e6, 4096.0, 300.0, 500.0));
  return job;
}

JobSpec make_vgg() {
  JobSpec job;
  job.name = "vgg";
  job.batch_per_gpu = 64;
  job.num_servers = 128;
  job.precision_bytes = 4;
  for (int l = 0; l < 13; ++l) {
    job.layers.push_back(conv(4.5e6, 802816.0, 1500.0, 2700.0));
  }
  job.layers.push_back(dense(4.1e8, 16384.0, 900.0, 1600.0));
  job.layers.push_back(dense(6.7e7, 16384.0, 380.0, 650.0));
  job.layers.push_back(dense(1.6e7, 4000.0, 180.0, 320.0));
  return job;
}

JobSpec make_resnet50() {
  JobSpec job;
  job.name = "resnet50";
  job.batch_per_gpu = 128;
  job.num_servers = 128;
  job.precision_bytes = 4;
  for (int l = 0; l < 16; ++l) {
    job.layers.push_back(conv(6.4e6, 200704.0, 1400.0, 2500.0));
  }
  job.layers.push_back(dense(8.2e6, 8192.0, 250.0, 420.0));
  return job;
}

JobSpec make_ncf() {
  JobSpec job;
  job.name = "ncf";
  job.batch_per_gpu = 128;
  job.num_servers = 128;
  job.precision_bytes = 4;
  for (int t = 0; t < 64; ++t) {
    job.layers.push_back(embedding(2.56e8, 256.0, 90.0, 150.0));
  }
  for (int t = 0; t < 64; ++t) {
    job.layers.push_back(embedding(5.12e8, 512.0, 95.0, 160.0));
  }
  for (int l = 0; l < 8; ++l) {
    job.layers.push_back(dense(6.7e7, 16384.0, 240.0, 400.0));
  }
  return job;
}

}  // namespace

std::vector<std::string> builtin_preset_names() {
  return {"dlrm16", "dlrm128", "candle", "bert", "vgg", "resnet50", "ncf"};
}

JobSpec builtin_preset(const std::string& name) {
  if (name == "dlrm16") return make_dlrm16();
  if (name == "dlrm128") return make_dlrm128();
  if (name == "candle") return make_candle();
  if (name == "bert") return make_bert();
  if (name == "vgg") return make_vgg();
  if (name == "resnet50") return make_resnet50();
  if (name == "ncf") return make_ncf();
  throw Error("unknown preset: " + name);
}

JobSpec resolve_job(const std::string& name_or_path, const std::string& config_dir) {
  for (const std::string& name : builtin_preset_names()) {
    if (name == name_or_path) return builtin_preset(name);
  }
  {
    std::ifstream probe(name_or_path);
    if (probe.good()) return job_from_json(load_json_file(name_or_path));
  }
  if (!config_dir.empty()) {
    for (const std::string& candidate : {config_dir + "/presets/" + name_or_path,
                                         config_dir + "/presets/" + name_or_path + ".json"}) {
      std::ifstream probe(candidate);
      if (probe.good()) return job_from_json(load_json_file(candidate));
    }
  }
  throw Error("cannot resolve job '" + name_or_path + "' (not a preset, file, or config entry)");
}

ParallelStrategy dlrm_hybrid_strategy(const JobSpec& job, const std::vector<int>& table_servers) {
  ParallelStrategy s = ParallelStrategy::pure_data_parallel(job);
  size_t next = 0;
  for (size_t l = 0; l < job.layers.size(); ++l) {
    if (job.layers[l].kind != LayerKind::kEmbedding) continue;
    require(next < table_servers.size(), "dlrm_hybrid_strategy: not enough table servers");
    s.assignments[l] = LayerAssignment{false, {table_servers[next++]}};
  }
  require(next == table_servers.size(), "dlrm_hybrid_strategy: unused table servers");
  return s;
}

}  // namespace topoopt
