#pragma once

#include <cstdint>
#include <vector>

#include "gfsim/devices.hpp"
#include "gfsim/gpu_exec.hpp"
#include "gfsim/gpufs_core.hpp"
#include "gfsim/host_os.hpp"
#include "gfsim/metrics.hpp"
#include "gfsim/rpc.hpp"
#include "gfsim/workloads.hpp"

namespace gfsim {

/// Everything one simulation instance needs apart from the workload.
struct SimConfig {
  std::uint64_t seed = 1;
  devices::SsdConfig ssd;
  devices::PcieConfig pcie;
  host::HostConfig host;
  rpc::WorkerConfig rpc;
  gpu::GpuConfig gpu;
  gpufs::CacheConfig cache;
  std::uint64_t prefetch_bytes = 0;
  bool gpu_cache_disabled = false;
  bool check_every_event = false;
  bool record_trace = false;
  bool record_deliveries = false;
  bool record_victims = false;
};

enum class DeliverySource : std::uint8_t { CacheHit, PrivateBuffer, Rpc };

/// One page worth of data handed to a threadblock's user buffer.
struct Delivery {
  TbId tb = 0;
  GpuPageKey key;
  std::uint64_t bytes = 0;
  DeliverySource source = DeliverySource::Rpc;
  bool operator==(const Delivery&) const = default;
};

struct RunOutput {
  MetricsReport metrics;
  workloads::Trace trace;             // RPC-serviced requests, in service order
  std::vector<Delivery> deliveries;   // in delivery order
  std::vector<GpuPageKey> victims;    // GPU page cache evictions, in order
  std::vector<std::uint64_t> rpcs_per_tb;
  std::vector<std::uint64_t> private_hits_per_tb;
};

/// Runs the full CPU-GPU stack on a workload from a cold host cache and
/// checks byte conservation at the end (throws ConservationError).
RunOutput simulate(const SimConfig& cfg, const workloads::WorkloadSpec& workload);

/// Drives the host path alone with a recorded request stream: no GPU, no
/// PCIe. Each record goes to the worker owning its threadblock's slot; a
/// record is issued once its worker is idle and every earlier record has
/// been issued, so the host sees the recorded pread order.
RunOutput replay(const SimConfig& cfg, const workloads::Trace& trace, const std::vector<workloads::FileSpec>& files);

}  // namespace gfsim
