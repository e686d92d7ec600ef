#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gfsim/devices.hpp"
#include "gfsim/host_os.hpp"
#include "gfsim/pages.hpp"
#include "gfsim/simcore.hpp"

namespace gfsim::rpc {

using simcore::Time;

struct IoRequest {
  TbId tb = 0;
  FileId file = 0;
  std::uint64_t offset = 0;     // GPUfs-page aligned
  std::uint64_t size = 0;       // page size, or page + prefetch size
  std::uint64_t page_size = 0;  // GPUfs page size used to split the reply
};

enum class SlotState : std::uint8_t { Empty, Pending, InService, Ready };

struct Slot {
  SlotState state = SlotState::Empty;
  IoRequest request;
  std::vector<PageChunk> result;
  TbId owner_tb = 0;
};

/// tb_id mod n_slots
std::uint32_t slot_for_threadblock(TbId tb, std::uint32_t n_slots);

/// The shared CPU-GPU request array, partitioned into contiguous per-worker
/// ranges.
class RpcQueue {
 public:
  RpcQueue(std::uint32_t n_slots, std::uint32_t n_workers);

  std::uint32_t n_slots() const { return static_cast<std::uint32_t>(slots_.size()); }
  std::uint32_t n_workers() const { return n_workers_; }
  std::uint32_t slots_per_worker() const { return n_slots() / n_workers_; }
  std::uint32_t worker_of(std::uint32_t slot) const { return slot / slots_per_worker(); }

  const Slot& slot(std::uint32_t i) const { return slots_.at(i); }

  /// Empty -> Pending.
  void submit(std::uint32_t slot, const IoRequest& req);
  /// Scans the worker's slots in index order; the first Pending one becomes
  /// InService.
  std::optional<std::uint32_t> take(std::uint32_t worker);
  /// InService -> Ready.
  void complete(std::uint32_t slot, std::vector<PageChunk> pages);
  /// Ready -> Empty; hands the pages to the threadblock.
  std::vector<PageChunk> collect(std::uint32_t slot);

  std::uint64_t transitions() const { return transitions_; }

 private:
  void move(std::uint32_t slot, SlotState from, SlotState to);

  std::vector<Slot> slots_;
  std::uint32_t n_workers_;
  std::uint64_t transitions_ = 0;
};

/// Splits `bytes_read` bytes starting at `offset` into GPUfs pages with their
/// per-page metadata and content tags.
std::vector<PageChunk> split_into_pages(FileId file, std::uint64_t offset, std::uint64_t bytes_read,
                                        std::uint64_t page_size);

/// Coalesces staged chunks into PCIe transfers of at most `staging_capacity`
/// bytes each. Returns the transfer sizes.
std::vector<std::uint64_t> batch_ready(const std::vector<std::uint64_t>& chunk_bytes,
                                       std::uint64_t staging_capacity);

struct HostWorker {
  std::uint32_t id = 0;
  std::uint64_t staging_capacity = 2ULL << 20;
  std::uint64_t spin_count = 0;
  std::uint64_t spins_before_first_service = 0;
  std::optional<Time> first_service_at;
  Time busy_until = 0;
  std::uint64_t services = 0;
};

struct WorkerConfig {
  std::uint32_t n_slots = 128;
  std::uint32_t n_workers = 4;
  Time poll_interval_ns = 1000;
  std::uint64_t staging_bytes = 2ULL << 20;
  bool pcie_disabled = false;
};

struct TraceRecord {
  TbId tb = 0;
  FileId file = 0;
  std::uint64_t offset = 0;
  std::uint64_t size = 0;
  bool operator==(const TraceRecord&) const = default;
};

/// Host threads polling the request queue. Each worker is synchronous: it
/// services one slot at a time (pread, staging, PCIe transfer) and polls
/// again when the transfer lands.
class WorkerPool {
 public:
  using ReadyFn = std::function<void(std::uint32_t slot)>;

  WorkerPool(WorkerConfig cfg, simcore::EventQueue& events, host::HostOs& host, devices::PcieModel& pcie,
             RpcQueue& queue, ReadyFn on_ready);

  /// Starts polling at the current time; polling continues while
  /// `keep_running` returns true.
  void start(std::function<bool()> keep_running);

  const std::vector<HostWorker>& workers() const { return workers_; }

  void set_recorder(std::vector<TraceRecord>* trace) { trace_ = trace; }

  std::uint64_t pread_bytes() const { return pread_bytes_; }
  std::uint64_t pcie_bytes() const { return pcie_bytes_; }
  std::uint64_t pcie_transfers() const { return pcie_transfers_; }

 private:
  void poll(std::uint32_t w);
  void service(std::uint32_t w, std::uint32_t slot);

  WorkerConfig cfg_;
  simcore::EventQueue& events_;
  host::HostOs& host_;
  devices::PcieModel& pcie_;
  RpcQueue& queue_;
  ReadyFn on_ready_;
  std::function<bool()> keep_running_;
  std::vector<HostWorker> workers_;
  std::vector<TraceRecord>* trace_ = nullptr;
  std::uint64_t pread_bytes_ = 0;
  std::uint64_t pcie_bytes_ = 0;
  std::uint64_t pcie_transfers_ = 0;
};

}  // namespace gfsim::rpc
