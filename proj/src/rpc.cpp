#include "gfsim/rpc.hpp"

#include <algorithm>
#include <stdexcept>

namespace gfsim::rpc {

std::uint32_t slot_for_threadblock(TbId tb, std::uint32_t n_slots) {
  GFSIM_CHECK(n_slots > 0, "slot_for_threadblock with zero slots");
  return tb % n_slots;
}

RpcQueue::RpcQueue(std::uint32_t n_slots, std::uint32_t n_workers) : slots_(n_slots), n_workers_(n_workers) {
  if (n_slots == 0 || n_workers == 0) throw std::invalid_argument("rpc: n_slots and n_workers must be positive");
  if (n_slots % n_workers != 0) throw std::invalid_argument("rpc: n_slots must be divisible by n_workers");
}

void RpcQueue::move(std::uint32_t slot, SlotState from, SlotState to) {
  Slot& s = slots_.at(slot);
  GFSIM_CHECK(s.state == from, "illegal rpc slot transition");
  s.state = to;
  ++transitions_;
}

void RpcQueue::submit(std::uint32_t slot, const IoRequest& req) {
  move(slot, SlotState::Empty, SlotState::Pending);
  Slot& s = slots_[slot];
  s.request = req;
  s.owner_tb = req.tb;
  s.result.clear();
}

std::optional<std::uint32_t> RpcQueue::take(std::uint32_t worker) {
  GFSIM_CHECK(worker < n_workers_, "unknown worker");
  const std::uint32_t begin = worker * slots_per_worker();
  const std::uint32_t end = begin + slots_per_worker();
  for (std::uint32_t i = begin; i < end; ++i) {
    if (slots_[i].state == SlotState::Pending) {
      move(i, SlotState::Pending, SlotState::InService);
      return i;
    }
  }
  return std::nullopt;
}

void RpcQueue::complete(std::uint32_t slot, std::vector<PageChunk> pages) {
  move(slot, SlotState::InService, SlotState::Ready);
  slots_[slot].result = std::move(pages);
}

std::vector<PageChunk> RpcQueue::collect(std::uint32_t slot) {
  move(slot, SlotState::Ready, SlotState::Empty);
  return std::move(slots_[slot].result);
}

std::vector<PageChunk> split_into_pages(FileId file, std::uint64_t offset, std::uint64_t bytes_read,
                                        std::uint64_t page_size) {
  GFSIM_CHECK(page_size > 0, "split_into_pages with zero page size");
  std::vector<PageChunk> pages;
  pages.reserve((bytes_read + page_size - 1) / page_size);
  for (std::uint64_t done = 0; done < bytes_read; done += page_size) {
    const std::uint64_t off = offset + done;
    pages.push_back(PageChunk{{file, off / page_size}, off, std::min(page_size, bytes_read - done), page_tag(file, off)});
  }
  return pages;
}

std::vector<std::uint64_t> batch_ready(const std::vector<std::uint64_t>& chunk_bytes,
                                       std::uint64_t staging_capacity) {
  GFSIM_CHECK(staging_capacity > 0, "zero staging capacity");
  std::uint64_t total = 0;
  for (std::uint64_t b : chunk_bytes) total += b;
  std::vector<std::uint64_t> transfers;
  while (total > 0) {
    const std::uint64_t t = std::min(total, staging_capacity);
    transfers.push_back(t);
    total -= t;
  }
  return transfers;
}

WorkerPool::WorkerPool(WorkerConfig cfg, simcore::EventQueue& events, host::HostOs& host, devices::PcieModel& pcie,
                       RpcQueue& queue, ReadyFn on_ready)
    : cfg_(cfg), events_(events), host_(host), pcie_(pcie), queue_(queue), on_ready_(std::move(on_ready)) {
  workers_.resize(queue_.n_workers());
  for (std::uint32_t i = 0; i < workers_.size(); ++i) {
    workers_[i].id = i;
    workers_[i].staging_capacity = cfg_.staging_bytes;
  }
}

void WorkerPool::start(std::function<bool()> keep_running) {
  keep_running_ = std::move(keep_running);
  for (std::uint32_t w = 0; w < workers_.size(); ++w) {
    events_.schedule_in(0, simcore::EventKind::WorkerPoll, [this, w] { poll(w); });
  }
}

void WorkerPool::poll(std::uint32_t w) {
  if (keep_running_ && !keep_running_()) return;
  HostWorker& worker = workers_[w];
  if (auto slot = queue_.take(w)) {
    if (!worker.first_service_at) worker.first_service_at = events_.now();
    service(w, *slot);
    return;
  }
  ++worker.spin_count;
  if (!worker.first_service_at) ++worker.spins_before_first_service;
  events_.schedule_in(cfg_.poll_interval_ns, simcore::EventKind::WorkerPoll, [this, w] { poll(w); });
}

void WorkerPool::service(std::uint32_t w, std::uint32_t slot) {
  const IoRequest req = queue_.slot(slot).request;
  ++workers_[w].services;
  if (trace_ != nullptr) trace_->push_back({req.tb, req.file, req.offset, req.size});

  host_.pread(req.file, req.offset, req.size, [this, w, slot, req](const host::PreadResult& r) {
    pread_bytes_ += r.bytes_read;
    std::vector<PageChunk> pages = split_into_pages(req.file, req.offset, r.bytes_read, req.page_size);
    std::vector<std::uint64_t> staged;
    staged.reserve(pages.size());
    for (const PageChunk& p : pages) staged.push_back(p.bytes);

    Time landed = events_.now();
    for (std::uint64_t bytes : batch_ready(staged, workers_[w].staging_capacity)) {
      pcie_bytes_ += bytes;
      ++pcie_transfers_;
      if (!cfg_.pcie_disabled) landed = pcie_.transfer(bytes, landed);
    }
    workers_[w].busy_until = landed;
    events_.schedule(landed, simcore::EventKind::PcieComplete, [this, w, slot, pages = std::move(pages)]() mutable {
      queue_.complete(slot, std::move(pages));
      on_ready_(slot);
      poll(w);
    });
  });
}

}  // namespace gfsim::rpc
