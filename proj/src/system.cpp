#include "gfsim/system.hpp"

#include <cmath>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "gfsim/prefetcher.hpp"

namespace gfsim {

namespace {

using simcore::EventKind;

Time scaled_ns(double ns_per_byte, std::uint64_t bytes) {
  return static_cast<Time>(std::ceil(ns_per_byte * static_cast<double>(bytes)));
}

void validate(const SimConfig& cfg, const std::vector<workloads::FileSpec>& files) {
  if (cfg.cache.page_size == 0) throw std::invalid_argument("gpufs.page_size must be positive");
  if (cfg.prefetch_bytes % cfg.cache.page_size != 0) {
    throw std::invalid_argument("gpufs.prefetch_bytes must be a multiple of gpufs.page_size");
  }
  if (cfg.host.os_page_size == 0) throw std::invalid_argument("host.os_page_size must be positive");
  for (const auto& f : files) {
    if (f.size == 0) throw std::invalid_argument("workload file of size zero");
  }
}

void fill_host_metrics(MetricsReport& m, const host::HostOs& host, const devices::SsdModel& ssd) {
  m.ssd_bytes = host.ssd_bytes();
  m.ssd_requests = ssd.requests();
  m.touched_bytes = host.touched_bytes();
  m.pread_bytes = 0;
  m.host_blocked_ns = host.blocked_ns();
  m.blocking_preads = host.blocking_preads();
  m.ra_window_history = host.window_history();
}

double bandwidth(std::uint64_t bytes, Time ns) {
  return ns == 0 ? 0.0 : static_cast<double>(bytes) * 1e9 / static_cast<double>(ns);
}

class GpuRun {
 public:
  GpuRun(const SimConfig& cfg, const workloads::WorkloadSpec& w)
      : cfg_(cfg),
        w_(w),
        ssd_(cfg.ssd),
        pcie_(cfg.pcie),
        host_(cfg.host, events_, ssd_),
        queue_(cfg.rpc.n_slots, cfg.rpc.n_workers),
        pool_(cfg.rpc, events_, host_, pcie_, queue_, [this](std::uint32_t slot) { on_ready(slot); }),
        rng_(cfg.seed) {
    validate(cfg, w.files);
    if (!cfg.gpu_cache_disabled) {
      cache_.emplace(cfg.cache, gpu::resident_limit(cfg.gpu));
      cache_->set_record_victims(cfg.record_victims);
    }
    for (FileId f = 0; f < w.files.size(); ++f) host_.register_file(f, w.files[f].size);
    tbs_.resize(w.programs.size());
    for (TbId i = 0; i < tbs_.size(); ++i) tbs_[i].id = i;
    slot_waiting_.resize(queue_.n_slots());
    out_.rpcs_per_tb.assign(tbs_.size(), 0);
    out_.private_hits_per_tb.assign(tbs_.size(), 0);
    if (cfg.record_trace) pool_.set_recorder(&out_.trace);
  }

  RunOutput run() {
    host_.drop_caches();
    const auto n = static_cast<std::uint32_t>(tbs_.size());
    remaining_ = n;
    if (n > 0) {
      plan_ = gpu::dispatch(n, cfg_.gpu, rng_);
      pool_.start([this] { return remaining_ > 0; });
      for (std::uint32_t i = 0; i < plan_.initial; ++i) {
        const TbId tb = plan_.order[i];
        events_.schedule(plan_.start_at[i], EventKind::TbStep, [this, tb, i] { start_tb(tb, i); });
      }
      next_dispatch_ = plan_.initial;
    }
    while (auto ev = events_.advance()) {
      ev->action();
      if (cfg_.check_every_event && cache_) cache_->check_invariants();
    }
    GFSIM_CHECK(remaining_ == 0, "event queue drained with threadblocks still running");
    if (cache_) cache_->check_invariants();
    collect_metrics();
    check_conservation(out_.metrics);
    return std::move(out_);
  }

 private:
  struct Tb {
    TbId id = 0;
    std::uint32_t residency = 0;
    std::size_t op = 0;
    std::uint64_t cursor = 0;  // bytes of the current gread consumed
    std::uint64_t op_delivered = 0;
    prefetch::PrivateBuffer buffer;
    bool rpc_outstanding = false;
    rpc::IoRequest request;
    // Page in progress.
    GpuPageKey key;
    std::uint64_t page_offset = 0;
    std::uint64_t page_bytes = 0;
    std::uint64_t deliver_bytes = 0;
    gpufs::FrameId frame = 0;
    Time resume_not_before = 0;
  };

  std::uint64_t page_size() const { return cfg_.cache.page_size; }
  Time copy(std::uint64_t bytes) const { return gpufs::copy_cost(cfg_.cache.costs, bytes); }

  bool tag_ok(const PageChunk& c, GpuPageKey key) const {
    const std::uint64_t off = key.page * page_size();
    return c.key == key && c.offset == off && c.tag == page_tag(key.file, off);
  }

  void check_tag(const PageChunk& c, GpuPageKey key) {
    if (!tag_ok(c, key)) ++tag_mismatches_;
  }

  void start_tb(TbId tb, std::uint32_t residency) {
    Tb& t = tbs_[tb];
    t.residency = residency;
    t.buffer = prefetch::PrivateBuffer(tb, cfg_.prefetch_bytes);
    if (cache_ && cfg_.cache.policy == gpufs::Policy::PerTbLra) cache_->set_slot_owner(residency, tb);
    step(tb);
  }

  void step(TbId tb) {
    Tb& t = tbs_[tb];
    const auto& prog = w_.programs[tb];
    if (t.op >= prog.size()) {
      finish_tb(tb);
      return;
    }
    const workloads::ReadOp& op = prog[t.op];
    const std::uint64_t fsize = w_.files.at(op.file).size;
    const std::uint64_t pos = op.offset + t.cursor;
    if (t.cursor >= op.size || pos >= fsize) {
      const Time think = scaled_ns(w_.compute_ns_per_byte, t.op_delivered);
      ++t.op;
      t.cursor = 0;
      t.op_delivered = 0;
      events_.schedule_in(think, EventKind::TbStep, [this, tb] { step(tb); });
      return;
    }
    const std::uint64_t ps = page_size();
    t.key = {op.file, pos / ps};
    t.page_offset = t.key.page * ps;
    t.page_bytes = std::min(ps, fsize - t.page_offset);
    t.deliver_bytes = std::min(t.page_offset + t.page_bytes, op.offset + op.size) - pos;

    if (!cache_) {
      after_alloc(tb);
      return;
    }
    const Time at = events_.now() + cfg_.cache.costs.lookup_ns;
    const gpufs::LookupResult r = cache_->lookup(t.key);
    switch (r.kind) {
      case gpufs::LookupKind::Hit:
        cache_hit_bytes_ += t.deliver_bytes;
        check_tag(cache_->frame(r.frame).content, t.key);
        deliver(tb, DeliverySource::CacheHit, at + copy(t.deliver_bytes));
        break;
      case gpufs::LookupKind::Pending:
        cache_hit_bytes_ += t.deliver_bytes;
        t.frame = r.frame;
        t.resume_not_before = at;
        frame_waiters_[r.frame].push_back(tb);
        break;
      case gpufs::LookupKind::Miss: {
        if (!cache_->can_allocate()) {
          t.resume_not_before = at;
          alloc_waiters_.push_back(tb);
          break;
        }
        const gpufs::AllocResult a = cache_->allocate(tb, t.residency, t.key, at);
        t.frame = a.frame;
        events_.schedule(a.ready_at, EventKind::TbResume, [this, tb] { after_alloc(tb); });
        break;
      }
    }
  }

  void after_alloc(TbId tb) {
    Tb& t = tbs_[tb];
    if (auto page = t.buffer.take(t.key)) {
      ++private_hits_;
      ++out_.private_hits_per_tb[tb];
      check_tag(*page, t.key);
      Time done = events_.now() + copy(t.deliver_bytes);
      if (cache_) {
        cache_->install(t.frame, *page);
        wake_waiters(t.frame);
        done += copy(t.page_bytes);
      }
      deliver(tb, DeliverySource::PrivateBuffer, done);
      return;
    }
    send_rpc(tb);
  }

  void send_rpc(TbId tb) {
    Tb& t = tbs_[tb];
    GFSIM_CHECK(!t.rpc_outstanding, "threadblock issued a second outstanding request");
    t.rpc_outstanding = true;
    ++rpc_count_;
    ++out_.rpcs_per_tb[tb];
    const auto& file = w_.files.at(t.key.file);
    const bool prefetch = cfg_.prefetch_bytes > 0 && w_.read_only && file.read_only;
    const std::uint64_t span =
        prefetch ? prefetch::request_span(t.page_offset, page_size(), cfg_.prefetch_bytes, file.size) : t.page_bytes;
    t.request = rpc::IoRequest{tb, t.key.file, t.page_offset, span, page_size()};
    const std::uint32_t slot = rpc::slot_for_threadblock(tb, queue_.n_slots());
    if (queue_.slot(slot).state == rpc::SlotState::Empty && slot_waiting_[slot].empty()) {
      queue_.submit(slot, t.request);
    } else {
      slot_waiting_[slot].push_back(tb);
    }
  }

  void on_ready(std::uint32_t slot) {
    const TbId tb = queue_.slot(slot).owner_tb;
    std::vector<PageChunk> pages = queue_.collect(slot);
    if (!slot_waiting_[slot].empty()) {
      const TbId next = slot_waiting_[slot].front();
      slot_waiting_[slot].pop_front();
      queue_.submit(slot, tbs_[next].request);
    }

    Tb& t = tbs_[tb];
    GFSIM_CHECK(t.rpc_outstanding, "reply for a threadblock without a request");
    t.rpc_outstanding = false;
    for (const PageChunk& p : pages) {
      if (!sent_pages_.insert(p.key).second) redundant_bytes_ += p.bytes;
    }
    if (pages.empty()) {
      // EOF: nothing to install; the gread ends here.
      if (cache_) {
        cache_->release(t.frame);
        wake_waiters(t.frame);
      }
      t.cursor = w_.programs[tb][t.op].size;
      events_.schedule_in(0, EventKind::TbStep, [this, tb] { step(tb); });
      return;
    }
    const PageChunk& first = pages.front();
    check_tag(first, t.key);
    Time done = events_.now() + copy(t.deliver_bytes);
    if (cache_) {
      cache_->install(t.frame, first);
      wake_waiters(t.frame);
      done += copy(t.page_bytes);
    }
    t.buffer.fill(std::span<const PageChunk>(pages).subspan(1));
    deliver(tb, DeliverySource::Rpc, done);
  }

  void wake_waiters(gpufs::FrameId f) {
    // A frame became valid or free: every threadblock stalled on allocation
    // looks its page up again.
    for (TbId w : alloc_waiters_) {
      events_.schedule(std::max(events_.now(), tbs_[w].resume_not_before), EventKind::TbResume, [this, w] { step(w); });
    }
    alloc_waiters_.clear();
    auto it = frame_waiters_.find(f);
    if (it == frame_waiters_.end()) return;
    std::vector<TbId> waiters = std::move(it->second);
    frame_waiters_.erase(it);
    const bool valid = cache_->frame(f).state == gpufs::FrameState::Valid;
    for (TbId w : waiters) {
      Tb& t = tbs_[w];
      if (!valid) {
        // The frame was released; look the page up again.
        cache_hit_bytes_ -= t.deliver_bytes;
        events_.schedule(std::max(events_.now(), t.resume_not_before), EventKind::TbResume, [this, w] { step(w); });
        continue;
      }
      check_tag(cache_->frame(f).content, t.key);
      deliver(w, DeliverySource::CacheHit, std::max(events_.now(), t.resume_not_before) + copy(t.deliver_bytes));
    }
  }

  void deliver(TbId tb, DeliverySource src, Time at) {
    Tb& t = tbs_[tb];
    delivered_ += t.deliver_bytes;
    if (cfg_.record_deliveries) out_.deliveries.push_back({tb, t.key, t.deliver_bytes, src});
    t.cursor += t.deliver_bytes;
    t.op_delivered += t.deliver_bytes;
    events_.schedule(at, EventKind::TbStep, [this, tb] { step(tb); });
  }

  void finish_tb(TbId tb) {
    Tb& t = tbs_[tb];
    t.buffer.clear();
    --remaining_;
    finish_time_ = events_.now();
    if (next_dispatch_ < plan_.order.size()) {
      const TbId next = plan_.order[next_dispatch_++];
      start_tb(next, t.residency);
    }
  }

  void collect_metrics() {
    MetricsReport& m = out_.metrics;
    m.seed = cfg_.seed;
    m.end_to_end_ns = finish_time_;
    m.delivered_bytes = delivered_;
    m.io_bandwidth_bytes_per_s = bandwidth(delivered_, finish_time_);
    m.rpc_count = rpc_count_;
    if (cache_) {
      m.gpu_cache_hits = cache_->hits();
      m.gpu_cache_misses = cache_->misses();
      m.evictions = cache_->evictions();
      m.remaps = cache_->remaps();
      m.page_ops = cache_->page_ops();
      out_.victims = cache_->victims();
    }
    m.gpu_cache_hit_bytes = cache_hit_bytes_;
    m.private_hits = private_hits_;
    fill_host_metrics(m, host_, ssd_);
    m.pcie_bytes = pool_.pcie_bytes();
    m.pcie_transfers = pool_.pcie_transfers();
    m.pread_bytes = pool_.pread_bytes();
    const std::uint64_t from_host = delivered_ - cache_hit_bytes_;
    m.prefetch_waste_bytes = m.pcie_bytes > from_host ? m.pcie_bytes - from_host : 0;
    m.redundant_bytes = redundant_bytes_;
    m.tag_mismatches = tag_mismatches_;
    m.events = events_.fired_count();
    for (const rpc::HostWorker& w : pool_.workers()) {
      m.worker_spins.push_back(w.spin_count);
      m.worker_first_service_spins.push_back(w.spins_before_first_service);
      m.worker_first_service_ns.push_back(w.first_service_at.value_or(0));
    }
  }

  const SimConfig& cfg_;
  const workloads::WorkloadSpec& w_;
  simcore::EventQueue events_;
  devices::SsdModel ssd_;
  devices::PcieModel pcie_;
  host::HostOs host_;
  rpc::RpcQueue queue_;
  rpc::WorkerPool pool_;
  simcore::SeededRng rng_;
  std::optional<gpufs::GpuPageCache> cache_;

  gpu::DispatchPlan plan_;
  std::size_t next_dispatch_ = 0;
  std::uint32_t remaining_ = 0;
  std::vector<Tb> tbs_;
  std::vector<std::deque<TbId>> slot_waiting_;
  std::unordered_map<gpufs::FrameId, std::vector<TbId>> frame_waiters_;
  std::vector<TbId> alloc_waiters_;
  std::unordered_set<GpuPageKey, GpuPageKeyHash> sent_pages_;

  RunOutput out_;
  std::uint64_t delivered_ = 0;
  std::uint64_t cache_hit_bytes_ = 0;
  std::uint64_t private_hits_ = 0;
  std::uint64_t rpc_count_ = 0;
  std::uint64_t redundant_bytes_ = 0;
  std::uint64_t tag_mismatches_ = 0;
  Time finish_time_ = 0;
};

}  // namespace

RunOutput simulate(const SimConfig& cfg, const workloads::WorkloadSpec& workload) {
  GpuRun run(cfg, workload);
  return run.run();
}

RunOutput replay(const SimConfig& cfg, const workloads::Trace& trace, const std::vector<workloads::FileSpec>& files) {
  validate(cfg, files);
  for (const auto& r : trace) {
    if (r.file >= files.size()) throw std::invalid_argument("trace references an unknown file");
    if (r.size == 0 || r.offset >= files[r.file].size) throw std::invalid_argument("trace record outside file bounds");
  }
  const rpc::RpcQueue layout(cfg.rpc.n_slots, cfg.rpc.n_workers);

  simcore::EventQueue events;
  devices::SsdModel ssd(cfg.ssd);
  host::HostOs host(cfg.host, events, ssd);
  for (FileId f = 0; f < files.size(); ++f) host.register_file(f, files[f].size);
  host.drop_caches();

  std::vector<bool> busy(layout.n_workers(), false);
  std::size_t next = 0;
  std::uint64_t read = 0;
  Time finish = 0;
  std::function<void()> pump = [&] {
    while (next < trace.size()) {
      const auto& rec = trace[next];
      const std::uint32_t w = layout.worker_of(rpc::slot_for_threadblock(rec.tb, layout.n_slots()));
      if (busy[w]) return;
      busy[w] = true;
      ++next;
      host.pread(rec.file, rec.offset, rec.size, [&, w](const host::PreadResult& r) {
        read += r.bytes_read;
        busy[w] = false;
        finish = events.now();
        pump();
      });
    }
  };
  pump();
  events.run();
  GFSIM_CHECK(next == trace.size(), "replay stopped before the end of the trace");

  RunOutput out;
  MetricsReport& m = out.metrics;
  m.seed = cfg.seed;
  m.end_to_end_ns = finish;
  m.rpc_count = trace.size();
  fill_host_metrics(m, host, ssd);
  m.pread_bytes = read;
  m.io_bandwidth_bytes_per_s = bandwidth(read, finish);
  m.events = events.fired_count();
  out.trace = trace;
  check_conservation(m);
  return out;
}

}  // namespace gfsim
