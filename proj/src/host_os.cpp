#include "gfsim/host_os.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace gfsim::host {

namespace {

std::uint64_t div_ceil(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

}  // namespace

// ---------------------------------------------------------------------------
// OsPageCache

OsPageCache::OsPageCache(std::uint64_t page_size, std::uint64_t capacity_pages)
    : page_size_(page_size), capacity_(capacity_pages) {
  GFSIM_CHECK(page_size_ > 0, "host page size must be positive");
  GFSIM_CHECK(capacity_ > 0, "host cache capacity must be at least one page");
}

const PageState* OsPageCache::find(PageKey k) const {
  auto it = pages_.find(k);
  return it == pages_.end() ? nullptr : &it->second;
}

PageState* OsPageCache::find(PageKey k) {
  auto it = pages_.find(k);
  return it == pages_.end() ? nullptr : &it->second;
}

bool OsPageCache::is_present(PageKey k) const {
  const PageState* s = find(k);
  return s != nullptr && s->status == PageStatus::Present;
}

PageState& OsPageCache::insert_in_flight(PageKey k) {
  GFSIM_CHECK(find(k) == nullptr, "page fetched twice while resident");
  if (pages_.size() >= capacity_) {
    auto victim = std::find_if(lru_.begin(), lru_.end(), [this](const PageKey& v) {
      const PageState& s = pages_.at(v);
      return s.status == PageStatus::Present && s.waiters.empty();
    });
    GFSIM_CHECK(victim != lru_.end(), "host page cache full of in-flight pages");
    pages_.erase(*victim);
    lru_.erase(victim);
    ++evictions_;
  }
  lru_.push_back(k);
  PageState& s = pages_[k];
  s.lru_pos = std::prev(lru_.end());
  return s;
}

void OsPageCache::touch(PageKey k) {
  PageState* s = find(k);
  if (s == nullptr) return;
  lru_.splice(lru_.end(), lru_, s->lru_pos);
}

void OsPageCache::clear() {
  pages_.clear();
  lru_.clear();
}

// ---------------------------------------------------------------------------
// Readahead

FetchPlan readahead_decide(const ReadaheadState& state, FileId file, std::uint64_t file_size,
                           std::uint64_t offset, std::uint64_t size, const OsPageCache& cache) {
  FetchPlan plan;
  plan.new_state = state;
  if (offset >= file_size || size == 0) {
    plan.kind = ReadKind::Eof;
    return plan;
  }
  const std::uint64_t ps = cache.page_size();
  const std::uint64_t total_pages = div_ceil(file_size, ps);
  const PageIndex first = offset / ps;
  const PageIndex last = div_ceil(std::min(offset + size, file_size), ps);
  const std::uint64_t n = last - first;
  plan.sync_range = {first, last};
  plan.new_state.prev_request_end = last;

  for (PageIndex p = first; p < last; ++p) {
    const PageState* s = cache.find({file, p});
    if (s != nullptr && s->marker) {
      // Stream continues into its async window: queue the next, larger one.
      const PageIndex next = s->marker_window_start + s->marker_window_size;
      const std::uint64_t next_size = std::min(2 * s->marker_window_size, state.ra_max);
      plan.kind = ReadKind::MarkerHit;
      plan.consumed_marker = p;
      if (next < total_pages) {
        plan.async_range = {next, std::min(next + next_size, total_pages)};
        plan.new_marker = next;
      }
      plan.new_state.window_start = next;
      plan.new_state.window_size = next_size;
      plan.new_state.async_size = next_size;
      return plan;
    }
  }

  bool all_resident = true;
  for (PageIndex p = first; p < last && all_resident; ++p) all_resident = cache.is_resident({file, p});
  if (all_resident) {
    plan.kind = ReadKind::Hit;
    return plan;
  }

  const bool sequential =
      first == 0 || first == state.prev_request_end || cache.is_resident({file, first - 1});
  if (sequential) {
    const std::uint64_t window = std::min(4 * n, state.ra_max);
    plan.kind = ReadKind::InitialSequential;
    plan.new_state.window_start = first;
    plan.new_state.window_size = window;
    plan.new_state.async_size = 0;
    if (window > n) {
      const PageIndex async_begin = first + n;
      plan.new_state.async_size = window - n;
      if (async_begin < total_pages) {
        plan.async_range = {async_begin, std::min(first + window, total_pages)};
        plan.new_marker = async_begin;
      }
    }
    return plan;
  }

  plan.kind = ReadKind::Random;
  plan.new_state.window_start = first;
  plan.new_state.window_size = 0;
  plan.new_state.async_size = 0;
  return plan;
}

// ---------------------------------------------------------------------------
// HostOs

HostOs::HostOs(HostConfig cfg, simcore::EventQueue& events, devices::SsdModel& ssd)
    : cfg_(cfg),
      events_(events),
      ssd_(ssd),
      cache_(cfg.os_page_size, std::max<std::uint64_t>(1, cfg.cache_capacity_bytes / cfg.os_page_size)),
      ra_max_pages_(std::max<std::uint64_t>(1, cfg.ra_max_bytes / cfg.os_page_size)) {}

void HostOs::register_file(FileId file, std::uint64_t size) {
  file_sizes_[file] = size;
  ReadaheadState st;
  st.ra_max = ra_max_pages_;
  ra_[file] = st;
}

std::uint64_t HostOs::file_size(FileId file) const { return file_sizes_.at(file); }

std::uint64_t HostOs::page_bytes(FileId file, PageIndex p) const {
  const std::uint64_t fsize = file_sizes_.at(file);
  const std::uint64_t start = p * cfg_.os_page_size;
  return start >= fsize ? 0 : std::min(cfg_.os_page_size, fsize - start);
}

void HostOs::pread(FileId file, std::uint64_t offset, std::uint64_t size, Callback done) {
  const Time now = events_.now();
  const std::uint64_t fsize = file_size(file);
  ++preads_;
  const std::uint64_t id = next_read_id_++;
  PendingRead& pr = pending_[id];
  pr.result.issued_at = now;
  pr.done = std::move(done);

  ReadaheadState& state = ra_.at(file);
  const FetchPlan plan = readahead_decide(state, file, fsize, offset, size, cache_);
  if (plan.kind == ReadKind::Eof) {
    finish(id, now);
    return;
  }
  pr.result.bytes_read = std::min(size, fsize - offset);

  if (plan.consumed_marker) {
    if (PageState* s = cache_.find({file, *plan.consumed_marker})) s->marker = false;
  }
  for (PageIndex p = plan.sync_range.begin; p < plan.sync_range.end; ++p) {
    const PageKey k{file, p};
    cache_.touch(k);
    if (touched_.insert(k).second) touched_bytes_ += page_bytes(file, p);
  }
  fetch_sync(file, plan.sync_range);
  if (!plan.async_range.empty()) {
    fetch_async(file, plan.async_range, plan.new_marker.has_value(), plan.new_marker.value_or(0),
          plan.new_state.window_start, plan.new_state.window_size);
  }
  if (plan.kind == ReadKind::InitialSequential || plan.kind == ReadKind::MarkerHit) {
    if (plan.new_state.window_size > 0) window_history_.push_back(plan.new_state.window_size * cfg_.os_page_size);
  }
  state = plan.new_state;

  for (PageIndex p = plan.sync_range.begin; p < plan.sync_range.end; ++p) {
    PageState* s = cache_.find({file, p});
    GFSIM_CHECK(s != nullptr, "requested page neither resident nor fetched");
    if (s->status != PageStatus::Present) {
      s->waiters.push_back(id);
      ++pr.waiting_pages;
    }
  }
  if (pr.waiting_pages == 0) finish(id, now);
}

std::vector<PageRange> HostOs::claim_absent(FileId file, PageRange range) {
  // Absent pages grouped into contiguous runs, each no larger than the
  // readahead maximum, and marked in flight.
  std::vector<PageRange> runs;
  PageIndex p = range.begin;
  while (p < range.end) {
    if (cache_.is_resident({file, p})) {
      ++p;
      continue;
    }
    const PageIndex run_begin = p;
    while (p < range.end && p - run_begin < ra_max_pages_ && !cache_.is_resident({file, p})) {
      cache_.insert_in_flight({file, p});
      ++p;
    }
    runs.push_back({run_begin, p});
  }
  return runs;
}

void HostOs::submit(FileId file, PageRange run, std::function<void()> then) {
  std::uint64_t bytes = 0;
  for (PageIndex p = run.begin; p < run.end; ++p) bytes += page_bytes(file, p);
  ssd_bytes_ += bytes;
  const Time now = events_.now();
  const Time done = cfg_.ramfs ? now : ssd_.submit(bytes, now);
  events_.schedule(done, simcore::EventKind::SsdComplete, [this, file, run, then = std::move(then)] {
    on_ssd_complete(file, run);
    if (then) then();
  });
}

void HostOs::fetch_sync(FileId file, PageRange range) {
  // A blocking read walks its pages in order: each missing stretch is read
  // once the previous one has arrived.
  auto runs = std::make_shared<std::vector<PageRange>>(claim_absent(file, range));
  auto step = std::make_shared<std::function<void(std::size_t)>>();
  *step = [this, file, runs, weak = std::weak_ptr<std::function<void(std::size_t)>>(step)](std::size_t i) {
    if (i >= runs->size()) return;
    auto self = weak.lock();
    submit(file, (*runs)[i], [self, i] { (*self)(i + 1); });
  };
  (*step)(0);
}

void HostOs::fetch_async(FileId file, PageRange range, bool set_marker, PageIndex marker_page,
                         std::uint64_t marker_start, std::uint64_t marker_size) {
  for (const PageRange& run : claim_absent(file, range)) submit(file, run, nullptr);
  if (set_marker) {
    if (PageState* s = cache_.find({file, marker_page})) {
      s->marker = true;
      s->marker_window_start = marker_start;
      s->marker_window_size = marker_size;
    }
  }
}

void HostOs::on_ssd_complete(FileId file, PageRange range) {
  const Time now = events_.now();
  std::vector<std::uint64_t> ready;
  for (PageIndex p = range.begin; p < range.end; ++p) {
    PageState* s = cache_.find({file, p});
    GFSIM_CHECK(s != nullptr && s->status == PageStatus::InFlight, "ssd completion for a non in-flight page");
    s->status = PageStatus::Present;
    for (std::uint64_t id : s->waiters) {
      PendingRead& pr = pending_.at(id);
      if (--pr.waiting_pages == 0) ready.push_back(id);
    }
    s->waiters.clear();
  }
  for (std::uint64_t id : ready) finish(id, now);
}

void HostOs::finish(std::uint64_t id, Time pages_ready_at) {
  auto node = pending_.extract(id);
  PendingRead pr = std::move(node.mapped());
  pr.result.blocked_ns = pages_ready_at - pr.result.issued_at;
  const auto copy = static_cast<Time>(
      std::ceil(static_cast<double>(pr.result.bytes_read) * cfg_.cpu_copy_ns_per_byte));
  pr.result.done_at = pages_ready_at + copy;
  blocked_ns_ += pr.result.blocked_ns;
  if (pr.result.blocked_ns > 0) ++blocking_preads_;
  events_.schedule(pr.result.done_at, simcore::EventKind::PreadComplete,
                   [cb = std::move(pr.done), res = pr.result] {
                     if (cb) cb(res);
                   });
}

void HostOs::drop_caches() {
  GFSIM_CHECK(pending_.empty(), "drop_caches with reads in flight");
  cache_.clear();
  for (auto& [file, st] : ra_) {
    const std::uint64_t max = st.ra_max;
    st = ReadaheadState{};
    st.ra_max = max;
  }
  drop_times_.push_back(events_.now());
}

}  // namespace gfsim::host
