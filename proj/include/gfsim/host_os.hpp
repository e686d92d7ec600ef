#pragma once

#include <cstdint>
#include <functional>
#include <list>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gfsim/devices.hpp"
#include "gfsim/simcore.hpp"

namespace gfsim::host {

using simcore::Time;
using FileId = std::uint32_t;
using PageIndex = std::uint64_t;

struct PageKey {
  FileId file = 0;
  PageIndex page = 0;
  bool operator==(const PageKey&) const = default;
};

struct PageKeyHash {
  std::size_t operator()(const PageKey& k) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(k.file) << 48) ^ k.page);
  }
};

/// Half-open page range [begin, end).
struct PageRange {
  PageIndex begin = 0;
  PageIndex end = 0;
  std::uint64_t size() const { return end > begin ? end - begin : 0; }
  bool empty() const { return end <= begin; }
  bool operator==(const PageRange&) const = default;
};

enum class PageStatus : std::uint8_t { InFlight, Present };

struct PageState {
  PageStatus status = PageStatus::InFlight;
  // Async readahead trigger. The window that planted it is remembered so a
  // later hit can size the next window for that stream.
  bool marker = false;
  PageIndex marker_window_start = 0;
  std::uint64_t marker_window_size = 0;
  std::vector<std::uint64_t> waiters;  // pread ids blocked on this page
  std::list<PageKey>::iterator lru_pos;
};

/// Host page cache with global LRU eviction of present pages.
class OsPageCache {
 public:
  OsPageCache(std::uint64_t page_size, std::uint64_t capacity_pages);

  std::uint64_t page_size() const { return page_size_; }
  std::uint64_t capacity() const { return capacity_; }
  std::size_t resident() const { return pages_.size(); }

  const PageState* find(PageKey k) const;
  PageState* find(PageKey k);
  bool is_resident(PageKey k) const { return find(k) != nullptr; }
  bool is_present(PageKey k) const;

  /// Inserts an in-flight page, evicting the least recently used present
  /// page if the cache is full.
  PageState& insert_in_flight(PageKey k);
  void touch(PageKey k);
  void clear();
  std::uint64_t evictions() const { return evictions_; }

 private:
  std::uint64_t page_size_;
  std::uint64_t capacity_;
  std::unordered_map<PageKey, PageState, PageKeyHash> pages_;
  std::list<PageKey> lru_;  // front = least recently used
  std::uint64_t evictions_ = 0;
};

struct ReadaheadState {
  PageIndex window_start = 0;
  std::uint64_t window_size = 0;
  std::uint64_t async_size = 0;
  std::uint64_t ra_max = 32;
  PageIndex prev_request_end = 0;
};

enum class ReadKind : std::uint8_t { Hit, MarkerHit, InitialSequential, Random, Eof };

struct FetchPlan {
  ReadKind kind = ReadKind::Hit;
  PageRange sync_range;   // requested pages; only the absent ones are fetched
  PageRange async_range;  // readahead pages fetched without blocking
  std::optional<PageIndex> consumed_marker;
  std::optional<PageIndex> new_marker;
  ReadaheadState new_state;
};

/// Linux-style ondemand readahead decision for one read. Pure: inspects the
/// cache but does not modify it.
FetchPlan readahead_decide(const ReadaheadState& state, FileId file, std::uint64_t file_size,
                           std::uint64_t offset, std::uint64_t size, const OsPageCache& cache);

struct HostConfig {
  std::uint64_t os_page_size = 4096;
  std::uint64_t cache_capacity_bytes = 64ULL << 30;
  std::uint64_t ra_max_bytes = 128 << 10;
  double cpu_copy_ns_per_byte = 0.1;
  bool ramfs = false;  // storage replaced by a zero-latency, infinite-bandwidth store
};

struct PreadResult {
  std::uint64_t bytes_read = 0;
  Time issued_at = 0;
  Time done_at = 0;
  Time blocked_ns = 0;  // time spent waiting for absent or in-flight pages
};

/// Host OS file layer: page cache, per-descriptor readahead and the SSD
/// dispatch path behind pread().
class HostOs {
 public:
  using Callback = std::function<void(const PreadResult&)>;

  HostOs(HostConfig cfg, simcore::EventQueue& events, devices::SsdModel& ssd);

  void register_file(FileId file, std::uint64_t size);
  std::uint64_t file_size(FileId file) const;

  /// Issues a pread at the current simulated time. `done` fires once every
  /// requested page is present plus the memory-copy cost.
  void pread(FileId file, std::uint64_t offset, std::uint64_t size, Callback done);

  /// Empties the cache and resets every readahead state.
  void drop_caches();

  const OsPageCache& cache() const { return cache_; }
  const ReadaheadState& readahead(FileId file) const { return ra_.at(file); }

  // Metrics.
  std::uint64_t ssd_bytes() const { return ssd_bytes_; }
  std::uint64_t touched_bytes() const { return touched_bytes_; }
  Time blocked_ns() const { return blocked_ns_; }
  std::uint64_t preads() const { return preads_; }
  std::uint64_t blocking_preads() const { return blocking_preads_; }
  const std::vector<std::uint64_t>& window_history() const { return window_history_; }
  const std::vector<Time>& drop_times() const { return drop_times_; }

 private:
  struct PendingRead {
    PreadResult result;
    std::uint64_t waiting_pages = 0;
    Callback done;
  };

  std::vector<PageRange> claim_absent(FileId file, PageRange range);
  void submit(FileId file, PageRange run, std::function<void()> then);
  void fetch_sync(FileId file, PageRange range);
  void fetch_async(FileId file, PageRange range, bool set_marker, PageIndex marker_page, std::uint64_t marker_start,
                   std::uint64_t marker_size);
  void on_ssd_complete(FileId file, PageRange range);
  void finish(std::uint64_t id, Time pages_ready_at);
  std::uint64_t page_bytes(FileId file, PageIndex p) const;

  HostConfig cfg_;
  simcore::EventQueue& events_;
  devices::SsdModel& ssd_;
  OsPageCache cache_;
  std::uint64_t ra_max_pages_;
  std::unordered_map<FileId, std::uint64_t> file_sizes_;
  std::unordered_map<FileId, ReadaheadState> ra_;
  std::unordered_map<std::uint64_t, PendingRead> pending_;
  std::uint64_t next_read_id_ = 0;

  std::unordered_set<PageKey, PageKeyHash> touched_;
  std::uint64_t touched_bytes_ = 0;
  std::uint64_t ssd_bytes_ = 0;
  Time blocked_ns_ = 0;
  std::uint64_t preads_ = 0;
  std::uint64_t blocking_preads_ = 0;
  std::vector<std::uint64_t> window_history_;
  std::vector<Time> drop_times_;
};

}  // namespace gfsim::host
