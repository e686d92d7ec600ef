#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gfsim/pages.hpp"
#include "gfsim/simcore.hpp"

namespace gfsim::gpufs {

using simcore::Time;
using FrameId = std::uint32_t;

enum class Policy : std::uint8_t { GlobalLruDealloc, PerTbLra };

std::string_view to_string(Policy p);
std::optional<Policy> parse_policy(std::string_view s);

enum class PageOp : std::uint8_t { Lookup, Alloc, Dealloc, Remap, GlobalContention };

struct PageCosts {
  Time lookup_ns = 200;
  Time alloc_ns = 600;
  Time dealloc_ns = 600;
  Time remap_ns = 300;
  Time global_contention_ns = 400;
  double copy_ns_per_byte = 0.05;
};

Time page_cost(const PageCosts& costs, PageOp op);
Time copy_cost(const PageCosts& costs, std::uint64_t bytes);

enum class FrameState : std::uint8_t { Free, InFlight, Valid };

struct Frame {
  GpuPageKey key;
  FrameState state = FrameState::Free;
  std::uint64_t last_alloc_seq = 0;
  std::uint32_t lra_slot = 0;
  PageChunk content;
};

/// Allocation-ordered frames of one residency slot. A threadblock that takes
/// over a slot inherits the queue.
struct LraQueue {
  TbId owner_tb = 0;
  std::uint64_t max_len = 0;
  std::deque<FrameId> entries;  // front = least recently allocated
};

/// floor((capacity_bytes / page_size) / resident_tbs)
std::uint64_t lra_capacity(std::uint64_t capacity_bytes, std::uint64_t page_size, std::uint64_t resident_tbs);

struct CacheConfig {
  std::uint64_t page_size = 4096;
  std::uint64_t capacity_bytes = 2ULL << 30;
  Policy policy = Policy::GlobalLruDealloc;
  PageCosts costs;
};

enum class LookupKind : std::uint8_t { Miss, Hit, Pending };

struct LookupResult {
  LookupKind kind = LookupKind::Miss;
  FrameId frame = 0;
};

struct AllocResult {
  FrameId frame = 0;
  Time ready_at = 0;  // when the allocation, including any lock wait, completes
  std::optional<GpuPageKey> victim;
};

/// The GPU page cache: frame table, page map and the two replacement
/// mechanisms. Under GlobalLruDealloc every allocation serializes on the
/// shared structure and a full cache deallocates the globally oldest frame
/// before allocating again. Under PerTbLra each residency slot recycles its
/// own oldest frame in place.
class GpuPageCache {
 public:
  GpuPageCache(CacheConfig cfg, std::uint32_t resident_slots);

  const CacheConfig& config() const { return cfg_; }
  std::uint64_t total_frames() const { return frames_.size(); }
  std::uint64_t free_frames() const { return free_list_.size(); }
  std::uint64_t lra_max_len() const { return lra_max_len_; }

  LookupResult lookup(GpuPageKey key);

  /// False when the global policy has no free frame and every mapped frame
  /// is still in flight; the caller retries after the next install.
  bool can_allocate() const;

  /// Pre: key absent. The new frame is InFlight and mapped to key.
  AllocResult allocate(TbId tb, std::uint32_t lra_slot, GpuPageKey key, Time now);

  /// Marks an InFlight frame valid with its content.
  void install(FrameId f, const PageChunk& content);

  /// Unmaps an InFlight frame that will not be filled (EOF) and frees it.
  void release(FrameId f);

  void set_slot_owner(std::uint32_t slot, TbId tb) { lra_.at(slot).owner_tb = tb; }
  const LraQueue& lra_queue(std::uint32_t slot) const { return lra_.at(slot); }
  const Frame& frame(FrameId f) const { return frames_.at(f); }

  /// Aborts on a broken structural invariant.
  void check_invariants() const;

  void set_record_victims(bool on) { record_victims_ = on; }
  const std::vector<GpuPageKey>& victims() const { return victim_log_; }

  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }
  std::uint64_t allocations() const { return allocations_; }
  std::uint64_t evictions() const { return evictions_; }
  std::uint64_t remaps() const { return remaps_; }
  std::uint64_t page_ops() const { return page_ops_; }
  Time page_op_ns() const { return page_op_ns_; }

 private:
  FrameId take_free();
  void map(FrameId f, TbId tb, std::uint32_t slot, GpuPageKey key);
  void unmap(FrameId f);
  void charge(PageOp op);

  CacheConfig cfg_;
  std::vector<Frame> frames_;
  std::vector<FrameId> free_list_;
  std::unordered_map<GpuPageKey, FrameId, GpuPageKeyHash> map_;
  std::set<std::pair<std::uint64_t, FrameId>> alloc_order_;  // global policy only
  std::vector<LraQueue> lra_;
  std::uint64_t lra_max_len_ = 0;
  std::uint64_t alloc_seq_ = 0;
  std::uint64_t valid_frames_ = 0;
  Time global_busy_until_ = 0;

  bool record_victims_ = false;
  std::vector<GpuPageKey> victim_log_;
  std::uint64_t hits_ = 0, misses_ = 0, allocations_ = 0, evictions_ = 0, remaps_ = 0, page_ops_ = 0;
  Time page_op_ns_ = 0;
};

}  // namespace gfsim::gpufs
