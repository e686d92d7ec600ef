#include "gfsim/gpufs_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gfsim::gpufs {

std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::GlobalLruDealloc: return "global-lru-dealloc";
    case Policy::PerTbLra: return "per-tb-lra";
  }
  return "?";
}

std::optional<Policy> parse_policy(std::string_view s) {
  if (s == "global-lru-dealloc") return Policy::GlobalLruDealloc;
  if (s == "per-tb-lra") return Policy::PerTbLra;
  return std::nullopt;
}

Time page_cost(const PageCosts& costs, PageOp op) {
  switch (op) {
    case PageOp::Lookup: return costs.lookup_ns;
    case PageOp::Alloc: return costs.alloc_ns;
    case PageOp::Dealloc: return costs.dealloc_ns;
    case PageOp::Remap: return costs.remap_ns;
    case PageOp::GlobalContention: return costs.global_contention_ns;
  }
  return 0;
}

Time copy_cost(const PageCosts& costs, std::uint64_t bytes) {
  return static_cast<Time>(std::ceil(static_cast<double>(bytes) * costs.copy_ns_per_byte));
}

std::uint64_t lra_capacity(std::uint64_t capacity_bytes, std::uint64_t page_size, std::uint64_t resident_tbs) {
  if (page_size == 0 || resident_tbs == 0) throw std::invalid_argument("lra_capacity: zero page size or residency");
  return (capacity_bytes / page_size) / resident_tbs;
}

GpuPageCache::GpuPageCache(CacheConfig cfg, std::uint32_t resident_slots) : cfg_(cfg) {
  if (cfg_.page_size == 0) throw std::invalid_argument("gpufs.page_size must be positive");
  const std::uint64_t n = cfg_.capacity_bytes / cfg_.page_size;
  if (n == 0) throw std::invalid_argument("gpufs.cache_bytes smaller than one page");
  if (n > UINT32_MAX) throw std::invalid_argument("gpufs cache has too many frames");
  frames_.resize(n);
  free_list_.reserve(n);
  // Free list is a stack; push in reverse so frame 0 is handed out first.
  for (std::uint64_t i = n; i > 0; --i) free_list_.push_back(static_cast<FrameId>(i - 1));
  lra_max_len_ = lra_capacity(cfg_.capacity_bytes, cfg_.page_size, std::max<std::uint32_t>(1, resident_slots));
  lra_.resize(std::max<std::uint32_t>(1, resident_slots));
  for (auto& q : lra_) q.max_len = lra_max_len_;
}

void GpuPageCache::charge(PageOp op) {
  ++page_ops_;
  page_op_ns_ += page_cost(cfg_.costs, op);
}

LookupResult GpuPageCache::lookup(GpuPageKey key) {
  charge(PageOp::Lookup);
  auto it = map_.find(key);
  if (it == map_.end()) {
    ++misses_;
    return {LookupKind::Miss, 0};
  }
  ++hits_;
  const Frame& fr = frames_[it->second];
  return {fr.state == FrameState::Valid ? LookupKind::Hit : LookupKind::Pending, it->second};
}

FrameId GpuPageCache::take_free() {
  const FrameId f = free_list_.back();
  free_list_.pop_back();
  return f;
}

void GpuPageCache::map(FrameId f, TbId tb, std::uint32_t slot, GpuPageKey key) {
  Frame& fr = frames_[f];
  fr.key = key;
  fr.state = FrameState::InFlight;
  fr.last_alloc_seq = ++alloc_seq_;
  fr.lra_slot = slot;
  fr.content = {};
  map_.emplace(key, f);
  if (cfg_.policy == Policy::GlobalLruDealloc) alloc_order_.emplace(fr.last_alloc_seq, f);
  (void)tb;
}

bool GpuPageCache::can_allocate() const {
  return cfg_.policy == Policy::PerTbLra || !free_list_.empty() || valid_frames_ > 0;
}

void GpuPageCache::unmap(FrameId f) {
  Frame& fr = frames_[f];
  if (fr.state == FrameState::Valid) --valid_frames_;
  map_.erase(fr.key);
  if (cfg_.policy == Policy::GlobalLruDealloc) alloc_order_.erase({fr.last_alloc_seq, f});
  fr.state = FrameState::Free;
}

AllocResult GpuPageCache::allocate(TbId tb, std::uint32_t lra_slot, GpuPageKey key, Time now) {
  GFSIM_CHECK(!map_.contains(key), "allocate for a page that is already mapped");
  ++allocations_;
  AllocResult res;

  if (cfg_.policy == Policy::PerTbLra) {
    LraQueue& q = lra_.at(lra_slot);
    if (q.entries.size() >= q.max_len || free_list_.empty()) {
      if (q.entries.empty()) {
        throw std::runtime_error("per-tb-lra: GPU page cache smaller than the resident threadblocks");
      }
      // Reuse the slot's least recently allocated frame in place.
      const FrameId f = q.entries.front();
      q.entries.pop_front();
      GFSIM_CHECK(frames_[f].state == FrameState::Valid, "lra head frame is not valid");
      res.victim = frames_[f].key;
      unmap(f);
      map(f, tb, lra_slot, key);
      q.entries.push_back(f);
      charge(PageOp::Remap);
      ++remaps_;
      ++evictions_;
      res.frame = f;
      res.ready_at = now + cfg_.costs.remap_ns;
    } else {
      const FrameId f = take_free();
      map(f, tb, lra_slot, key);
      q.entries.push_back(f);
      charge(PageOp::Alloc);
      res.frame = f;
      res.ready_at = now + cfg_.costs.alloc_ns;
    }
  } else {
    // The shared structure admits one operation at a time.
    const Time start = std::max(now, global_busy_until_);
    Time hold = cfg_.costs.alloc_ns + cfg_.costs.global_contention_ns;
    FrameId f;
    if (!free_list_.empty()) {
      f = take_free();
    } else {
      auto it = std::find_if(alloc_order_.begin(), alloc_order_.end(),
                             [this](const auto& e) { return frames_[e.second].state == FrameState::Valid; });
      GFSIM_CHECK(it != alloc_order_.end(), "allocate with every frame in flight");
      f = it->second;
      res.victim = frames_[f].key;
      unmap(f);
      charge(PageOp::Dealloc);
      ++evictions_;
      hold += cfg_.costs.dealloc_ns;
    }
    map(f, tb, lra_slot, key);
    charge(PageOp::Alloc);
    charge(PageOp::GlobalContention);
    global_busy_until_ = start + hold;
    res.frame = f;
    res.ready_at = global_busy_until_;
  }
  if (record_victims_ && res.victim) victim_log_.push_back(*res.victim);
  return res;
}

void GpuPageCache::install(FrameId f, const PageChunk& content) {
  Frame& fr = frames_.at(f);
  GFSIM_CHECK(fr.state == FrameState::InFlight, "install into a frame that is not in flight");
  GFSIM_CHECK(fr.key == content.key, "install of a page into a frame mapped to another page");
  fr.state = FrameState::Valid;
  fr.content = content;
  ++valid_frames_;
}

void GpuPageCache::release(FrameId f) {
  Frame& fr = frames_.at(f);
  GFSIM_CHECK(fr.state == FrameState::InFlight, "release of a frame that is not in flight");
  if (cfg_.policy == Policy::PerTbLra) {
    auto& q = lra_.at(fr.lra_slot).entries;
    auto it = std::find(q.begin(), q.end(), f);
    if (it != q.end()) q.erase(it);
  }
  unmap(f);
  free_list_.push_back(f);
}

void GpuPageCache::check_invariants() const {
  std::uint64_t occupied = 0;
  for (FrameId f = 0; f < frames_.size(); ++f) {
    const Frame& fr = frames_[f];
    if (fr.state == FrameState::Free) continue;
    ++occupied;
    auto it = map_.find(fr.key);
    GFSIM_CHECK(it != map_.end() && it->second == f, "mapped frame missing from the page map");
  }
  GFSIM_CHECK(occupied == map_.size(), "page map and frame table disagree");
  GFSIM_CHECK(static_cast<std::uint64_t>(std::count_if(frames_.begin(), frames_.end(), [](const Frame& fr) {
                return fr.state == FrameState::Valid;
              })) == valid_frames_,
              "valid frame count drifted");
  GFSIM_CHECK(occupied + free_list_.size() == frames_.size(), "frame conservation violated");
  if (cfg_.policy == Policy::PerTbLra) {
    for (const LraQueue& q : lra_) {
      GFSIM_CHECK(q.entries.size() <= q.max_len, "lra queue longer than its capacity");
      for (std::size_t i = 1; i < q.entries.size(); ++i) {
        GFSIM_CHECK(frames_[q.entries[i - 1]].last_alloc_seq < frames_[q.entries[i]].last_alloc_seq,
                    "lra queue out of allocation order");
      }
    }
  }
}

}  // namespace gfsim::gpufs
