#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>

#include "gfsim/pages.hpp"

namespace gfsim::prefetch {

/// Size of the read a threadblock sends to the host on a private-buffer miss:
/// the faulting page plus the static prefetch size, clipped at EOF.
std::uint64_t request_span(std::uint64_t offset, std::uint64_t page_size, std::uint64_t prefetch_size,
                           std::uint64_t file_size);

/// Per-threadblock holding area for pages that arrived with an RPC but were
/// not the page being requested.
class PrivateBuffer {
 public:
  PrivateBuffer() = default;
  PrivateBuffer(TbId owner, std::uint64_t capacity_bytes) : owner_(owner), capacity_(capacity_bytes) {}

  /// Removes and returns the page if held.
  std::optional<PageChunk> take(GpuPageKey key);

  /// Replaces the whole content with `pages`. Returns the bytes of the
  /// discarded, never-consumed entries.
  std::uint64_t fill(std::span<const PageChunk> pages);

  /// Drops everything; returns the discarded bytes.
  std::uint64_t clear();

  TbId owner() const { return owner_; }
  void set_owner(TbId tb) { owner_ = tb; }
  std::uint64_t capacity() const { return capacity_; }
  std::uint64_t bytes() const { return bytes_; }
  std::size_t size() const { return entries_.size(); }
  std::uint64_t fill_seq() const { return fill_seq_; }

 private:
  TbId owner_ = 0;
  std::uint64_t capacity_ = 0;
  std::uint64_t bytes_ = 0;
  std::uint64_t fill_seq_ = 0;
  std::map<GpuPageKey, PageChunk> entries_;
};

}  // namespace gfsim::prefetch
