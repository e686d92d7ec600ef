#include "gfsim/prefetcher.hpp"

#include <algorithm>

#include "gfsim/simcore.hpp"

namespace gfsim::prefetch {

std::uint64_t request_span(std::uint64_t offset, std::uint64_t page_size, std::uint64_t prefetch_size,
                           std::uint64_t file_size) {
  GFSIM_CHECK(page_size > 0, "page size must be positive");
  GFSIM_CHECK(offset < file_size, "request_span at or past EOF");
  const std::uint64_t page_start = offset / page_size * page_size;
  return std::min(page_size + prefetch_size, file_size - page_start);
}

std::optional<PageChunk> PrivateBuffer::take(GpuPageKey key) {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  PageChunk page = it->second;
  bytes_ -= page.bytes;
  entries_.erase(it);
  return page;
}

std::uint64_t PrivateBuffer::fill(std::span<const PageChunk> pages) {
  const std::uint64_t stale = clear();
  for (const PageChunk& p : pages) {
    auto [it, inserted] = entries_.emplace(p.key, p);
    if (inserted) bytes_ += p.bytes;
  }
  GFSIM_CHECK(bytes_ <= capacity_, "private buffer over capacity");
  ++fill_seq_;
  return stale;
}

std::uint64_t PrivateBuffer::clear() {
  const std::uint64_t stale = bytes_;
  entries_.clear();
  bytes_ = 0;
  return stale;
}

}  // namespace gfsim::prefetch
