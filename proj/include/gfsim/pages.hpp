#pragma once

#include <cstdint>
#include <functional>

namespace gfsim {

using FileId = std::uint32_t;
using TbId = std::uint32_t;

/// A GPUfs page: page_index counts in units of the GPUfs page size.
struct GpuPageKey {
  FileId file = 0;
  std::uint64_t page = 0;
  bool operator==(const GpuPageKey&) const = default;
  auto operator<=>(const GpuPageKey&) const = default;
};

struct GpuPageKeyHash {
  std::size_t operator()(const GpuPageKey& k) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(k.file) << 48) ^ k.page);
  }
};

/// Synthetic content of a page: every byte of the page "carries" this tag, so
/// a delivery can be checked against the page it claims to be.
constexpr std::uint64_t page_tag(FileId file, std::uint64_t byte_offset) {
  std::uint64_t z = (static_cast<std::uint64_t>(file) << 56) ^ byte_offset ^ 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// One GPUfs page worth of file data as it travels from a host worker to the
/// GPU: per-page metadata plus the content tag.
struct PageChunk {
  GpuPageKey key;
  std::uint64_t offset = 0;  // byte offset of the page in the file
  std::uint64_t bytes = 0;   // < page size only for the page holding EOF
  std::uint64_t tag = 0;
};

}  // namespace gfsim
