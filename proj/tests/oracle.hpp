#pragma once

// Straight-line reference for tiny GPU page cache instances: one resident
// threadblock at a time, so every step happens in program order and no
// event queue is needed.

#include <cstdint>
#include <vector>

namespace oracle {

struct Read {
  std::uint64_t offset = 0;
  std::uint64_t size = 0;
};

struct Instance {
  std::uint64_t page_size = 4096;
  std::uint64_t file_size = 0;      // single file, id 0
  std::uint64_t cache_pages = 0;
  std::uint64_t prefetch_pages = 0;
  std::vector<std::vector<Read>> programs;  // run in index order
};

enum class Source { Cache, Buffer, Rpc };

struct Step {
  std::uint32_t tb = 0;
  std::uint64_t page = 0;
  std::uint64_t bytes = 0;
  Source source = Source::Rpc;
  bool operator==(const Step&) const = default;
};

struct Result {
  std::vector<Step> deliveries;
  std::uint64_t rpcs = 0;
  std::vector<std::uint64_t> victims;
};

Result run(const Instance& in);

}  // namespace oracle
