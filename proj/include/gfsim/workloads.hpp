#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gfsim/pages.hpp"
#include "gfsim/rpc.hpp"
#include "gfsim/simcore.hpp"

namespace gfsim::workloads {

struct FileSpec {
  std::uint64_t size = 0;
  bool read_only = true;
};

/// One gread issued by a threadblock.
struct ReadOp {
  FileId file = 0;
  std::uint64_t offset = 0;
  std::uint64_t size = 0;
};

enum class StrideAssignment : std::uint8_t { ContiguousStrides, ExplicitTrace, RandomUniform };

struct WorkloadSpec {
  std::string name;
  std::vector<FileSpec> files;
  std::uint32_t n_tb = 0;
  std::uint32_t threads_per_tb = 512;
  std::uint64_t request_size = 0;
  StrideAssignment assignment = StrideAssignment::ContiguousStrides;
  std::uint64_t total_read = 0;
  double compute_ns_per_byte = 0.0;
  bool read_only = true;
  /// programs[tb] is the ordered list of greads of that threadblock.
  std::vector<std::vector<ReadOp>> programs;

  std::uint64_t bytes_requested() const;
};

/// TB i reads [i*stride, (i+1)*stride) of file 0 in request_size pieces,
/// where stride = total_read / n_tb. The last piece of a stride is shorter
/// when request_size does not divide it.
WorkloadSpec gen_sequential_strided(std::uint32_t n_tb, std::uint64_t file_size, std::uint64_t total_read,
                                    std::uint64_t request_size);

/// Each TB issues its share of n_requests reads at uniform 4KB-aligned
/// offsets.
WorkloadSpec gen_random_uniform(std::uint32_t n_tb, std::uint64_t file_size, std::uint64_t n_requests,
                                std::uint64_t request_size, simcore::SeededRng& rng);

using Trace = std::vector<rpc::TraceRecord>;

/// Threadblock programs taken verbatim from a trace, one gread per record.
WorkloadSpec gen_from_trace(const Trace& trace, const std::vector<FileSpec>& files);

/// Benchmark-shaped configuration. Every file size is multiplied by `scale`
/// and rounded down to a 4KB multiple. Each TB reads an equal contiguous
/// portion of every file.
WorkloadSpec table1_config(std::string_view benchmark, double scale = 1.0, std::uint64_t request_size = 64 << 10);

const std::vector<std::string>& table1_names();

/// One record per line: "tb_id file_id offset size"; '#' starts a comment.
/// Throws std::runtime_error naming the line on malformed input.
Trace parse_trace(std::istream& in);
Trace load_trace(const std::string& path);
void write_trace(std::ostream& out, const Trace& trace);

}  // namespace gfsim::workloads
