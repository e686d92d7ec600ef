#include "gfsim/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gfsim::workloads {

namespace {

constexpr std::uint64_t kAlign = 4096;
constexpr std::uint64_t MiB = 1ULL << 20;
constexpr std::uint64_t GiB = 1ULL << 30;

void append_range(std::vector<ReadOp>& prog, FileId file, std::uint64_t begin, std::uint64_t end,
                  std::uint64_t request_size) {
  for (std::uint64_t off = begin; off < end; off += request_size) {
    prog.push_back({file, off, std::min(request_size, end - off)});
  }
}

struct Table1Entry {
  const char* name;
  std::vector<std::uint64_t> files;
  std::uint32_t n_tb;
};

const std::vector<Table1Entry>& table1() {
  // "almost 1 GB" files are modeled as 1000 MiB; BACKPROP's 3.25 GB of
  // reads as a single file.
  static const std::vector<Table1Entry> t = {
      {"HOTSPOT", {GiB, GiB}, 128},
      {"LUD", {256 * MiB}, 128},
      {"BACKPROP", {3 * GiB + GiB / 4}, 128},
      {"BFS", {1126 * MiB + 400 * 1024}, 128},
      {"DWT2D", {768 * MiB}, 128},
      {"NW", {1000 * MiB, 1000 * MiB}, 100},
      {"PATHFINDER", {MiB, 952 * MiB}, 100},
      {"STENCIL", {GiB}, 128},
      {"2DCONV", {GiB}, 128},
      {"3DCONV", {512 * MiB}, 128},
      {"GESUMMV", {1000 * MiB}, 128},
      {"MVT", {1000 * MiB}, 128},
      {"BICG", {1000 * MiB}, 128},
      {"ATAX", {1000 * MiB}, 128},
  };
  return t;
}

}  // namespace

std::uint64_t WorkloadSpec::bytes_requested() const {
  std::uint64_t total = 0;
  for (const auto& prog : programs)
    for (const ReadOp& op : prog) total += op.size;
  return total;
}

WorkloadSpec gen_sequential_strided(std::uint32_t n_tb, std::uint64_t file_size, std::uint64_t total_read,
                                    std::uint64_t request_size) {
  if (n_tb == 0) throw std::invalid_argument("sequential workload needs at least one threadblock");
  if (request_size == 0) throw std::invalid_argument("request_size must be positive");
  if (total_read % n_tb != 0) throw std::invalid_argument("total_read must be divisible by n_tb");
  if (total_read > file_size) throw std::invalid_argument("total_read exceeds the file size");
  const std::uint64_t stride = total_read / n_tb;
  if (request_size > stride) throw std::invalid_argument("request_size larger than the per-threadblock stride");

  WorkloadSpec w;
  w.name = "sequential-strided";
  w.files = {{file_size, true}};
  w.n_tb = n_tb;
  w.request_size = request_size;
  w.assignment = StrideAssignment::ContiguousStrides;
  w.total_read = total_read;
  w.programs.resize(n_tb);
  for (std::uint32_t i = 0; i < n_tb; ++i) append_range(w.programs[i], 0, i * stride, (i + 1) * stride, request_size);
  return w;
}

WorkloadSpec gen_random_uniform(std::uint32_t n_tb, std::uint64_t file_size, std::uint64_t n_requests,
                                std::uint64_t request_size, simcore::SeededRng& rng) {
  if (n_tb == 0) throw std::invalid_argument("random workload needs at least one threadblock");
  if (request_size == 0 || request_size > file_size) throw std::invalid_argument("request_size must be in (0, file_size]");
  WorkloadSpec w;
  w.name = "random-uniform";
  w.files = {{file_size, true}};
  w.n_tb = n_tb;
  w.request_size = request_size;
  w.assignment = StrideAssignment::RandomUniform;
  w.total_read = n_requests * request_size;
  w.programs.resize(n_tb);
  const std::uint64_t positions = (file_size - request_size) / kAlign + 1;
  for (std::uint32_t i = 0; i < n_tb; ++i) {
    const std::uint64_t count = n_requests / n_tb + (i < n_requests % n_tb ? 1 : 0);
    for (std::uint64_t r = 0; r < count; ++r) {
      w.programs[i].push_back({0, rng.below(positions) * kAlign, request_size});
    }
  }
  return w;
}

WorkloadSpec gen_from_trace(const Trace& trace, const std::vector<FileSpec>& files) {
  WorkloadSpec w;
  w.name = "trace";
  w.files = files;
  w.assignment = StrideAssignment::ExplicitTrace;
  for (const auto& r : trace) {
    if (r.file >= files.size()) throw std::invalid_argument("trace references an unknown file");
    if (r.size == 0 || r.offset + r.size > files[r.file].size) {
      throw std::invalid_argument("trace record outside file bounds");
    }
    if (r.tb >= w.programs.size()) w.programs.resize(r.tb + 1);
    w.programs[r.tb].push_back({r.file, r.offset, r.size});
    w.total_read += r.size;
    w.request_size = std::max(w.request_size, r.size);
  }
  w.n_tb = static_cast<std::uint32_t>(w.programs.size());
  return w;
}

const std::vector<std::string>& table1_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : table1()) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

WorkloadSpec table1_config(std::string_view benchmark, double scale, std::uint64_t request_size) {
  auto it = std::find_if(table1().begin(), table1().end(), [&](const Table1Entry& e) { return benchmark == e.name; });
  if (it == table1().end()) throw std::invalid_argument("unknown benchmark: " + std::string(benchmark));
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  if (request_size == 0) throw std::invalid_argument("request_size must be positive");

  WorkloadSpec w;
  w.name = it->name;
  w.n_tb = it->n_tb;
  w.request_size = request_size;
  w.assignment = StrideAssignment::ContiguousStrides;
  w.programs.resize(w.n_tb);
  for (std::uint64_t full : it->files) {
    auto size = static_cast<std::uint64_t>(std::floor(static_cast<double>(full) * scale));
    size = std::max(kAlign, size / kAlign * kAlign);
    const auto file = static_cast<FileId>(w.files.size());
    w.files.push_back({size, true});
    w.total_read += size;
    std::uint64_t stride = (size + w.n_tb - 1) / w.n_tb;
    stride = (stride + kAlign - 1) / kAlign * kAlign;
    for (std::uint32_t i = 0; i < w.n_tb; ++i) {
      const std::uint64_t begin = std::min<std::uint64_t>(size, i * stride);
      const std::uint64_t end = std::min<std::uint64_t>(size, begin + stride);
      append_range(w.programs[i], file, begin, end, request_size);
    }
  }
  return w;
}

Trace parse_trace(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    long long tb = -1, file = -1, offset = -1, size = -1;
    std::string extra;
    if (!(ss >> tb >> file >> offset >> size) || (ss >> extra) || tb < 0 || file < 0 || offset < 0 || size <= 0) {
      throw std::runtime_error("malformed trace line " + std::to_string(lineno) + ": " + line);
    }
    trace.push_back({static_cast<TbId>(tb), static_cast<FileId>(file), static_cast<std::uint64_t>(offset),
                     static_cast<std::uint64_t>(size)});
  }
  return trace;
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  return parse_trace(in);
}

void write_trace(std::ostream& out, const Trace& trace) {
  out << "# tb_id file_id offset size\n";
  for (const auto& r : trace) out << r.tb << ' ' << r.file << ' ' << r.offset << ' ' << r.size << '\n';
}

}  // namespace gfsim::workloads
