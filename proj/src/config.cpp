#include "gfsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gfsim {

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"sim.seed", KeyType::Integer, "1", "first seed; repetition i uses seed + i"},
      {"sim.repetitions", KeyType::Integer, "10", "runs averaged per configuration"},
      {"sim.check_invariants", KeyType::Flag, "0", "check GPU cache structure after every event"},

      {"ssd.bandwidth_bytes_per_s", KeyType::Real, "2.8e9", "SSD read bandwidth"},
      {"ssd.base_latency_ns", KeyType::Integer, "80000", "SSD per-request latency"},
      {"ssd.max_inflight", KeyType::Integer, "32", "SSD internal parallelism"},
      {"pcie.bandwidth_bytes_per_s", KeyType::Real, "12e9", "host-to-device link bandwidth"},
      {"pcie.latency_ns", KeyType::Integer, "10000", "per-transfer link latency"},

      {"host.os_page_size", KeyType::Integer, "4096", "host page size"},
      {"host.cache_capacity_bytes", KeyType::Integer, "64G", "host page cache size"},
      {"host.ra_max_bytes", KeyType::Integer, "128K", "maximum readahead window"},
      {"host.cpu_copy_ns_per_byte", KeyType::Real, "0.1", "host memory copy cost"},

      {"rpc.n_slots", KeyType::Integer, "128", "request queue slots"},
      {"rpc.n_workers", KeyType::Integer, "4", "host worker threads"},
      {"rpc.poll_interval_ns", KeyType::Integer, "1000", "idle worker poll period"},
      {"rpc.staging_bytes", KeyType::Integer, "2M", "per-worker staging buffer"},

      {"gpu.sm_count", KeyType::Integer, "15", "streaming multiprocessors"},
      {"gpu.max_threads_per_sm", KeyType::Integer, "2048", "thread capacity per SM"},
      {"gpu.threads_per_tb", KeyType::Integer, "512", "threads per threadblock"},
      {"gpu.start_jitter_ns", KeyType::Integer, "1000", "maximum start jitter of the first wave"},
      {"gpu.dispatch_policy", KeyType::Text, "in-order", "in-order | shuffled | round-robin | reverse"},

      {"gpufs.page_size", KeyType::Integer, "4096", "GPUfs page size"},
      {"gpufs.cache_bytes", KeyType::Integer, "2G", "GPU page cache size"},
      {"gpufs.policy", KeyType::Text, "global-lru-dealloc", "global-lru-dealloc | per-tb-lra"},
      {"gpufs.prefetch_bytes", KeyType::Integer, "0", "GPU readahead prefetch size (0 disables)"},
      {"gpufs.lookup_ns", KeyType::Integer, "200", "page cache lookup cost"},
      {"gpufs.alloc_ns", KeyType::Integer, "600", "page allocation cost"},
      {"gpufs.dealloc_ns", KeyType::Integer, "600", "page deallocation cost"},
      {"gpufs.remap_ns", KeyType::Integer, "300", "in-place remap cost"},
      {"gpufs.global_contention_ns", KeyType::Integer, "400", "penalty per global-structure operation"},
      {"gpufs.copy_ns_per_byte", KeyType::Real, "0.05", "device memory copy cost"},

      {"workload.kind", KeyType::Text, "sequential", "sequential | random | table1 | trace"},
      {"workload.n_tb", KeyType::Integer, "120", "threadblocks"},
      {"workload.file_size", KeyType::Integer, "10G", "file size (sequential, random)"},
      {"workload.total_read", KeyType::Integer, "960M", "bytes read (sequential)"},
      {"workload.request_size", KeyType::Integer, "0", "gread size; 0 = page + prefetch size"},
      {"workload.n_requests", KeyType::Integer, "0", "reads (random)"},
      {"workload.benchmark", KeyType::Text, "HOTSPOT", "benchmark name (table1)"},
      {"workload.scale", KeyType::Real, "1.0", "size scale factor (table1)"},
      {"workload.trace_file", KeyType::Text, "", "trace path (trace, replay)"},
      {"workload.read_only", KeyType::Flag, "1", "files opened read-only (enables prefetch)"},
      {"workload.compute_ns_per_byte", KeyType::Real, "0", "compute delay per byte read"},

      {"mode.pcie_disabled", KeyType::Flag, "0", "skip GPU data transfers"},
      {"mode.gpu_cache_disabled", KeyType::Flag, "0", "skip GPU page cache handling"},
      {"mode.ramfs", KeyType::Flag, "0", "zero-latency infinite-bandwidth storage"},
      {"mode.replay", KeyType::Flag, "0", "replay workload.trace_file on the host only"},
  };
  return keys;
}

namespace {

const KeySpec* find_key(std::string_view key) {
  const auto& keys = config_keys();
  auto it = std::find_if(keys.begin(), keys.end(), [key](const KeySpec& k) { return k.key == key; });
  return it == keys.end() ? nullptr : &*it;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view text) {
  std::string s(trim(text));
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw ConfigError("not a number: '" + s + "'");
  return v;
}

bool parse_flag(std::string_view text) {
  const auto s = trim(text);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigError("not a boolean: '" + std::string(s) + "'");
}

}  // namespace

std::uint64_t parse_size(std::string_view text) {
  auto s = trim(text);
  if (s.empty()) throw ConfigError("empty size value");
  std::uint64_t mult = 1;
  switch (std::toupper(static_cast<unsigned char>(s.back()))) {
    case 'K': mult = 1ULL << 10; break;
    case 'M': mult = 1ULL << 20; break;
    case 'G': mult = 1ULL << 30; break;
    case 'T': mult = 1ULL << 40; break;
    default: break;
  }
  if (mult != 1) s.remove_suffix(1);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("not a non-negative integer: '" + std::string(text) + "'");
  }
  if (v > UINT64_MAX / mult) throw ConfigError("size overflows: '" + std::string(text) + "'");
  return v * mult;
}

Config::Config() {
  for (const KeySpec& k : config_keys()) values_.emplace(std::string(k.key), std::string(k.default_value));
}

bool Config::known(std::string_view key) { return find_key(key) != nullptr; }

KeyType Config::type_of(std::string_view key) {
  const KeySpec* k = find_key(key);
  if (k == nullptr) throw ConfigError("unknown config key: " + std::string(key));
  return k->type;
}

void Config::set(std::string_view key, std::string_view value) {
  const KeySpec* k = find_key(trim(key));
  if (k == nullptr) throw ConfigError("unknown config key: " + std::string(trim(key)));
  const auto v = trim(value);
  try {
    switch (k->type) {
      case KeyType::Integer: (void)parse_size(v); break;
      case KeyType::Real: (void)parse_real(v); break;
      case KeyType::Flag: (void)parse_flag(v); break;
      case KeyType::Text: break;
    }
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(k->key) + ": " + e.what());
  }
  values_[std::string(k->key)] = std::string(v);
}

void Config::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void Config::load(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    try {
      set_assignment(line);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  load(in);
}

const std::string& Config::raw(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key: " + std::string(key));
  return it->second;
}

std::uint64_t Config::u64(std::string_view key) const { return parse_size(raw(key)); }
double Config::real(std::string_view key) const { return parse_real(raw(key)); }
const std::string& Config::text(std::string_view key) const { return raw(key); }
bool Config::flag(std::string_view key) const { return parse_flag(raw(key)); }

std::string Config::dump() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << '=' << v << '\n';
  return out.str();
}

}  // namespace gfsim
