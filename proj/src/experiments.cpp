#include "gfsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gfsim::experiments {

namespace {

constexpr std::uint64_t KiB = 1ULL << 10;
constexpr std::uint64_t MiB = 1ULL << 20;
constexpr std::uint64_t GiB = 1ULL << 30;
constexpr std::uint64_t kAlign = 4 * KiB;

std::uint32_t u32(const Config& c, std::string_view key) {
  const std::uint64_t v = c.u64(key);
  if (v > std::numeric_limits<std::uint32_t>::max()) throw ConfigError(std::string(key) + ": value too large");
  return static_cast<std::uint32_t>(v);
}

std::uint32_t positive_u32(const Config& c, std::string_view key) {
  const std::uint32_t v = u32(c, key);
  if (v == 0) throw ConfigError(std::string(key) + ": must be positive");
  return v;
}

double non_negative(const Config& c, std::string_view key) {
  const double v = c.real(key);
  if (v < 0) throw ConfigError(std::string(key) + ": must not be negative");
  return v;
}

std::uint64_t request_size(const Config& c) {
  const std::uint64_t r = c.u64("workload.request_size");
  return r != 0 ? r : c.u64("gpufs.page_size") + c.u64("gpufs.prefetch_bytes");
}

std::uint64_t scaled(std::uint64_t bytes, double scale) {
  const auto v = static_cast<std::uint64_t>(std::floor(static_cast<double>(bytes) * scale));
  return std::max(kAlign, v / kAlign * kAlign);
}

std::string num(std::uint64_t v) { return std::to_string(v); }

workloads::Trace cpu_streams_trace(const Config& c) {
  const rpc::RpcQueue layout(positive_u32(c, "rpc.n_slots"), positive_u32(c, "rpc.n_workers"));
  const std::uint64_t total = c.u64("workload.total_read");
  const std::uint64_t req = request_size(c);
  const std::uint32_t streams = layout.n_workers();
  const std::uint64_t share = total / streams;
  workloads::Trace trace;
  for (std::uint64_t done = 0; done < share; done += req) {
    for (std::uint32_t s = 0; s < streams; ++s) {
      trace.push_back({s * layout.slots_per_worker(), 0, s * share + done, std::min(req, share - done)});
    }
  }
  return trace;
}

}  // namespace

SimConfig sim_config(const Config& c) {
  SimConfig s;
  s.seed = c.u64("sim.seed");
  s.check_every_event = c.flag("sim.check_invariants");

  s.ssd.bandwidth_bytes_per_s = c.real("ssd.bandwidth_bytes_per_s");
  if (!(s.ssd.bandwidth_bytes_per_s > 0)) throw ConfigError("ssd.bandwidth_bytes_per_s: must be positive");
  s.ssd.base_latency_ns = c.u64("ssd.base_latency_ns");
  s.ssd.max_inflight = positive_u32(c, "ssd.max_inflight");
  s.pcie.bandwidth_bytes_per_s = c.real("pcie.bandwidth_bytes_per_s");
  if (!(s.pcie.bandwidth_bytes_per_s > 0)) throw ConfigError("pcie.bandwidth_bytes_per_s: must be positive");
  s.pcie.latency_ns = c.u64("pcie.latency_ns");

  s.host.os_page_size = c.u64("host.os_page_size");
  if (s.host.os_page_size == 0) throw ConfigError("host.os_page_size: must be positive");
  s.host.cache_capacity_bytes = c.u64("host.cache_capacity_bytes");
  s.host.ra_max_bytes = c.u64("host.ra_max_bytes");
  if (s.host.ra_max_bytes < s.host.os_page_size) throw ConfigError("host.ra_max_bytes: smaller than one page");
  s.host.cpu_copy_ns_per_byte = non_negative(c, "host.cpu_copy_ns_per_byte");
  s.host.ramfs = c.flag("mode.ramfs");

  s.rpc.n_slots = positive_u32(c, "rpc.n_slots");
  s.rpc.n_workers = positive_u32(c, "rpc.n_workers");
  if (s.rpc.n_slots % s.rpc.n_workers != 0) throw ConfigError("rpc.n_slots: must be divisible by rpc.n_workers");
  s.rpc.poll_interval_ns = c.u64("rpc.poll_interval_ns");
  if (s.rpc.poll_interval_ns == 0) throw ConfigError("rpc.poll_interval_ns: must be positive");
  s.rpc.staging_bytes = c.u64("rpc.staging_bytes");
  if (s.rpc.staging_bytes == 0) throw ConfigError("rpc.staging_bytes: must be positive");
  s.rpc.pcie_disabled = c.flag("mode.pcie_disabled");

  s.gpu.sm_count = positive_u32(c, "gpu.sm_count");
  s.gpu.max_threads_per_sm = positive_u32(c, "gpu.max_threads_per_sm");
  s.gpu.threads_per_tb = positive_u32(c, "gpu.threads_per_tb");
  if (s.gpu.threads_per_tb > s.gpu.max_threads_per_sm) {
    throw ConfigError("gpu.threads_per_tb: exceeds gpu.max_threads_per_sm");
  }
  s.gpu.start_jitter_ns = c.u64("gpu.start_jitter_ns");
  const auto policy = gpu::parse_dispatch_policy(c.text("gpu.dispatch_policy"));
  if (!policy) throw ConfigError("gpu.dispatch_policy: unknown policy '" + c.text("gpu.dispatch_policy") + "'");
  s.gpu.policy = *policy;

  s.cache.page_size = c.u64("gpufs.page_size");
  if (s.cache.page_size == 0) throw ConfigError("gpufs.page_size: must be positive");
  s.cache.capacity_bytes = c.u64("gpufs.cache_bytes");
  if (s.cache.capacity_bytes < s.cache.page_size) throw ConfigError("gpufs.cache_bytes: smaller than one page");
  const auto cache_policy = gpufs::parse_policy(c.text("gpufs.policy"));
  if (!cache_policy) throw ConfigError("gpufs.policy: unknown policy '" + c.text("gpufs.policy") + "'");
  s.cache.policy = *cache_policy;
  s.cache.costs.lookup_ns = c.u64("gpufs.lookup_ns");
  s.cache.costs.alloc_ns = c.u64("gpufs.alloc_ns");
  s.cache.costs.dealloc_ns = c.u64("gpufs.dealloc_ns");
  s.cache.costs.remap_ns = c.u64("gpufs.remap_ns");
  s.cache.costs.global_contention_ns = c.u64("gpufs.global_contention_ns");
  s.cache.costs.copy_ns_per_byte = non_negative(c, "gpufs.copy_ns_per_byte");
  s.prefetch_bytes = c.u64("gpufs.prefetch_bytes");
  if (s.prefetch_bytes % s.cache.page_size != 0) {
    throw ConfigError("gpufs.prefetch_bytes: must be a multiple of gpufs.page_size");
  }
  s.gpu_cache_disabled = c.flag("mode.gpu_cache_disabled");
  return s;
}

std::vector<workloads::FileSpec> trace_files(const Config& c, const workloads::Trace& trace) {
  FileId max_file = 0;
  for (const auto& r : trace) max_file = std::max(max_file, r.file);
  const std::size_t n = trace.empty() ? 1 : static_cast<std::size_t>(max_file) + 1;
  return std::vector<workloads::FileSpec>(n, {c.u64("workload.file_size"), c.flag("workload.read_only")});
}

workloads::WorkloadSpec build_workload(const Config& c, std::uint64_t seed) {
  const std::string& kind = c.text("workload.kind");
  const std::uint64_t req = request_size(c);
  workloads::WorkloadSpec w;
  try {
    if (kind == "sequential") {
      w = workloads::gen_sequential_strided(positive_u32(c, "workload.n_tb"), c.u64("workload.file_size"),
                                            c.u64("workload.total_read"), req);
    } else if (kind == "random") {
      simcore::SeededRng rng(seed);
      w = workloads::gen_random_uniform(positive_u32(c, "workload.n_tb"), c.u64("workload.file_size"),
                                        c.u64("workload.n_requests"), req, rng);
    } else if (kind == "table1") {
      w = workloads::table1_config(c.text("workload.benchmark"), c.real("workload.scale"), req);
    } else if (kind == "trace") {
      const auto trace = workloads::load_trace(c.text("workload.trace_file"));
      w = workloads::gen_from_trace(trace, trace_files(c, trace));
    } else {
      throw ConfigError("workload.kind: unknown kind '" + kind + "'");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("workload: ") + e.what());
  }
  w.threads_per_tb = positive_u32(c, "gpu.threads_per_tb");
  w.compute_ns_per_byte = non_negative(c, "workload.compute_ns_per_byte");
  w.read_only = c.flag("workload.read_only");
  for (auto& f : w.files) f.read_only = w.read_only;
  return w;
}

RunSet run(const Config& c) {
  const std::uint64_t reps = c.u64("sim.repetitions");
  if (reps == 0) throw ConfigError("sim.repetitions: must be positive");
  SimConfig base = sim_config(c);
  RunSet rs;
  for (std::uint64_t i = 0; i < reps; ++i) {
    SimConfig cfg = base;
    cfg.seed = base.seed + i;
    if (c.flag("mode.replay")) {
      const auto trace = workloads::load_trace(c.text("workload.trace_file"));
      rs.runs.push_back(replay(cfg, trace, trace_files(c, trace)).metrics);
    } else {
      rs.runs.push_back(simulate(cfg, build_workload(c, cfg.seed)).metrics);
    }
  }
  rs.mean = mean_of(rs.runs);
  return rs;
}

std::string run_csv(const RunSet& rs) {
  std::ostringstream out;
  out << csv_header({"seed"}) << '\n';
  for (const auto& r : rs.runs) out << csv_row({std::to_string(r.seed)}, mean_of({r})) << '\n';
  out << csv_row({"mean"}, rs.mean) << '\n';
  return out.str();
}

std::vector<std::string> split_list(std::string_view list) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = std::min(list.find(',', start), list.size());
    std::string item(list.substr(start, comma - start));
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) items.push_back(item);
    start = comma + 1;
  }
  return items;
}

std::string sweep_csv(const Config& base, const std::string& param, const std::vector<std::string>& values) {
  if (!Config::known(param)) throw ConfigError("unknown config key: " + param);
  std::vector<Config> configs;
  for (const auto& v : values) {
    Config c = base;
    c.set(param, v);
    configs.push_back(std::move(c));
  }
  std::ostringstream out;
  out << csv_header({"param", "value"}) << '\n';
  for (std::size_t i = 0; i < configs.size(); ++i) {
    out << csv_row({param, values[i]}, run(configs[i]).mean) << '\n';
  }
  return out.str();
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig2", "fig3",  "fig5",        "fig6", "fig8",
                                                 "fig9", "fig10", "fig10-micro", "fig11", "mosaic"};
  return names;
}

namespace {

/// 120 TBs reading equal strides of a 10GB file; 8MB strides at scale 1.
/// Strides never drop below the largest request of the preset, and the GPU
/// cache always holds the whole read.
void microbenchmark(Config& c, double scale, std::uint64_t largest_request) {
  const std::uint64_t n_tb = 120;
  const std::uint64_t stride = std::max(scaled(8 * MiB, scale), largest_request);
  c.set("workload.kind", "sequential");
  c.set("workload.n_tb", num(n_tb));
  c.set("workload.total_read", num(stride * n_tb));
  c.set("workload.file_size", num(std::max(scaled(10 * GiB, scale), stride * n_tb)));
  c.set("gpufs.cache_bytes", num(std::max(scaled(2 * GiB, scale), stride * n_tb)));
}

enum class Variant { Baseline4K, PrefetchOnly, LraPrefetch, Pages64K };

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Baseline4K: return "baseline-4KB";
    case Variant::PrefetchOnly: return "prefetch-only";
    case Variant::LraPrefetch: return "lra+prefetch";
    case Variant::Pages64K: return "pages-64KB";
  }
  return "?";
}

void apply_variant(Config& c, Variant v) {
  c.set("gpufs.page_size", v == Variant::Pages64K ? "64K" : "4K");
  c.set("gpufs.prefetch_bytes", v == Variant::PrefetchOnly || v == Variant::LraPrefetch ? "60K" : "0");
  c.set("gpufs.policy", v == Variant::LraPrefetch ? "per-tb-lra" : "global-lru-dealloc");
}

const std::vector<std::uint64_t>& request_sizes() {
  static const std::vector<std::uint64_t> v = {4 * KiB,   16 * KiB, 64 * KiB, 128 * KiB,
                                               256 * KiB, 1 * MiB,  4 * MiB};
  return v;
}

const std::vector<std::uint64_t>& page_sizes() {
  static const std::vector<std::uint64_t> v = {4 * KiB, 16 * KiB, 64 * KiB, 256 * KiB, 1 * MiB, 4 * MiB};
  return v;
}

void page_sweep(Preset& p, const Config& base, double scale, const std::string& series, bool ramfs) {
  for (std::uint64_t ps : page_sizes()) {
    Config c = base;
    microbenchmark(c, scale, page_sizes().back());
    c.set("gpufs.page_size", num(ps));
    c.set("gpufs.prefetch_bytes", "0");
    c.set("workload.request_size", num(ps));
    if (ramfs) c.set("mode.ramfs", "1");
    p.points.push_back({series, "gpufs.page_size", num(ps), c, PointKind::Simulate});
  }
}

void benchmark_variants(Preset& p, const Config& base, double scale, bool larger_than_cache) {
  const std::vector<Variant> variants =
      larger_than_cache ? std::vector<Variant>{Variant::Baseline4K, Variant::PrefetchOnly, Variant::LraPrefetch,
                                               Variant::Pages64K}
                        : std::vector<Variant>{Variant::Baseline4K, Variant::PrefetchOnly, Variant::Pages64K};
  for (const auto& name : workloads::table1_names()) {
    const std::uint64_t cache =
        larger_than_cache ? scaled((name == "3DCONV" ? 256 : 500) * MiB, scale) : scaled(2 * GiB, scale);
    if (larger_than_cache && workloads::table1_config(name, scale).total_read <= cache) continue;
    for (Variant v : variants) {
      Config c = base;
      c.set("workload.kind", "table1");
      c.set("workload.benchmark", name);
      c.set("workload.scale", std::to_string(scale));
      c.set("workload.request_size", "64K");
      c.set("gpufs.cache_bytes", num(cache));
      apply_variant(c, v);
      p.points.push_back({variant_name(v), "workload.benchmark", name, c, PointKind::Simulate});
    }
  }
}

}  // namespace

Preset make_preset(std::string_view name, double scale, const Config& base) {
  if (!(scale > 0.0)) throw ConfigError("preset scale must be positive");
  Preset p;
  p.name = std::string(name);
  if (name == "fig2") {
    page_sweep(p, base, scale, "gpufs", false);
  } else if (name == "fig6") {
    page_sweep(p, base, scale, "gpufs-ramfs", true);
  } else if (name == "fig3") {
    for (std::uint64_t r : request_sizes()) {
      Config c = base;
      microbenchmark(c, scale, request_sizes().back());
      c.set("gpufs.page_size", num(r));
      c.set("gpufs.prefetch_bytes", "0");
      c.set("workload.request_size", num(r));
      c.set("mode.pcie_disabled", "1");
      c.set("mode.gpu_cache_disabled", "1");
      p.points.push_back({"gpu", "workload.request_size", num(r), c, PointKind::Simulate});
      p.points.push_back({"cpu", "workload.request_size", num(r), c, PointKind::CpuStreams});
      p.points.push_back({"cpu-gpu-pattern", "workload.request_size", num(r), c, PointKind::ReplayRecorded});
    }
  } else if (name == "fig5") {
    for (std::uint64_t r : request_sizes()) {
      Config c = base;
      microbenchmark(c, scale, request_sizes().back());
      c.set("gpufs.page_size", num(r));
      c.set("gpufs.prefetch_bytes", "0");
      c.set("workload.request_size", num(r));
      p.points.push_back({"gpufs", "workload.request_size", num(r), c, PointKind::Simulate});
    }
  } else if (name == "fig8") {
    for (std::uint64_t f = 0; f < 4 * MiB; f = f == 0 ? 4 * KiB : 2 * f + 4 * KiB) {
      Config c = base;
      microbenchmark(c, scale, 4 * MiB);
      c.set("gpufs.page_size", "4K");
      c.set("gpufs.prefetch_bytes", num(f));
      c.set("workload.request_size", num(4 * KiB + f));
      p.points.push_back({"prefetcher-4KB-pages", "gpufs.prefetch_bytes", num(f), c, PointKind::Simulate});
    }
    Config c = base;
    microbenchmark(c, scale, 4 * MiB);
    apply_variant(c, Variant::Pages64K);
    c.set("workload.request_size", "64K");
    p.points.push_back({"pages-64KB", "gpufs.prefetch_bytes", "0", c, PointKind::Simulate});
  } else if (name == "fig9" || name == "fig10-micro") {
    for (Variant v : {Variant::Baseline4K, Variant::PrefetchOnly, Variant::LraPrefetch, Variant::Pages64K}) {
      Config c = base;
      const std::uint64_t total = scaled(4 * GiB, scale) / (120 * kAlign) * (120 * kAlign);
      c.set("workload.kind", "sequential");
      c.set("workload.n_tb", "120");
      c.set("workload.total_read", num(total));
      c.set("workload.file_size", num(std::max(scaled(10 * GiB, scale), total)));
      c.set("gpufs.cache_bytes", num(scaled(2 * GiB, scale)));
      c.set("workload.request_size", "64K");
      apply_variant(c, v);
      p.points.push_back({variant_name(v), "workload.total_read", num(total), c, PointKind::Simulate});
    }
  } else if (name == "fig10") {
    benchmark_variants(p, base, scale, true);
  } else if (name == "fig11") {
    benchmark_variants(p, base, scale, false);
  } else if (name == "mosaic") {
    for (std::uint64_t ps : {4 * KiB, 64 * KiB}) {
      Config c = base;
      c.set("workload.kind", "random");
      c.set("workload.n_tb", "120");
      c.set("workload.file_size", num(scaled(19 * GiB, scale)));
      c.set("workload.n_requests", num(std::max<std::uint64_t>(120, scaled(960 * MiB, scale) / (4 * KiB))));
      c.set("workload.request_size", "4K");
      c.set("gpufs.cache_bytes", num(scaled(2 * GiB, scale)));
      c.set("gpufs.page_size", num(ps));
      c.set("gpufs.prefetch_bytes", "0");
      p.points.push_back({"random-4KB-reads", "gpufs.page_size", num(ps), c, PointKind::Simulate});
    }
  } else {
    throw ConfigError("unknown preset: " + std::string(name));
  }
  return p;
}

RunSet run_point(const PresetPoint& p) {
  if (p.kind == PointKind::Simulate) return run(p.config);
  const std::uint64_t reps = p.config.u64("sim.repetitions");
  if (reps == 0) throw ConfigError("sim.repetitions: must be positive");
  const SimConfig base = sim_config(p.config);
  RunSet rs;
  for (std::uint64_t i = 0; i < reps; ++i) {
    SimConfig cfg = base;
    cfg.seed = base.seed + i;
    workloads::Trace trace;
    std::vector<workloads::FileSpec> files;
    if (p.kind == PointKind::ReplayRecorded) {
      cfg.record_trace = true;
      const auto w = build_workload(p.config, cfg.seed);
      trace = simulate(cfg, w).trace;
      files = w.files;
    } else {
      trace = cpu_streams_trace(p.config);
      files = trace_files(p.config, trace);
    }
    rs.runs.push_back(replay(cfg, trace, files).metrics);
  }
  rs.mean = mean_of(rs.runs);
  return rs;
}

std::string preset_csv(const Preset& p) {
  std::ostringstream out;
  out << csv_header({"preset", "series", "x_key", "x_value"}) << '\n';
  for (const auto& pt : p.points) {
    out << csv_row({p.name, pt.series, pt.x_key, pt.x_value}, run_point(pt).mean) << '\n';
  }
  return out.str();
}

}  // namespace gfsim::experiments
