// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gfsim/experiments.hpp"
#include "gfsim/host_os.hpp"
#include "gfsim/system.hpp"
#include "oracle.hpp"

using namespace gfsim;
namespace ex = gfsim::experiments;

namespace {

constexpr std::uint64_t KB = 1024;

// Pinned thresholds.
constexpr double kDeskScale = 0.1;
constexpr double kImbalanceRatio = 10.0;     // workers 2,3 vs workers 0,1
constexpr double kPrefetchSpeedup = 2.0;     // prefetch 60KB vs none
constexpr double kPrefetchVsPages = 0.8;     // prefetch 60KB vs 64KB pages
constexpr double kReplacementRatio = 4.0;    // lra+prefetch vs baseline
constexpr double kWindowLawSeconds = 1.0;
const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5};

int failures = 0;
std::vector<MetricsReport> all_runs;  // every simulated run, for the conservation check

std::chrono::steady_clock::time_point started;

void report(int n, bool ok, const std::string& what) {
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::printf("%s criterion %d: %s [%.1f s]\n", ok ? "PASS" : "FAIL", n, what.c_str(), secs);
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Runs one preset point once with the given seed.
MetricsReport run_once(ex::PresetPoint p, std::uint64_t seed) {
  p.config.set("sim.seed", std::to_string(seed));
  p.config.set("sim.repetitions", "1");
  MetricsReport m = ex::run_point(p).runs.at(0);
  all_runs.push_back(m);
  return m;
}

const ex::PresetPoint& point(const ex::Preset& p, const std::string& series, const std::string& x) {
  for (const auto& pt : p.points)
    if (pt.series == series && pt.x_value == x) return pt;
  throw std::runtime_error("preset " + p.name + " has no point " + series + "/" + x);
}

void guarded(int n, const std::function<void()>& body) {
  started = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const std::exception& e) {
    report(n, false, std::string("exception: ") + e.what());
  }
}

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  simcore::EventQueue events;
  devices::SsdModel ssd{devices::SsdConfig{}};
  host::HostOs host(host::HostConfig{}, events, ssd);
  host.register_file(0, 64ULL << 20);
  host.pread(0, 0, 4 * KB, [](const host::PreadResult&) {});
  events.run();
  const bool cold = host.ssd_bytes() == 16 * KB;
  for (std::uint64_t off = 4 * KB; off < 2048 * KB; off += 4 * KB) {
    host.pread(0, off, 4 * KB, [](const host::PreadResult&) {});
    events.run();
  }
  const auto& w = host.window_history();
  bool law = w.size() >= 5;
  const std::vector<std::uint64_t> expect = {16 * KB, 32 * KB, 64 * KB, 128 * KB};
  for (std::size_t i = 0; law && i < w.size(); ++i) law = w[i] == (i < expect.size() ? expect[i] : 128 * KB);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(1, cold && law && secs < kWindowLawSeconds,
         "cold 4KB read fetches " + std::to_string(host.ssd_bytes() == 0 ? 0 : 16) + "KB=16KB: " +
             (cold ? "yes" : "no") + "; windows 16,32,64,128,128..KB over " + std::to_string(w.size()) +
             " windows: " + (law ? "yes" : "no") + fmt("; %.3f s", secs));
}

void criterion2() {
  const auto p = ex::make_preset("fig5", kDeskScale);
  bool ok = true;
  double worst_large = 1e300, worst_gap = 1e300;
  for (std::uint64_t seed : kSeeds) {
    auto ratio = [&](const std::string& x) {
      const auto m = run_once(point(p, "gpufs", x), seed);
      const auto& s = m.worker_first_service_spins;
      const double lo = std::max<double>(1.0, static_cast<double>(std::max(s.at(0), s.at(1))));
      return static_cast<double>(std::min(s.at(2), s.at(3))) / lo;
    };
    const double r64 = ratio(std::to_string(64 * KB));
    double smallest = 1e300;
    for (std::uint64_t r : {128 * KB, 256 * KB, 1024 * KB, 4096 * KB}) smallest = std::min(smallest, ratio(std::to_string(r)));
    ok = ok && smallest >= kImbalanceRatio && r64 < smallest;
    worst_large = std::min(worst_large, smallest);
    worst_gap = std::min(worst_gap, smallest - r64);
  }
  report(2, ok,
         fmt("min first-service spin ratio (w2,w3 vs w0,w1) at >=128KB over 5 seeds = %.1f (>= 10)", worst_large) +
             fmt("; min (ratio>=128KB - ratio64KB) = %.1f (> 0)", worst_gap));
}

void criterion3() {
  const auto p = ex::make_preset("fig8", kDeskScale);
  const double none = run_once(point(p, "prefetcher-4KB-pages", "0"), 1).io_bandwidth_bytes_per_s;
  const double pf = run_once(point(p, "prefetcher-4KB-pages", std::to_string(60 * KB)), 1).io_bandwidth_bytes_per_s;
  const double pages = run_once(point(p, "pages-64KB", "0"), 1).io_bandwidth_bytes_per_s;
  report(3, pf >= kPrefetchSpeedup * none && pf >= kPrefetchVsPages * pages,
         fmt("prefetch60K/none = %.2f (>= 2.0)", pf / none) + fmt("; prefetch60K/pages64K = %.3f (>= 0.8)", pf / pages));
}

void criterion4() {
  const auto p = ex::make_preset("fig2", kDeskScale);
  const std::vector<std::uint64_t> sizes = {4 * KB, 16 * KB, 64 * KB, 256 * KB, 1024 * KB};
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed : {kSeeds[0], kSeeds[1], kSeeds[2]}) {
    std::vector<double> bw;
    for (auto s : sizes) bw.push_back(run_once(point(p, "gpufs", std::to_string(s)), seed).io_bandwidth_bytes_per_s);
    const auto peak = static_cast<std::size_t>(std::max_element(bw.begin(), bw.end()) - bw.begin());
    bool unimodal = peak != 0;
    for (std::size_t i = 1; i <= peak; ++i) unimodal = unimodal && bw[i] > bw[i - 1];
    for (std::size_t i = peak + 1; i < bw.size(); ++i) unimodal = unimodal && bw[i] < bw[i - 1];
    ok = ok && unimodal;
    if (seed == kSeeds[0]) {
      detail = "seed 1 GB/s:";
      for (double b : bw) detail += fmt(" %.3f", b / 1e9);
      detail += "; peak at " + std::to_string(sizes[peak] / KB) + "KB";
    }
  }
  report(4, ok, "unimodal over {4K,16K,64K,256K,1M}, peak not at 4K, seeds 1-3; " + detail);
}

void criterion5() {
  const auto p = ex::make_preset("fig9", kDeskScale);
  const ex::PresetPoint& any = p.points.at(0);
  const bool twice = any.config.u64("workload.total_read") >= 2 * any.config.u64("gpufs.cache_bytes") - 120 * 4096;
  const auto total = any.x_value;
  const double base = run_once(point(p, "baseline-4KB", total), 1).io_bandwidth_bytes_per_s;
  const double pf = run_once(point(p, "prefetch-only", total), 1).io_bandwidth_bytes_per_s;
  const double lra = run_once(point(p, "lra+prefetch", total), 1).io_bandwidth_bytes_per_s;
  report(5, twice && lra > pf && pf > base && lra >= kReplacementRatio * base,
         fmt("GB/s baseline %.3f", base / 1e9) + fmt(" < prefetch-only %.3f", pf / 1e9) +
             fmt(" < lra+prefetch %.3f", lra / 1e9) + fmt("; lra/baseline = %.2f (>= 4)", lra / base));
}

void criterion6() {
  auto p = ex::make_preset("fig8", kDeskScale);
  ex::PresetPoint pt = point(p, "prefetcher-4KB-pages", std::to_string(60 * KB));
  const std::uint64_t n_tb = pt.config.u64("workload.n_tb");
  const std::uint64_t stride = pt.config.u64("workload.total_read") / n_tb;
  const SimConfig sc = ex::sim_config(pt.config);
  const auto w = ex::build_workload(pt.config, 1);
  const RunOutput out = simulate(sc, w);
  all_runs.push_back(out.metrics);
  const std::uint64_t span = 4 * KB + 60 * KB;
  const std::uint64_t want = (stride + span - 1) / span;
  bool ok = out.rpcs_per_tb.size() == n_tb;
  std::uint64_t worst = 0;
  for (std::size_t i = 0; ok && i < n_tb; ++i) {
    ok = out.rpcs_per_tb[i] == want;
    const auto hits = static_cast<std::int64_t>(out.private_hits_per_tb[i]);
    const auto dev = static_cast<std::uint64_t>(std::llabs(hits - static_cast<std::int64_t>(15 * want)));
    worst = std::max(worst, dev);
  }
  // Only the last RPC of a stride can carry fewer than 15 useful pages.
  ok = ok && worst <= 15;
  report(6, ok,
         "per-TB RPCs = ceil(" + std::to_string(stride) + "/65536) = " + std::to_string(want) + " for all " +
             std::to_string(n_tb) + " TBs; max |private hits - 15*RPCs| = " + std::to_string(worst) + " (<= 15)");
}

bool conserved(const MetricsReport& m) {
  return m.pcie_bytes >= m.delivered_bytes - m.gpu_cache_hit_bytes && m.ssd_bytes >= m.touched_bytes &&
         m.tag_mismatches == 0 && m.gpu_cache_hit_bytes <= m.delivered_bytes;
}

DeliverySource to_source(oracle::Source s) {
  switch (s) {
    case oracle::Source::Cache: return DeliverySource::CacheHit;
    case oracle::Source::Buffer: return DeliverySource::PrivateBuffer;
    case oracle::Source::Rpc: return DeliverySource::Rpc;
  }
  return DeliverySource::Rpc;
}

void criterion8() {
  oracle::Instance in;
  in.file_size = 32 * 4096;
  in.cache_pages = 8;
  in.prefetch_pages = 3;
  // TB 0 streams the first half and revisits; TB 1 overlaps it, reads past
  // EOF and issues unaligned and multi-page reads.
  in.programs = {
      {{0, 4096}, {4096, 8192}, {12288, 20480}, {8192, 4096}, {2048, 8192}, {40960, 4096}, {49152, 16384}},
      {{36864, 12288}, {65536, 4096}, {69632, 32768}, {16384, 4096}, {118784, 20480}, {0, 8192}, {100000, 10000}},
  };
  const oracle::Result want = oracle::run(in);

  workloads::WorkloadSpec w;
  w.name = "oracle";
  w.files = {{in.file_size, true}};
  w.n_tb = 2;
  w.programs.resize(2);
  for (std::uint32_t tb = 0; tb < 2; ++tb)
    for (const auto& r : in.programs[tb]) w.programs[tb].push_back({0, r.offset, r.size});

  std::vector<DeliverySource> srcs;
  bool ok = true;
  std::string detail;
  for (auto policy : {gpufs::Policy::GlobalLruDealloc, gpufs::Policy::PerTbLra}) {
    SimConfig c;
    c.gpu.sm_count = 1;
    c.gpu.threads_per_tb = c.gpu.max_threads_per_sm;
    c.cache.capacity_bytes = in.cache_pages * 4096;
    c.cache.policy = policy;
    c.prefetch_bytes = in.prefetch_pages * 4096;
    c.record_deliveries = true;
    c.record_victims = true;
    c.check_every_event = true;
    const RunOutput got = simulate(c, w);
    all_runs.push_back(got.metrics);
    bool same = got.deliveries.size() == want.deliveries.size();
    for (std::size_t i = 0; same && i < got.deliveries.size(); ++i) {
      const auto& g = got.deliveries[i];
      const auto& o = want.deliveries[i];
      same = g.tb == o.tb && g.key == GpuPageKey{0, o.page} && g.bytes == o.bytes && g.source == to_source(o.source);
    }
    std::vector<std::uint64_t> victims;
    for (const auto& v : got.victims) victims.push_back(v.page);
    same = same && got.metrics.rpc_count == want.rpcs && victims == want.victims;
    ok = ok && same;
    detail += std::string(gpufs::to_string(policy)) + (same ? " matches" : " differs") + "; ";
  }
  report(8, ok && want.rpcs > 0 && !want.victims.empty(),
         detail + std::to_string(want.deliveries.size()) + " deliveries, " + std::to_string(want.rpcs) + " RPCs, " +
             std::to_string(want.victims.size()) + " victims");
}

void criterion9() {
  bool ok = true;
  std::string detail;
  Config base;
  base.set("sim.repetitions", "2");
  for (const auto& name : ex::preset_names()) {
    const double scale = name == "fig10" || name == "fig11" ? 0.005 : 0.01;
    const std::string a = ex::preset_csv(ex::make_preset(name, scale, base));
    const std::string b = ex::preset_csv(ex::make_preset(name, scale, base));
    if (a != b || a.empty()) {
      ok = false;
      detail += " " + name + " differs;";
    }
  }
  report(9, ok, "all " + std::to_string(ex::preset_names().size()) + " presets (2 seeds per point) byte-identical across two runs" + detail);
}

void criterion10() {
  // Four threadblocks sharing host worker 0, each streaming its own 4MB
  // region in 4KB reads, against one threadblock reading the same regions
  // one after another.
  constexpr std::uint64_t region = 4096 * KB;
  workloads::Trace interleaved, sequential;
  for (std::uint64_t i = 0; i < region / (4 * KB); ++i)
    for (std::uint32_t s = 0; s < 4; ++s) interleaved.push_back({s, 0, s * region + i * 4 * KB, 4 * KB});
  for (std::uint32_t s = 0; s < 4; ++s)
    for (std::uint64_t i = 0; i < region / (4 * KB); ++i) sequential.push_back({0, 0, s * region + i * 4 * KB, 4 * KB});
  const SimConfig c = ex::sim_config(Config());
  const std::vector<workloads::FileSpec> files = {{4 * region, true}};
  const auto a = replay(c, interleaved, files).metrics;
  const auto b = replay(c, sequential, files).metrics;
  all_runs.push_back(a);
  all_runs.push_back(b);
  report(10, a.host_blocked_ns < b.host_blocked_ns && a.ssd_bytes == b.ssd_bytes,
         fmt("blocked ms: interleaved %.3f", static_cast<double>(a.host_blocked_ns) / 1e6) +
             fmt(" < back-to-back %.3f", static_cast<double>(b.host_blocked_ns) / 1e6));
}

void criterion7() {
  std::size_t bad = 0;
  for (const auto& m : all_runs) bad += conserved(m) ? 0 : 1;
  report(7, bad == 0 && !all_runs.empty(),
         std::to_string(all_runs.size()) + " runs: pcie >= host-delivered bytes, ssd >= touched, 0 tag mismatches; " +
             std::to_string(bad) + " violations");
}

}  // namespace

int main() {
  guarded(1, criterion1);
  guarded(2, criterion2);
  guarded(3, criterion3);
  guarded(4, criterion4);
  guarded(5, criterion5);
  guarded(6, criterion6);
  guarded(8, criterion8);
  guarded(9, criterion9);
  guarded(10, criterion10);
  guarded(7, criterion7);
  return failures == 0 ? 0 : 1;
}
