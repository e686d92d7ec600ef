#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gfsim/config.hpp"
#include "gfsim/metrics.hpp"
#include "gfsim/system.hpp"
#include "gfsim/workloads.hpp"

namespace gfsim::experiments {

/// Translates a validated key=value config into module configs. Throws
/// ConfigError on values that parse but are out of range.
SimConfig sim_config(const Config& c);

/// Builds the workload selected by workload.kind. Random workloads draw
/// their offsets from `seed`.
workloads::WorkloadSpec build_workload(const Config& c, std::uint64_t seed);

/// File table used for trace workloads and replay: every file id referenced
/// by the trace gets workload.file_size bytes.
std::vector<workloads::FileSpec> trace_files(const Config& c, const workloads::Trace& trace);

struct RunSet {
  std::vector<MetricsReport> runs;  // ordered by seed
  MeanReport mean;
};

/// sim.repetitions runs with seeds sim.seed, sim.seed + 1, ...; each from a
/// cold host cache.
RunSet run(const Config& c);

/// Per-run rows (leading column "seed") followed by a "mean" row.
std::string run_csv(const RunSet& rs);

/// One run-set per value of `param`. Columns: param, value, mean metrics.
std::string sweep_csv(const Config& base, const std::string& param, const std::vector<std::string>& values);

/// Splits "a,b,c" into its items.
std::vector<std::string> split_list(std::string_view list);

enum class PointKind : std::uint8_t {
  Simulate,        // full stack
  ReplayRecorded,  // record the GPU run's request stream, replay it on the host
  CpuStreams,      // one sequential stream per host worker over the same bytes
};

struct PresetPoint {
  std::string series;
  std::string x_key;
  std::string x_value;
  Config config;
  PointKind kind = PointKind::Simulate;
};

struct Preset {
  std::string name;
  std::vector<PresetPoint> points;
};

const std::vector<std::string>& preset_names();

/// Named experiment configurations. Sizes (reads, files, caches) are
/// multiplied by `scale`; `base` supplies every other key.
Preset make_preset(std::string_view name, double scale, const Config& base = Config());

RunSet run_point(const PresetPoint& p);

/// Columns: preset, series, x_key, x_value, mean metrics.
std::string preset_csv(const Preset& p);

}  // namespace gfsim::experiments
