#include "gfsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace gfsim {

void check_conservation(const MetricsReport& m) {
  if (m.gpu_cache_hit_bytes > m.delivered_bytes) {
    throw ConservationError("cache-hit bytes exceed delivered bytes");
  }
  if (m.pcie_bytes < m.delivered_bytes - m.gpu_cache_hit_bytes) {
    throw ConservationError("pcie bytes (" + std::to_string(m.pcie_bytes) + ") below bytes delivered from the host (" +
                            std::to_string(m.delivered_bytes - m.gpu_cache_hit_bytes) + ")");
  }
  if (m.ssd_bytes < m.touched_bytes) {
    throw ConservationError("ssd bytes (" + std::to_string(m.ssd_bytes) + ") below touched file bytes (" +
                            std::to_string(m.touched_bytes) + ")");
  }
  if (m.tag_mismatches != 0) {
    throw ConservationError(std::to_string(m.tag_mismatches) + " delivered pages carry a foreign content tag");
  }
}

const std::vector<std::string>& scalar_columns() {
  static const std::vector<std::string> cols = {
      "end_to_end_ns",  "delivered_bytes",  "io_bandwidth_bytes_per_s", "rpc_count",       "gpu_cache_hits",
      "gpu_cache_misses", "gpu_cache_hit_bytes", "private_hits",        "ssd_bytes",       "ssd_requests",
      "touched_bytes",  "pcie_bytes",       "pcie_transfers",           "pread_bytes",     "prefetch_waste_bytes",
      "redundant_bytes", "evictions",       "remaps",                   "page_ops",        "host_blocked_ns",
      "blocking_preads", "tag_mismatches",  "events",                   "ra_windows",      "ra_window_max_bytes",
  };
  return cols;
}

std::vector<double> scalar_values(const MetricsReport& m) {
  std::uint64_t ra_max = 0;
  for (auto w : m.ra_window_history) ra_max = std::max(ra_max, w);
  auto d = [](auto v) { return static_cast<double>(v); };
  return {d(m.end_to_end_ns),       d(m.delivered_bytes),   m.io_bandwidth_bytes_per_s,
          d(m.rpc_count),           d(m.gpu_cache_hits),    d(m.gpu_cache_misses),
          d(m.gpu_cache_hit_bytes), d(m.private_hits),      d(m.ssd_bytes),
          d(m.ssd_requests),        d(m.touched_bytes),     d(m.pcie_bytes),
          d(m.pcie_transfers),      d(m.pread_bytes),       d(m.prefetch_waste_bytes),
          d(m.redundant_bytes),     d(m.evictions),         d(m.remaps),
          d(m.page_ops),            d(m.host_blocked_ns),   d(m.blocking_preads),
          d(m.tag_mismatches),      d(m.events),            d(m.ra_window_history.size()),
          d(ra_max)};
}

namespace {

template <typename T>
void accumulate(std::vector<double>& acc, const std::vector<T>& v) {
  if (acc.size() < v.size()) acc.resize(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) acc[i] += static_cast<double>(v[i]);
}

void divide(std::vector<double>& v, double n) {
  for (double& x : v) x /= n;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ';';
    out += format_number(v[i]);
  }
  return out;
}

}  // namespace

MeanReport mean_of(const std::vector<MetricsReport>& runs) {
  MeanReport mean;
  mean.runs = runs.size();
  mean.scalars.assign(scalar_columns().size(), 0.0);
  if (runs.empty()) return mean;
  for (const auto& r : runs) {
    accumulate(mean.scalars, scalar_values(r));
    accumulate(mean.worker_spins, r.worker_spins);
    accumulate(mean.worker_first_service_spins, r.worker_first_service_spins);
    accumulate(mean.worker_first_service_ns, r.worker_first_service_ns);
  }
  const auto n = static_cast<double>(runs.size());
  divide(mean.scalars, n);
  divide(mean.worker_spins, n);
  divide(mean.worker_first_service_spins, n);
  divide(mean.worker_first_service_ns, n);
  return mean;
}

std::string format_number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_header(const std::vector<std::string>& leading) {
  std::ostringstream out;
  for (const auto& c : leading) out << c << ',';
  for (const auto& c : scalar_columns()) out << c << ',';
  out << "worker_spins,worker_first_service_spins,worker_first_service_ns";
  return out.str();
}

std::string csv_row(const std::vector<std::string>& leading, const MeanReport& m) {
  std::ostringstream out;
  for (const auto& c : leading) out << c << ',';
  for (double v : m.scalars) out << format_number(v) << ',';
  out << join(m.worker_spins) << ',' << join(m.worker_first_service_spins) << ','
      << join(m.worker_first_service_ns);
  return out.str();
}

}  // namespace gfsim
