#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gfsim/simcore.hpp"

namespace gfsim {

using simcore::Time;

struct MetricsReport {
  std::uint64_t seed = 0;
  Time end_to_end_ns = 0;
  std::uint64_t delivered_bytes = 0;
  double io_bandwidth_bytes_per_s = 0.0;  // delivered_bytes / end_to_end_ns
  std::uint64_t rpc_count = 0;
  std::uint64_t gpu_cache_hits = 0;
  std::uint64_t gpu_cache_misses = 0;
  std::uint64_t gpu_cache_hit_bytes = 0;
  std::uint64_t private_hits = 0;
  std::uint64_t ssd_bytes = 0;
  std::uint64_t ssd_requests = 0;
  std::uint64_t touched_bytes = 0;
  std::uint64_t pcie_bytes = 0;
  std::uint64_t pcie_transfers = 0;
  std::uint64_t pread_bytes = 0;
  std::uint64_t prefetch_waste_bytes = 0;
  std::uint64_t redundant_bytes = 0;  // PCIe bytes of pages already sent once
  std::uint64_t evictions = 0;
  std::uint64_t remaps = 0;
  std::uint64_t page_ops = 0;
  Time host_blocked_ns = 0;
  std::uint64_t blocking_preads = 0;
  std::uint64_t tag_mismatches = 0;
  std::uint64_t events = 0;
  std::vector<std::uint64_t> worker_spins;
  std::vector<std::uint64_t> worker_first_service_spins;
  std::vector<Time> worker_first_service_ns;
  std::vector<std::uint64_t> ra_window_history;  // bytes, one entry per readahead window
};

struct ConservationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Throws ConservationError when the byte accounting of a run is broken:
/// host-to-device bytes must cover every delivered byte not served by the
/// GPU page cache, the SSD must have read every touched file byte, and no
/// delivered page may carry a foreign content tag.
void check_conservation(const MetricsReport& m);

/// Arithmetic mean over repetitions. Scalars in CSV column order; per-worker
/// lists averaged element-wise.
struct MeanReport {
  std::size_t runs = 0;
  std::vector<double> scalars;
  std::vector<double> worker_spins;
  std::vector<double> worker_first_service_spins;
  std::vector<double> worker_first_service_ns;
};

/// Scalar CSV columns, in output order.
const std::vector<std::string>& scalar_columns();
std::vector<double> scalar_values(const MetricsReport& m);

MeanReport mean_of(const std::vector<MetricsReport>& runs);

/// Header: the leading columns, then scalar_columns(), then
/// worker_spins, worker_first_service_spins, worker_first_service_ns
/// (semicolon-separated per-worker values).
std::string csv_header(const std::vector<std::string>& leading);
std::string csv_row(const std::vector<std::string>& leading, const MeanReport& m);

/// Integers print exactly; other values with 6 decimals.
std::string format_number(double v);

}  // namespace gfsim
