#include "gfsim/devices.hpp"

#include <algorithm>
#include <cmath>

namespace gfsim::devices {

Time transfer_ns(std::uint64_t bytes, double bytes_per_s) {
  if (bytes == 0 || bytes_per_s <= 0.0) return 0;
  const long double ns = static_cast<long double>(bytes) * 1e9L / static_cast<long double>(bytes_per_s);
  return std::max<Time>(1, static_cast<Time>(std::ceil(ns)));
}

SsdModel::SsdModel(SsdConfig cfg) : cfg_(cfg), slot_free_at_(std::max<std::uint32_t>(1, cfg.max_inflight), 0) {}

Time SsdModel::submit(std::uint64_t bytes, Time at) {
  GFSIM_CHECK(bytes > 0, "ssd_submit with zero bytes");
  GFSIM_CHECK(at >= last_submit_, "ssd submissions out of order");
  last_submit_ = at;

  auto slot = std::min_element(slot_free_at_.begin(), slot_free_at_.end());
  const Time start = std::max(at, *slot);
  const Time data_start = std::max(start + cfg_.base_latency_ns, channel_busy_until_);
  const Time done = data_start + transfer_ns(bytes, cfg_.bandwidth_bytes_per_s);
  channel_busy_until_ = done;
  *slot = done;

  bytes_ += bytes;
  ++requests_;
  return done;
}

std::uint32_t SsdModel::inflight_at(Time t) const {
  return static_cast<std::uint32_t>(
      std::count_if(slot_free_at_.begin(), slot_free_at_.end(), [t](Time free_at) { return free_at > t; }));
}

Time PcieModel::transfer(std::uint64_t bytes, Time at) {
  GFSIM_CHECK(bytes > 0, "pcie_transfer with zero bytes");
  const Time start = std::max(at, busy_until_);
  busy_until_ = start + cfg_.latency_ns + transfer_ns(bytes, cfg_.bandwidth_bytes_per_s);
  bytes_ += bytes;
  ++transfers_;
  return busy_until_;
}

double PcieModel::effective_bandwidth(std::uint64_t bytes) const {
  const double secs = (static_cast<double>(cfg_.latency_ns) +
                       static_cast<double>(bytes) * 1e9 / cfg_.bandwidth_bytes_per_s) /
                      1e9;
  return static_cast<double>(bytes) / secs;
}

}  // namespace gfsim::devices
