#pragma once

#include <cstdint>
#include <vector>

#include "gfsim/simcore.hpp"

namespace gfsim::devices {

using simcore::Time;

/// ceil(bytes / bytes_per_s) in nanoseconds, never below 1 ns for a
/// nonzero transfer. Infinite bandwidth is expressed as 0.
Time transfer_ns(std::uint64_t bytes, double bytes_per_s);

struct SsdConfig {
  double bandwidth_bytes_per_s = 2.8e9;
  Time base_latency_ns = 80'000;
  std::uint32_t max_inflight = 32;
};

/// Latency-plus-bandwidth SSD. Up to max_inflight requests overlap their
/// access latency; the data phase of every request shares one channel of the
/// configured bandwidth, so aggregate throughput never exceeds it. Admission
/// is FIFO in submission order.
class SsdModel {
 public:
  explicit SsdModel(SsdConfig cfg);

  /// Returns the completion time of a read of `bytes` submitted at `at`.
  /// Submissions must arrive in nondecreasing `at`.
  Time submit(std::uint64_t bytes, Time at);

  std::uint32_t inflight_at(Time t) const;
  const SsdConfig& config() const { return cfg_; }
  std::uint64_t bytes() const { return bytes_; }
  std::uint64_t requests() const { return requests_; }

 private:
  SsdConfig cfg_;
  std::vector<Time> slot_free_at_;
  Time channel_busy_until_ = 0;
  Time last_submit_ = 0;
  std::uint64_t bytes_ = 0;
  std::uint64_t requests_ = 0;
};

struct PcieConfig {
  double bandwidth_bytes_per_s = 12e9;
  Time latency_ns = 10'000;
};

/// Host-to-device link. Transfers are serialized: each one occupies the
/// link for latency + size/bandwidth.
class PcieModel {
 public:
  explicit PcieModel(PcieConfig cfg) : cfg_(cfg) {}

  Time transfer(std::uint64_t bytes, Time at);

  /// bytes / (latency + bytes/bandwidth), in bytes per second.
  double effective_bandwidth(std::uint64_t bytes) const;

  Time busy_until() const { return busy_until_; }
  const PcieConfig& config() const { return cfg_; }
  std::uint64_t bytes() const { return bytes_; }
  std::uint64_t transfers() const { return transfers_; }

 private:
  PcieConfig cfg_;
  Time busy_until_ = 0;
  std::uint64_t bytes_ = 0;
  std::uint64_t transfers_ = 0;
};

}  // namespace gfsim::devices
