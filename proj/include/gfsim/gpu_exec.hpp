#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "gfsim/pages.hpp"
#include "gfsim/simcore.hpp"

namespace gfsim::gpu {

using simcore::Time;

enum class DispatchPolicy : std::uint8_t { InOrder, Shuffled, RoundRobin, Reverse };

std::string_view to_string(DispatchPolicy p);
std::optional<DispatchPolicy> parse_dispatch_policy(std::string_view s);

struct GpuConfig {
  std::uint32_t sm_count = 15;
  std::uint32_t max_threads_per_sm = 2048;
  std::uint32_t threads_per_tb = 512;
  Time start_jitter_ns = 1000;
  DispatchPolicy policy = DispatchPolicy::InOrder;
};

/// sm_count * floor(max_threads_per_sm / threads_per_tb)
std::uint32_t resident_limit(const GpuConfig& cfg);

/// Launch order of threadblocks. The first `initial` ids of `order` are
/// resident at t=0 (each at its jittered start time); every completion
/// admits the next id in `order`.
struct DispatchPlan {
  std::vector<TbId> order;
  std::uint32_t initial = 0;
  std::vector<Time> start_at;  // per position in `order`, first `initial` only
};

DispatchPlan dispatch(std::uint32_t n_tb, const GpuConfig& cfg, simcore::SeededRng& rng);

enum class TbPhase : std::uint8_t { Issuing, WaitingRpc, Copying, Computing, Done };

/// Progress of one threadblock through its stride.
struct ThreadBlock {
  TbId id = 0;
  std::uint64_t stride_start = 0;
  std::uint64_t stride_len = 0;
  std::uint64_t cursor = 0;  // bytes of the stride consumed
  TbPhase phase = TbPhase::Issuing;
  std::uint32_t residency_slot = 0;
};

}  // namespace gfsim::gpu
