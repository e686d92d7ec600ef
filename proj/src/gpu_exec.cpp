#include "gfsim/gpu_exec.hpp"

#include <algorithm>
#include <stdexcept>

namespace gfsim::gpu {

std::string_view to_string(DispatchPolicy p) {
  switch (p) {
    case DispatchPolicy::InOrder: return "in-order";
    case DispatchPolicy::Shuffled: return "shuffled";
    case DispatchPolicy::RoundRobin: return "round-robin";
    case DispatchPolicy::Reverse: return "reverse";
  }
  return "?";
}

std::optional<DispatchPolicy> parse_dispatch_policy(std::string_view s) {
  if (s == "in-order") return DispatchPolicy::InOrder;
  if (s == "shuffled") return DispatchPolicy::Shuffled;
  if (s == "round-robin") return DispatchPolicy::RoundRobin;
  if (s == "reverse") return DispatchPolicy::Reverse;
  return std::nullopt;
}

std::uint32_t resident_limit(const GpuConfig& cfg) {
  if (cfg.threads_per_tb == 0) throw std::invalid_argument("gpu.threads_per_tb must be positive");
  if (cfg.threads_per_tb > cfg.max_threads_per_sm) {
    throw std::invalid_argument("gpu.threads_per_tb exceeds gpu.max_threads_per_sm");
  }
  return cfg.sm_count * (cfg.max_threads_per_sm / cfg.threads_per_tb);
}

DispatchPlan dispatch(std::uint32_t n_tb, const GpuConfig& cfg, simcore::SeededRng& rng) {
  DispatchPlan plan;
  plan.order.resize(n_tb);
  for (TbId i = 0; i < n_tb; ++i) plan.order[i] = i;
  switch (cfg.policy) {
    case DispatchPolicy::InOrder:
      break;
    case DispatchPolicy::Shuffled: {
      const auto perm = simcore::shuffled_order(n_tb, rng);
      for (std::size_t i = 0; i < n_tb; ++i) plan.order[i] = static_cast<TbId>(perm[i]);
      break;
    }
    case DispatchPolicy::RoundRobin: {
      // Ids dealt across SMs: SM k holds k, k + sm_count, ...
      const std::uint32_t sms = std::max<std::uint32_t>(1, cfg.sm_count);
      std::stable_sort(plan.order.begin(), plan.order.end(),
                       [sms](TbId a, TbId b) { return a % sms < b % sms; });
      break;
    }
    case DispatchPolicy::Reverse:
      std::reverse(plan.order.begin(), plan.order.end());
      break;
  }
  plan.initial = std::min(n_tb, resident_limit(cfg));
  plan.start_at.resize(plan.initial);
  for (auto& t : plan.start_at) t = cfg.start_jitter_ns > 0 ? rng.below(cfg.start_jitter_ns + 1) : 0;
  return plan;
}

}  // namespace gfsim::gpu
