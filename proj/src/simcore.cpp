#include "gfsim/simcore.hpp"

#include <cstdio>
#include <cstdlib>
#include <numeric>

namespace gfsim::simcore {

void fatal(const char* what) {
  std::fprintf(stderr, "gfsim: fatal: %s\n", what);
  std::fflush(stderr);
  std::abort();
}

std::uint64_t EventQueue::schedule(Time at, EventKind kind, std::function<void()> action) {
  GFSIM_CHECK(at >= now_, "event scheduled in the past");
  const std::uint64_t seq = next_seq_++;
  heap_.push(Event{at, seq, kind, std::move(action)});
  return seq;
}

std::optional<Event> EventQueue::advance() {
  if (heap_.empty()) return std::nullopt;
  // priority_queue::top is const; the action is moved out through a copy of
  // the handle, which is cheap for std::function.
  Event ev = std::move(const_cast<Event&>(heap_.top()));
  heap_.pop();
  GFSIM_CHECK(ev.fire_at >= now_, "clock moved backwards");
  now_ = ev.fire_at;
  ++fired_;
  return ev;
}

std::uint64_t EventQueue::run() {
  std::uint64_t n = 0;
  while (auto ev = advance()) {
    if (ev->action) ev->action();
    ++n;
  }
  return n;
}

std::uint64_t SeededRng::below(std::uint64_t bound) {
  GFSIM_CHECK(bound > 0, "SeededRng::below with zero bound");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::vector<std::size_t> shuffled_order(std::size_t n, SeededRng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace gfsim::simcore
