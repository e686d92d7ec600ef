#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <random>
#include <vector>

namespace gfsim::simcore {

/// Simulated time in integer nanoseconds.
using Time = std::uint64_t;

enum class EventKind : std::uint8_t {
  Generic,
  RequestIssued,
  SsdComplete,
  PcieComplete,
  WorkerPoll,
  TbStep,
  TbResume,
  PreadComplete,
};

struct Event {
  Time fire_at = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Generic;
  std::function<void()> action;
};

/// Prints a diagnostic and aborts. Used for simulator logic errors that must
/// never be recovered from (scheduling in the past, broken invariants).
[[noreturn]] void fatal(const char* what);

#define GFSIM_CHECK(cond, msg)              \
  do {                                      \
    if (!(cond)) ::gfsim::simcore::fatal(msg); \
  } while (0)

/// Global event queue plus the virtual clock. Events with equal fire_at are
/// delivered in insertion order.
class EventQueue {
 public:
  Time now() const { return now_; }

  /// Enqueues `action` at absolute time `at`. Aborts if `at < now()`.
  std::uint64_t schedule(Time at, EventKind kind, std::function<void()> action);

  std::uint64_t schedule_in(Time delay, EventKind kind, std::function<void()> action) {
    return schedule(now_ + delay, kind, std::move(action));
  }

  /// Pops the minimum (fire_at, seq) event and moves the clock to it.
  /// Returns nullopt once the queue is drained.
  std::optional<Event> advance();

  /// Runs every event until the queue drains. Returns the number fired.
  std::uint64_t run();

  bool empty() const { return heap_.empty(); }
  std::size_t pending() const { return heap_.size(); }
  std::uint64_t scheduled_count() const { return next_seq_; }
  std::uint64_t fired_count() const { return fired_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.seq > b.seq;
    }
  };

  Time now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t fired_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
};

/// Reproducible random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard, and all derived draws below are
/// computed here rather than through the implementation-defined std
/// distributions, so a seed yields the same draws on every platform.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Fisher-Yates permutation of [0, n).
std::vector<std::size_t> shuffled_order(std::size_t n, SeededRng& rng);

}  // namespace gfsim::simcore
