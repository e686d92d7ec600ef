#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "gfsim/rpc.hpp"

using namespace gfsim;
using namespace gfsim::rpc;

TEST_CASE("threadblock to slot to worker mapping") {
  CHECK(slot_for_threadblock(33, 128) == 33);
  CHECK(slot_for_threadblock(130, 128) == 2);
  RpcQueue q(128, 4);
  CHECK(q.slots_per_worker() == 32);
  CHECK(q.worker_of(slot_for_threadblock(33, 128)) == 1);
  CHECK(q.worker_of(0) == 0);
  CHECK(q.worker_of(127) == 3);
}

TEST_CASE("n_slots not divisible by n_workers is rejected") {
  CHECK_THROWS_AS(RpcQueue(10, 4), std::invalid_argument);
  CHECK_THROWS_AS(RpcQueue(0, 4), std::invalid_argument);
  CHECK_THROWS_AS(RpcQueue(8, 0), std::invalid_argument);
}

TEST_CASE("take scans the worker's range in index order") {
  RpcQueue q(8, 2);
  q.submit(3, {3, 0, 0, 4096, 4096});
  q.submit(1, {1, 0, 4096, 4096, 4096});
  q.submit(5, {5, 0, 8192, 4096, 4096});
  CHECK(q.take(0) == 1u);
  CHECK(q.take(0) == 3u);
  CHECK_FALSE(q.take(0).has_value());
  CHECK(q.take(1) == 5u);
}

TEST_CASE("slot lifecycle counts one transition per state change") {
  RpcQueue q(4, 1);
  q.submit(2, {2, 0, 0, 4096, 4096});
  CHECK(q.slot(2).state == SlotState::Pending);
  q.take(0);
  CHECK(q.slot(2).state == SlotState::InService);
  q.complete(2, split_into_pages(0, 0, 4096, 4096));
  CHECK(q.slot(2).state == SlotState::Ready);
  CHECK(q.collect(2).size() == 1);
  CHECK(q.slot(2).state == SlotState::Empty);
  CHECK(q.transitions() == 4);
}

TEST_CASE("split_into_pages: full span, EOF tail, tags") {
  const auto full = split_into_pages(7, 64 * 1024, 64 * 1024, 4096);
  REQUIRE(full.size() == 16);
  for (std::size_t i = 0; i < full.size(); ++i) {
    CHECK(full[i].key == GpuPageKey{7, 16 + i});
    CHECK(full[i].offset == 64 * 1024 + i * 4096);
    CHECK(full[i].bytes == 4096);
    CHECK(full[i].tag == page_tag(7, full[i].offset));
  }
  const auto tail = split_into_pages(0, 0, 4096 + 100, 4096);
  REQUIRE(tail.size() == 2);
  CHECK(tail[1].bytes == 100);
  CHECK(split_into_pages(0, 0, 0, 4096).empty());
}

TEST_CASE("batch_ready coalesces up to the staging capacity") {
  CHECK(batch_ready({4096, 4096}, 2 << 20) == std::vector<std::uint64_t>{8192});
  CHECK(batch_ready({3 << 20}, 2 << 20) == std::vector<std::uint64_t>{2 << 20, 1 << 20});
  CHECK(batch_ready({}, 4096).empty());
  // Sum of transfers equals the staged bytes for any split.
  for (std::uint64_t cap : {1ULL, 4096ULL, 5000ULL, 1ULL << 21}) {
    std::vector<std::uint64_t> chunks{4096, 100, 65536, 4096, 1};
    std::uint64_t sum = 0;
    for (auto t : batch_ready(chunks, cap)) {
      CHECK(t <= cap);
      sum += t;
    }
    CHECK(sum == 4096 + 100 + 65536 + 4096 + 1);
  }
}

namespace {

struct Rig {
  simcore::EventQueue events;
  devices::SsdModel ssd{devices::SsdConfig{}};
  host::HostOs host{host::HostConfig{}, events, ssd};
  devices::PcieModel pcie{devices::PcieConfig{}};
  RpcQueue queue;
  std::vector<std::uint32_t> ready;
  WorkerPool pool;
  explicit Rig(WorkerConfig cfg)
      : queue(cfg.n_slots, cfg.n_workers),
        pool(cfg, events, host, pcie, queue, [this](std::uint32_t s) { ready.push_back(s); }) {
    host.register_file(0, 1ULL << 30);
  }
};

}  // namespace

TEST_CASE("idle workers spin once per poll interval until the first request") {
  WorkerConfig cfg;
  cfg.n_slots = 8;
  cfg.n_workers = 2;
  Rig rig(cfg);
  bool running = true;
  rig.pool.start([&] { return running; });
  rig.events.schedule(10'500, simcore::EventKind::TbStep, [&] { rig.queue.submit(6, {6, 0, 0, 4096, 4096}); });
  rig.events.schedule(50'000, simcore::EventKind::TbStep, [&] { running = false; });
  rig.events.run();
  const auto& w = rig.pool.workers();
  // Polls at 0, 1000, ..., 10000 find nothing; the poll at 11000 services slot 6.
  CHECK(w[1].spins_before_first_service == 11);
  CHECK(w[1].first_service_at == simcore::Time{11'000});
  CHECK_FALSE(w[0].first_service_at.has_value());
  CHECK(rig.ready == std::vector<std::uint32_t>{6});
  CHECK(rig.pool.pread_bytes() == 4096);
  CHECK(rig.pool.pcie_bytes() == 4096);
  CHECK(rig.pool.pcie_transfers() == 1);
}

TEST_CASE("a worker services one slot at a time and records the trace") {
  WorkerConfig cfg;
  cfg.n_slots = 4;
  cfg.n_workers = 1;
  Rig rig(cfg);
  std::vector<TraceRecord> trace;
  rig.pool.set_recorder(&trace);
  for (std::uint32_t s = 0; s < 4; ++s) rig.queue.submit(s, {s, 0, s * (64ULL << 20), 4096, 4096});
  rig.pool.start([&] { return rig.ready.size() < 4; });
  rig.events.run();
  CHECK(rig.ready == std::vector<std::uint32_t>{0, 1, 2, 3});
  REQUIRE(trace.size() == 4);
  CHECK(trace[2] == TraceRecord{2, 0, 2 * (64ULL << 20), 4096});
  CHECK(rig.pool.workers()[0].services == 4);
}

TEST_CASE("disabled PCIe still counts bytes but adds no time") {
  WorkerConfig on, off;
  off.pcie_disabled = true;
  on.n_slots = off.n_slots = 4;
  on.n_workers = off.n_workers = 1;
  auto finish = [](WorkerConfig cfg) {
    Rig rig(cfg);
    rig.queue.submit(0, {0, 0, 0, 1 << 20, 4096});
    rig.pool.start([&] { return rig.ready.empty(); });
    rig.events.run();
    CHECK(rig.pool.pcie_bytes() == 1 << 20);
    return rig.events.now();
  };
  CHECK(finish(on) - finish(off) == 10'000 + 87'382);
}
