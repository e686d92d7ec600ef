#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "gfsim/workloads.hpp"

using namespace gfsim;
using namespace gfsim::workloads;

namespace {
constexpr std::uint64_t KB = 1024, MB = 1024 * KB, GB = 1024 * MB;

// Checks that every TB's reads are contiguous and cover [first, last).
void check_contiguous(const std::vector<ReadOp>& prog) {
  for (std::size_t i = 1; i < prog.size(); ++i) {
    CHECK(prog[i].file == prog[i - 1].file);
    CHECK(prog[i].offset == prog[i - 1].offset + prog[i - 1].size);
  }
}
}  // namespace

TEST_CASE("120 threadblocks over 960MB read 8MB strides") {
  const auto w = gen_sequential_strided(120, 10 * GB, 960 * MB, 4 * KB);
  REQUIRE(w.programs.size() == 120);
  for (std::uint32_t i = 0; i < 120; ++i) {
    const auto& p = w.programs[i];
    REQUIRE(p.size() == 2048);
    CHECK(p.front().offset == i * 8 * MB);
    CHECK(p.back().offset + p.back().size == (i + 1) * 8 * MB);
    check_contiguous(p);
  }
  CHECK(w.bytes_requested() == 960 * MB);
}

TEST_CASE("single threadblock reads the whole range") {
  const auto w = gen_sequential_strided(1, 64 * MB, 64 * MB, 1 * MB);
  REQUIRE(w.programs.size() == 1);
  CHECK(w.programs[0].size() == 64);
  check_contiguous(w.programs[0]);
}

TEST_CASE("non-dividing request size leaves a short last piece") {
  const auto w = gen_sequential_strided(12, 96 * MB, 96 * MB, 3 * MB);
  for (const auto& p : w.programs) {
    CHECK(p.size() == 3);
    CHECK(p.back().size == 2 * MB);
  }
  CHECK(w.bytes_requested() == 96 * MB);
}

TEST_CASE("sequential argument errors") {
  CHECK_THROWS_AS(gen_sequential_strided(0, GB, MB, 4 * KB), std::invalid_argument);
  CHECK_THROWS_AS(gen_sequential_strided(7, GB, 8 * MB, 4 * KB), std::invalid_argument);
  CHECK_THROWS_AS(gen_sequential_strided(1, MB, 2 * MB, 4 * KB), std::invalid_argument);
  CHECK_THROWS_AS(gen_sequential_strided(4, GB, 4 * MB, 2 * MB), std::invalid_argument);
  CHECK_THROWS_AS(gen_sequential_strided(4, GB, 4 * MB, 0), std::invalid_argument);
}

TEST_CASE("random workload: seeded, aligned, in bounds, evenly shared") {
  simcore::SeededRng a(9), b(9), c(10);
  const auto wa = gen_random_uniform(7, 19 * GB, 1000, 4 * KB, a);
  const auto wb = gen_random_uniform(7, 19 * GB, 1000, 4 * KB, b);
  const auto wc = gen_random_uniform(7, 19 * GB, 1000, 4 * KB, c);
  std::size_t total = 0;
  bool differs = false;
  for (std::uint32_t i = 0; i < 7; ++i) {
    CHECK(wa.programs[i].size() >= 142);
    CHECK(wa.programs[i].size() <= 143);
    total += wa.programs[i].size();
    for (std::size_t k = 0; k < wa.programs[i].size(); ++k) {
      const auto& op = wa.programs[i][k];
      CHECK(op.offset % (4 * KB) == 0);
      CHECK(op.offset + op.size <= 19 * GB);
      CHECK(op.offset == wb.programs[i][k].offset);
      differs = differs || op.offset != wc.programs[i][k].offset;
    }
  }
  CHECK(total == 1000);
  CHECK(differs);
  simcore::SeededRng d(1);
  CHECK(gen_random_uniform(4, GB, 0, 4 * KB, d).bytes_requested() == 0);
  CHECK_THROWS_AS(gen_random_uniform(4, 4 * KB, 1, 8 * KB, d), std::invalid_argument);
}

TEST_CASE("benchmark configurations") {
  const auto hot = table1_config("HOTSPOT");
  CHECK(hot.n_tb == 128);
  REQUIRE(hot.files.size() == 2);
  CHECK(hot.files[0].size == GB);
  CHECK(hot.total_read == 2 * GB);
  CHECK(hot.bytes_requested() == 2 * GB);

  const auto lud = table1_config("LUD");
  CHECK(lud.files.size() == 1);
  CHECK(lud.total_read == 256 * MB);

  const auto nw = table1_config("NW");
  CHECK(nw.n_tb == 100);
  CHECK(nw.total_read == 2000 * MB);
  for (const auto& p : nw.programs) CHECK(p.size() > 0);

  CHECK(table1_names().size() == 14);
  CHECK_THROWS_AS(table1_config("QUICKSORT"), std::invalid_argument);
  CHECK_THROWS_AS(table1_config("LUD", 0.0), std::invalid_argument);
}

TEST_CASE("every benchmark covers each file exactly once") {
  for (const auto& name : table1_names()) {
    const auto w = table1_config(name, 0.05);
    std::vector<std::uint64_t> covered(w.files.size(), 0);
    for (const auto& p : w.programs)
      for (const auto& op : p) covered[op.file] += op.size;
    for (std::size_t f = 0; f < w.files.size(); ++f) CHECK(covered[f] == w.files[f].size);
  }
}

TEST_CASE("scale multiplies every file size, rounded down to 4KB") {
  for (const auto& name : table1_names()) {
    const auto full = table1_config(name, 1.0);
    for (double scale : {0.5, 0.1, 0.013}) {
      const auto w = table1_config(name, scale);
      REQUIRE(w.files.size() == full.files.size());
      for (std::size_t f = 0; f < w.files.size(); ++f) {
        const double exact = static_cast<double>(full.files[f].size) * scale;
        CHECK(w.files[f].size % (4 * KB) == 0);
        CHECK(static_cast<double>(w.files[f].size) <= std::max(exact, 4096.0));
        CHECK(static_cast<double>(w.files[f].size) > exact - 4096.0);
      }
    }
  }
}

TEST_CASE("trace round-trip and parse errors") {
  const Trace t = {{0, 0, 0, 4096}, {3, 1, 8192, 65536}, {0, 0, 4096, 4096}};
  std::stringstream ss;
  write_trace(ss, t);
  CHECK(parse_trace(ss) == t);

  std::istringstream with_comments("# header\n\n1 0 0 4096  # trailing\n");
  CHECK(parse_trace(with_comments).size() == 1);

  std::istringstream bad("0 0 0 4096\n0 0 abc 4096\n");
  try {
    parse_trace(bad);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream extra("0 0 0 4096 9\n");
  CHECK_THROWS_AS(parse_trace(extra), std::runtime_error);
  std::istringstream zero("0 0 0 0\n");
  CHECK_THROWS_AS(parse_trace(zero), std::runtime_error);
  CHECK_THROWS_AS(load_trace("/nonexistent/trace.txt"), std::runtime_error);
}

TEST_CASE("trace programs keep per-threadblock order") {
  const Trace t = {{2, 0, 8192, 4096}, {0, 0, 0, 4096}, {2, 0, 0, 4096}};
  const auto w = gen_from_trace(t, {{1 * MB, true}});
  CHECK(w.n_tb == 3);
  CHECK(w.programs[1].empty());
  REQUIRE(w.programs[2].size() == 2);
  CHECK(w.programs[2][0].offset == 8192);
  CHECK(w.programs[2][1].offset == 0);
  CHECK_THROWS_AS(gen_from_trace({{0, 1, 0, 4096}}, {{MB, true}}), std::invalid_argument);
  CHECK_THROWS_AS(gen_from_trace({{0, 0, MB - 100, 4096}}, {{MB, true}}), std::invalid_argument);
}
