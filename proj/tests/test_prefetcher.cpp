#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "gfsim/prefetcher.hpp"
#include "gfsim/rpc.hpp"

using namespace gfsim;
using namespace gfsim::prefetch;

TEST_CASE("request_span") {
  const std::uint64_t big = 1ULL << 30;
  CHECK(request_span(0, 4096, 0, big) == 4096);
  CHECK(request_span(0, 4096, 60 * 1024, big) == 64 * 1024);
  CHECK(request_span(4096 + 17, 4096, 12 * 1024, big) == 16 * 1024);
  // Clipped at EOF.
  CHECK(request_span(big - 4096, 4096, 60 * 1024, big) == 4096);
  CHECK(request_span(big - 8192, 4096, 60 * 1024, big) == 8192);
  CHECK(request_span(0, 65536, 0, 10000) == 10000);
}

TEST_CASE("fill then take hands out each prefetched page once") {
  PrivateBuffer buf(3, 60 * 1024);
  const auto pages = rpc::split_into_pages(0, 4096, 60 * 1024, 4096);
  CHECK(buf.fill(pages) == 0);
  CHECK(buf.size() == 15);
  CHECK(buf.bytes() == 60 * 1024);
  const auto p = buf.take({0, 5});
  REQUIRE(p.has_value());
  CHECK(p->tag == page_tag(0, 5 * 4096));
  CHECK_FALSE(buf.take({0, 5}).has_value());
  CHECK_FALSE(buf.take({0, 0}).has_value());
  CHECK_FALSE(buf.take({1, 6}).has_value());
  CHECK(buf.bytes() == 56 * 1024);
}

TEST_CASE("refill discards unconsumed pages and reports them") {
  PrivateBuffer buf(0, 16 * 1024);
  buf.fill(rpc::split_into_pages(0, 0, 16 * 1024, 4096));
  buf.take({0, 0});
  CHECK(buf.fill(rpc::split_into_pages(0, 1 << 20, 8192, 4096)) == 12 * 1024);
  CHECK_FALSE(buf.take({0, 1}).has_value());
  CHECK(buf.take({0, 256}).has_value());
  CHECK(buf.fill_seq() == 2);
  CHECK(buf.clear() == 4096);
  CHECK(buf.size() == 0);
}

TEST_CASE("EOF fill holds a short last page") {
  PrivateBuffer buf(0, 64 * 1024);
  buf.fill(rpc::split_into_pages(0, 4096, 4096 + 100, 4096));
  const auto last = buf.take({0, 2});
  REQUIRE(last.has_value());
  CHECK(last->bytes == 100);
}

TEST_CASE("owner follows the residency slot") {
  PrivateBuffer buf(1, 4096);
  buf.set_owner(61);
  CHECK(buf.owner() == 61);
  CHECK(buf.capacity() == 4096);
}
