#include <set>

#include "doctest.h"
#include "scatterid/rng.hpp"

using namespace scatterid;

TEST_CASE("derived streams are deterministic and distinct") {
  CHECK(derive_seed(7, StreamPurpose::kTree, {3}) == derive_seed(7, StreamPurpose::kTree, {3}));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 4; ++m)
    for (auto p : {StreamPurpose::kTrajectory, StreamPurpose::kTrace, StreamPurpose::kTree})
      for (std::uint64_t i = 0; i < 16; ++i) seen.insert(derive_seed(m, p, {i}));
  CHECK(seen.size() == 4 * 3 * 16);
  CHECK(derive_seed(1, StreamPurpose::kTrace, {1, 2}) !=
        derive_seed(1, StreamPurpose::kTrace, {2, 1}));

  auto a = make_stream(11, StreamPurpose::kRun, {5});
  auto b = make_stream(11, StreamPurpose::kRun, {5});
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
}
