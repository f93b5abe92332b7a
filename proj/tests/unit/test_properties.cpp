#include "support/properties.hpp"

#include <doctest.h>

TEST_SUITE("properties") {

TEST_CASE("semigroup algebra, 1000 cases") {
  for (const auto& o : kmsf::testing::semigroup_algebra_suite(20261016, 1000)) {
    CAPTURE(o.name);
    for (const auto& e : o.examples) MESSAGE(e);
    CHECK(o.cases >= 200);
    CHECK(o.failures == 0);
  }
}

}  // TEST_SUITE
