#include <string>

#include "doctest.h"
#include "fhc/checks.hpp"

using namespace fhc;

TEST_CASE("the full verification suite passes on the default seed") {
  auto results = run_check_suites(42);
  REQUIRE(results.size() >= 6);
  for (const CheckResult& r : results) {
    INFO(r.name, ": worst=", r.worst, " bound=", r.bound, " ", r.detail);
    CHECK(r.pass);
    CHECK(r.worst <= r.bound);
    std::string line = format_check_line(r);
    CHECK(line.find(r.pass ? "PASS" : "FAIL") == 0);
    CHECK(line.find(r.name) != std::string::npos);
  }
}

TEST_CASE("duality identity holds on fresh random data") {
  CheckResult r = check_duality(16, 8, 2024);
  INFO(r.detail);
  CHECK(r.pass);
  CHECK(r.worst < r.bound);
}
