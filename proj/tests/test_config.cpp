#include <string>

#include "doctest.h"
#include "fhc/config.hpp"

using namespace fhc;

TEST_CASE("flat key-value parsing with comments and blank lines") {
  ParsedConfig pc = parse_config_text(
      "# a comment\n"
      "problem = manufactured-1d\n"
      "\n"
      "s = 0.5  # trailing comment\n"
      "levels=8,16\r\n");
  REQUIRE(pc.find("problem") != nullptr);
  CHECK(*pc.find("problem") == "manufactured-1d");
  CHECK(*pc.find("s") == "0.5");
  CHECK(*pc.find("levels") == "8,16");
  CHECK(pc.line_of("s") == 4);
  CHECK(pc.find("missing") == nullptr);
}

TEST_CASE("malformed and duplicate lines are rejected with positions") {
  try {
    parse_config_text("problem = manufactured-1d\nnonsense line\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 2);
  }
  try {
    parse_config_text("s = 0.5\ns = 0.25\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field == "s");
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
  }
}

TEST_CASE("resolution applies defaults and validates fields") {
  RunConfig rc = run_config_from(parse_config_text("problem = manufactured-1d\n"));
  CHECK(rc.dimension == 1);
  CHECK(rc.study.problem == ProblemKind::manufactured_1d);
  CHECK(rc.study.mu == doctest::Approx(0.1));
  CHECK(rc.study.a == doctest::Approx(-0.5));
  CHECK(rc.study.b == doctest::Approx(0.5));
  CHECK(rc.out_dir == "out");

  RunConfig r2 = run_config_from(parse_config_text(
      "problem = manufactured-2d-I\ns = 0.75\nlevels = 8,16,32\nkappa = 2\n"));
  CHECK(r2.dimension == 2);
  CHECK(r2.study.kappa == doctest::Approx(2.0));
  REQUIRE(r2.study.levels.size() == 3);
  CHECK(r2.study.levels[2] == 32);
}

TEST_CASE("config errors carry field and line") {
  try {
    run_config_from(parse_config_text("study = spatial\n"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field == "problem");
    CHECK(e.line == 0);
    CHECK(std::string(e.what()).find("missing required field") != std::string::npos);
  }
  try {
    run_config_from(parse_config_text("problem = manufactured-1d\ns = 1.5\n"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field == "s");
    CHECK(e.line == 2);
  }
  try {
    run_config_from(parse_config_text("problem = manufactured-1d\nwidget = 3\n"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field == "widget");
    CHECK(std::string(e.what()).find("unknown field") != std::string::npos);
  }
  try {
    run_config_from(parse_config_text("problem = manufactured-1d\ndimension = 2\n"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field == "dimension");
  }
  try {
    run_config_from(parse_config_text("problem = manufactured-1d\nlevels = 16,8\n"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field == "levels");
  }
  try {
    run_config_from(parse_config_text("problem = manufactured-1d\nkappa = 2\n"));
    FAIL("expected ConfigError");  // 1D grading stays at kappa = 1
  } catch (const ConfigError& e) {
    CHECK(e.field == "kappa");
  }
}

TEST_CASE("rendered configuration round-trips to the same resolution") {
  RunConfig rc = run_config_from(parse_config_text(
      "problem = manufactured-1d\ns = 0.25,0.75\nlevels = 8,16\nmu = 0.05\n"
      "opt_tol = 1e-9\nout_dir = /tmp/xyz\nseed = 7\n"));
  std::string rendered = render_config(rc);
  RunConfig back = run_config_from(parse_config_text(rendered));
  CHECK(render_config(back) == rendered);
  CHECK(back.study.mu == doctest::Approx(0.05));
  CHECK(back.study.seed == 7);
  CHECK(back.out_dir == "/tmp/xyz");
  REQUIRE(back.study.s_values.size() == 2);
  CHECK(back.study.s_values[1] == doctest::Approx(0.75));
}

TEST_CASE("manifest embeds version and command and stays parseable") {
  RunConfig rc = run_config_from(parse_config_text("problem = manufactured-1d\n"));
  std::string man = render_manifest(rc, "convergence");
  CHECK(man.find(kVersion) != std::string::npos);
  CHECK(man.find("convergence") != std::string::npos);
  RunConfig back = run_config_from(parse_config_text(man));
  CHECK(render_config(back) == render_config(rc));
}
