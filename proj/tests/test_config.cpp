#include <doctest.h>

#include "cograph/config.hpp"
#include "cograph/errors.hpp"

using namespace cograph;

TEST_CASE("kv config parses keys, comments, and blanks") {
  auto cfg = KvConfig::parse_string(
      "# a comment\n"
      "alpha = 0.5\n"
      "\n"
      "  epochs=50  \n"
      "name = synth run\n"
      "flag = true\n");
  CHECK(cfg.get_double("alpha", 0.0) == doctest::Approx(0.5));
  CHECK(cfg.get_int("epochs", 0) == 50);
  CHECK(cfg.get_string("name", "") == "synth run");
  CHECK(cfg.get_bool("flag", false));
  CHECK(cfg.get_int("absent", 7) == 7);
  CHECK_FALSE(cfg.has("absent"));
}

TEST_CASE("later assignments win") {
  auto cfg = KvConfig::parse_string("k = 1\nk = 2\n");
  CHECK(cfg.get_int("k", 0) == 2);
  cfg.set("k", "3");
  CHECK(cfg.get_int("k", 0) == 3);
}

TEST_CASE("malformed input raises config errors") {
  CHECK_THROWS_AS(KvConfig::parse_string("no equals sign\n"),
                  const ConfigError&);
  CHECK_THROWS_AS(KvConfig::parse_string("= value\n"), const ConfigError&);
  auto cfg = KvConfig::parse_string("n = twelve\nx = 1.5\n");
  CHECK_THROWS_AS(cfg.get_int("n", 0), const ConfigError&);
  CHECK_THROWS_AS(cfg.get_bool("x", false), const ConfigError&);
  CHECK_THROWS_AS(cfg.require_string("missing"), const ConfigError&);
  CHECK_THROWS_AS(cfg.require_int("missing"), const ConfigError&);
  CHECK(cfg.get_double("x", 0.0) == doctest::Approx(1.5));
}

TEST_CASE("render emits sorted canonical text") {
  auto cfg = KvConfig::parse_string("zeta = 1\nalpha = 2\n");
  CHECK(cfg.render() == "alpha = 2\nzeta = 1\n");
  auto reparsed = KvConfig::parse_string(cfg.render());
  CHECK(reparsed.render() == cfg.render());
}
