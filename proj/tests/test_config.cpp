#include <cstdio>

#include "core/config.hpp"
#include "doctest.h"

using namespace sfuda;

TEST_CASE("config round-trips through serialization") {
  AdaptationConfig config;
  config.data.classes = 4;
  config.data.rotation = 0.3;
  config.model.hidden = {16, 8};
  config.k_neighbors = 7;
  config.weighting_mode = WeightingMode::kLinear;
  config.classification_mode = ClassificationMode::kPositiveNegative;
  config.exclusion_rule = ExclusionRule::kAnyIntersection;
  config.refinement = false;
  config.learning_rate = 0.0123456789012345;
  config.seed = 987654321;

  const AdaptationConfig parsed = parse_config(serialize_config(config));
  CHECK(parsed == config);
  CHECK(serialize_config(parse_config(serialize_config(parsed))) == serialize_config(config));
}

TEST_CASE("unknown keys and sections are rejected by name") {
  CHECK_THROWS_WITH_AS(parse_config("[adapt]\nnot_a_key = 1\n"),
                       "unknown config key: adapt.not_a_key", Error);
  CHECK_THROWS_WITH_AS(parse_config("[nope]\n"), "unknown config section: nope", Error);
  CHECK_THROWS_AS(parse_config("stray = 1\n"), Error);
  CHECK_THROWS_AS(parse_config("[adapt]\nepochs 3\n"), Error);
}

TEST_CASE("values parse with comments and whitespace") {
  const AdaptationConfig c = parse_config(
      "# comment\n"
      "[adapt]\n"
      "  epochs = 12 \n"
      "temperature = 0.5\n"
      "refinement = false\n"
      "[data]\n"
      "classes = 3\n");
  CHECK(c.epochs == 12);
  CHECK(c.temperature == 0.5);
  CHECK(c.refinement == false);
  CHECK(c.data.classes == 3);
}

TEST_CASE("set/get by dotted key") {
  AdaptationConfig c;
  set_config_value(c, "adapt.epochs", "7");
  CHECK(c.epochs == 7);
  CHECK(get_config_value(c, "adapt.epochs") == "7");
  set_config_value(c, "model.hidden", "4,4,4");
  CHECK(c.model.hidden == std::vector<int>{4, 4, 4});
  CHECK_THROWS_AS(set_config_value(c, "adapt.bogus", "1"), Error);
  CHECK_THROWS_AS(set_config_value(c, "epochs", "1"), Error);
  CHECK_THROWS_AS(set_config_value(c, "adapt.epochs", "abc"), Error);
}

TEST_CASE("config file io") {
  AdaptationConfig c;
  c.epochs = 3;
  const std::string path = "config_io_test.conf";
  save_config(c, path);
  const AdaptationConfig loaded = load_config(path);
  CHECK(loaded == c);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_config("does_not_exist.conf"), Error);
}
