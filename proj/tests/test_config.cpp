#include <doctest.h>

#include "burstcast/config.hpp"
#include "burstcast/error.hpp"
#include "support.hpp"

using namespace burstcast;
using testsupport::kind_of;

TEST_CASE("parse flat config text") {
  const ConfigMap m = parse_config_text(
      "# comment\n"
      "seed = 7\n"
      "channels = [read, write]   # trailing\n"
      "\n"
      "[synth]\n"
      "duration = 3600\n"
      "bursts = [\"10:3:10:write\", \"20:1:5:read\"]\n"
      "[grid]\n"
      "gbt.max_depth = [2, 4]\n"
      "name = \"a # b\"\n");
  CHECK(m.at("seed") == std::vector<std::string>{"7"});
  CHECK(m.at("channels") == std::vector<std::string>{"read", "write"});
  CHECK(m.at("synth.duration") == std::vector<std::string>{"3600"});
  CHECK(m.at("synth.bursts").size() == 2);
  CHECK(m.at("grid.gbt.max_depth") == std::vector<std::string>{"2", "4"});
  CHECK(m.at("grid.name") == std::vector<std::string>{"a # b"});
  CHECK(parse_config_text("x = []").at("x").empty());
}

TEST_CASE("syntax errors name the line") {
  try {
    parse_config_text("a = 1\nnot an assignment\n");
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidConfig);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK(kind_of([] { parse_config_text("a = [1, 2"); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([] { parse_config_text("a ="); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([] { parse_config_text("[open\n"); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("defaults") {
  const RunConfig rc = build_run_config({});
  CHECK(rc.bin_width == 300);
  CHECK(rc.target_fraction == 0.01);
  CHECK(rc.seed == 42);
  CHECK(rc.feature_sets == std::vector<int>{3});
  REQUIRE(rc.horizons_minutes.size() == 24);
  CHECK(rc.horizons_minutes.front() == 5);
  CHECK(rc.horizons_minutes.back() == 120);
  CHECK(rc.horizon_bins().front() == 1);
  CHECK(rc.horizon_bins().back() == 24);
  REQUIRE(rc.families.size() == 1);
  CHECK(rc.families[0].family == Family::Boosting);
  CHECK(rc.strategies.size() == 6);
  CHECK(rc.jobs == paper_jobs());
  CHECK(rc.synth.periodic.has_value());
  CHECK(rc.resolved_logs_dir() == std::filesystem::path("work") / "synth" / "logs");
}

TEST_CASE("values and overrides") {
  ConfigMap m = parse_config_text(
      "bin_width = 600\nhorizons = [10, 20]\nk.read = 4.5\nk.write = 0.5\nlabel_mode = severity\n"
      "families = [tree, logreg]\ngrid.tree.max_depth = [2, none]\ngrid.logreg.C = [0.1, 1, 10]\n"
      "strategies = [\"A:0.25\"]\njobs = [\"J:100:200\"]\n[synth]\nperiod = 0\nbursts = [\"5:2:8:read\"]\n");
  apply_override(m, "seed=9");
  apply_override(m, "work_dir = /tmp/x");
  const RunConfig rc = build_run_config(m);
  CHECK(rc.bin_width == 600);
  CHECK(rc.horizon_bins() == std::vector<std::int64_t>{1, 2});
  CHECK(rc.k_override.at(Channel::Read) == 4.5);
  CHECK(rc.k_override.at(Channel::Write) == 0.5);
  CHECK(rc.label_mode == "severity");
  CHECK(rc.seed == 9);
  CHECK(rc.work_dir == "/tmp/x");
  CHECK(rc.families[0].expand(false).size() == 2);
  CHECK(rc.families[1].expand(false).size() == 3);
  const auto tree_grid = rc.families[0].expand(true);
  CHECK(std::get<TreeParams>(tree_grid[0].params).max_depth == 2);
  CHECK_FALSE(std::get<TreeParams>(tree_grid[1].params).max_depth.has_value());
  CHECK(tree_grid[0].class_weighted);
  CHECK(std::get<LogisticParams>(rc.families[1].expand(false)[2].params).inverse_penalty == 10.0);
  CHECK(rc.strategies.size() == 1);
  CHECK(rc.strategies[0].alpha == 0.25);
  CHECK(rc.jobs == std::vector<JobProfile>{{"J", 100, 200}});
  CHECK_FALSE(rc.synth.periodic.has_value());
  REQUIRE(rc.synth.bursts.size() == 1);
  CHECK(rc.synth.bursts[0].channel == Channel::Read);
  CHECK(rc.synth.bin_width == 600);
  CHECK(rc.synth.seed == 9);
}

TEST_CASE("grid expansion is a cartesian product") {
  FamilyGrid g;
  g.family = Family::Boosting;
  g.axes["max_depth"] = {"2", "4", "6"};
  g.axes["learning_rate"] = {"0.1", "0.3"};
  const auto cells = g.expand(false);
  CHECK(cells.size() == 6);
  for (const auto& c : cells) CHECK(c.family() == Family::Boosting);
  FamilyGrid empty;
  CHECK(empty.expand(false).size() == 1);
  FamilyGrid bad;
  bad.axes["no_such_param"] = {"1"};
  CHECK(kind_of([&] { bad.expand(false); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("rejected settings") {
  auto build = [](const std::string& text) { return build_run_config(parse_config_text(text)); };
  CHECK(kind_of([&] { build("no_such_key = 1"); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([&] { build("target_fraction = 1.5"); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([&] { build("horizons = [7]"); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([&] { build("label_mode = fuzzy"); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([&] { build("feature_sets = [4]"); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([&] { build("families = [svm]"); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([&] { build("grid.tree.max_depth = [2]"); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([&] { build("channels = [both]"); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([&] { build("seed = x"); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([&] { build("strategies = [\"X:2\"]"); }) == ErrorKind::InvalidAlpha);
  CHECK(kind_of([&] { build("jobs = [\"J:300:100\"]"); }) == ErrorKind::InvalidProfile);
  CHECK(kind_of([&] { build("[synth]\nduration = 3600\nbursts = [\"100:2:8:read\"]"); }) ==
        ErrorKind::InfeasibleSchedule);
  CHECK(kind_of([] { load_run_config("/nonexistent/burstcast.conf"); }) == ErrorKind::MissingArtifact);
}

TEST_CASE("hash covers content settings only") {
  const RunConfig base = build_run_config({});
  CHECK(base.hash().size() == 16);
  CHECK(base.hash() == build_run_config({}).hash());
  ConfigMap m;
  apply_override(m, "work_dir=/elsewhere");
  apply_override(m, "threads=3");
  CHECK(build_run_config(m).hash() == base.hash());
  ConfigMap s;
  apply_override(s, "seed=43");
  CHECK(build_run_config(s).hash() != base.hash());
  ConfigMap p;
  apply_override(p, "synth.ramp=false");
  CHECK(build_run_config(p).hash() != base.hash());
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}
