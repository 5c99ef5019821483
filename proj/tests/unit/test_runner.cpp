#include <gtest/gtest.h>

#include <algorithm>

#include "folioid/errors.hpp"
#include "folioid/runner.hpp"

using namespace folioid;

namespace {

Json basegp_config(int samples = 20) {
  Json j = Json::parse(R"({"family": "pair", "params": {"m": 2, "d_basis": [[1, 0]]}})");
  j["numeric"] = {{"samples", samples}};
  return j;
}

Json with(Json j, const Json& patch) {
  j.merge_patch(patch);
  return j;
}

bool has(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

TEST(Config, DefaultsAndDefaultPipeline) {
  const auto cfg = parse_config(basegp_config());
  EXPECT_EQ(cfg.family, "pair");
  EXPECT_EQ(cfg.numeric.samples, 20);
  EXPECT_DOUBLE_EQ(cfg.numeric.tol_rank, 1e-8);
  EXPECT_TRUE(has(cfg.pipeline, "check_condition6"));
  EXPECT_FALSE(has(cfg.pipeline, "pushforward_dirac"));
}

TEST(Config, ValidationErrors) {
  const Json base = basegp_config();
  EXPECT_THROW(parse_config(with(base, {{"numeric", {{"tol_rank", -1}}}})), ConfigError);
  EXPECT_THROW(parse_config(with(base, {{"numeric", {{"samples", 0}}}})), ConfigError);
  EXPECT_THROW(parse_config(with(base, {{"numeric", {{"seed", -3}}}})), ConfigError);
  EXPECT_THROW(parse_config(with(base, {{"numeric", {{"tol_bogus", 1}}}})), ConfigError);
  EXPECT_THROW(parse_config(with(base, {{"extra", 1}})), ConfigError);
  EXPECT_THROW(parse_config(with(base, {{"family", "bogus"}})), ConfigError);
  EXPECT_THROW(parse_config(with(base, {{"pipeline", {"pushforward_dirac"}}})), ConfigError);
  EXPECT_THROW(parse_config(with(base, {{"pipeline", Json::array()}})), ConfigError);
}

TEST(Config, FamilyParametersAreCheckedWhenBuilding) {
  const Json base = basegp_config();
  auto run_with = [&](const Json& patch) { return run_scenario(parse_config(with(base, patch))); };
  EXPECT_THROW(run_with({{"params", {{"d_basis", {{1, 0, 0}}}}}}), ConfigError);
  EXPECT_THROW(run_with({{"params", {{"d_basis", {{1, 0}, {0, 1}}}}}}), ConfigError);
  EXPECT_THROW(run_with({{"params", {{"m", 0}}}}), ConfigError);
  EXPECT_THROW(run_with({{"params", {{"periodic", true}}}}), ConfigError);
  const Json sym = Json::parse(
      R"({"family": "presymplectic_pair_dirac", "params": {"omega": [[0, 1], [-1, 0]]}})");
  EXPECT_THROW(run_scenario(parse_config(sym)), ConfigError);
}

TEST(Catalog, ListsAndDescriptions) {
  std::vector<std::string> names;
  for (const auto& c : check_catalog()) names.push_back(c.name);
  EXPECT_TRUE(has(names, "check_condition6"));
  EXPECT_TRUE(has(names, "pushforward_dirac"));
  const auto text = describe_family("vb_trivial");
  EXPECT_NE(text.find(" k "), std::string::npos);
  EXPECT_NE(text.find("W"), std::string::npos);
  EXPECT_NE(text.find("F"), std::string::npos);
  EXPECT_THROW(describe_family("bogus"), ConfigError);
  for (const auto& f : family_names()) EXPECT_FALSE(default_pipeline(f).empty()) << f;
}

TEST(Run, BaseGroupoidPasses) {
  const auto res = run_scenario(parse_config(basegp_config()));
  EXPECT_EQ(res.exit_code, 0) << res.report.dump(2);
  EXPECT_EQ(res.report["schema"], 1);
  EXPECT_EQ(res.report["quotient"]["arrow_label_dim"], 2);
  EXPECT_EQ(res.report["quotient"]["object_label_dim"], 1);
  EXPECT_EQ(res.report["config"]["numeric"]["samples"], 20);
}

TEST(Run, ReportsAreReproducible) {
  const auto cfg = parse_config(basegp_config(10));
  const auto a = run_scenario(cfg).report;
  const auto b = run_scenario(cfg).report;
  EXPECT_EQ(without_wall_times(a).dump(2), without_wall_times(b).dump(2));
  EXPECT_TRUE(a.contains("wall_times"));
}

TEST(Run, FailingCheckGivesExitOne) {
  const Json cfg = Json::parse(R"({"family": "presymplectic_pair_dirac",
      "params": {"omega": [[0, 1, 0], [-1, 0, 0], [0, 0, 0]], "weight_coordinate": 2},
      "numeric": {"samples": 10}, "pipeline": ["check_lagrangian", "check_integrable"]})");
  const auto res = run_scenario(parse_config(cfg));
  EXPECT_EQ(res.exit_code, 1);
  EXPECT_EQ(res.report["summary"]["failed"], Json::array({"check_integrable"}));
  EXPECT_TRUE(res.report["checks"][1].contains("witness"));
}

TEST(Run, RankDriftStopsThePipeline) {
  // With a coarse rank tolerance the weighted form looks degenerate near z = 0.
  const Json cfg = Json::parse(R"({"family": "presymplectic_pair_dirac",
      "params": {"omega": [[0, 1, 0], [-1, 0, 0], [0, 0, 0]], "weight_coordinate": 2},
      "numeric": {"samples": 40, "tol_rank": 0.3},
      "pipeline": ["characteristic_spaces", "check_lagrangian"]})");
  const auto res = run_scenario(parse_config(cfg));
  EXPECT_EQ(res.exit_code, 1);
  EXPECT_EQ(res.report["summary"]["checks_run"], 1);
  EXPECT_EQ(res.report["summary"]["short_circuit"]["check"], "characteristic_spaces");
  EXPECT_EQ(res.report["checks"][0]["witness"]["error"], "RankDrift");
}

TEST(Run, FiniteQuotientComparison) {
  const auto pair4 =
      run_scenario(parse_config(Json::parse(R"({"family": "finite",
          "params": {"instance": "pair4", "expect_isomorphic": true}})")));
  EXPECT_EQ(pair4.exit_code, 0);
  const auto z4 = run_scenario(parse_config(Json::parse(R"({"family": "finite",
      "params": {"instance": "z4_bundle", "expect_isomorphic": true}})")));
  EXPECT_EQ(z4.exit_code, 1);
  EXPECT_EQ(z4.report["checks"].back()["details"]["isomorphic"], false);
}
