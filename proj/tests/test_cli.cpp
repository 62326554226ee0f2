#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "groupoid/commands.hpp"
#include "groupoid/groupoid.hpp"

using namespace groupoid;
namespace fx = groupoid::fixtures;
using cli::RunConfig;
using io::json;

namespace {

std::string data(const std::string& name) { return std::string(GROUPOID_TEST_DATA) + "/" + name; }

std::string temp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("groupoid_cli_" + name)).string();
}

RunConfig gauge(const std::string& command, std::size_t n, const std::string& group) {
  RunConfig c;
  c.command = command;
  c.base = n;
  c.group = group;
  return c;
}

RunConfig file(const std::string& command, const std::string& path) {
  RunConfig c;
  c.command = command;
  c.in = path;
  return c;
}

const json& find_check(const json& report, const std::string& name) {
  for (const auto& c : report["checks"])
    if (c["name"] == name) return c;
  static const json none;
  return none;
}

void expect_all_pass(const cli::RunResult& r) {
  EXPECT_EQ(r.exit_code, cli::kPass) << r.report.dump(2);
  ASSERT_FALSE(r.report["checks"].empty());
  for (const auto& c : r.report["checks"]) EXPECT_EQ(c["status"], "pass") << c.dump();
}

}  // namespace

TEST(Cli, EveryCommandPassesOnTheS3Gauge) {
  for (const std::string& name : cli::command_names()) {
    RunConfig c = gauge(name, 3, "S3");
    c.section = "random";
    c.seed = 5;
    c.trials = 5;
    c.levels = 2;
    c.poincare = name == "convolve";
    const auto r = cli::run(c);
    if (name == "convolve") {
      EXPECT_EQ(r.exit_code, cli::kPass);
      EXPECT_TRUE(r.report.contains("product"));
      EXPECT_EQ(find_check(r.report, "explicit_formula")["status"], "pass");
    } else {
      expect_all_pass(r);
    }
    EXPECT_EQ(r.report["command"], name);
    EXPECT_EQ(r.report["instance"]["kind"], "gauge");
    EXPECT_TRUE(r.report.contains("timing"));
  }
}

TEST(Cli, ReportShape) {
  const auto r = cli::run(gauge("verify-theorem1", 2, "Z2"));
  std::vector<std::string> keys;
  for (const auto& [k, v] : r.report.items()) keys.push_back(k);
  EXPECT_EQ(keys.front(), "command");
  EXPECT_EQ(keys.back(), "timing");
  EXPECT_EQ(r.report["config"]["seed"], 0);
  EXPECT_EQ(r.report["status"], "pass");
  EXPECT_EQ(find_check(r.report, "homomorphism")["trials"], 50);
  EXPECT_FALSE(cli::without_timing(r.report).contains("timing"));
}

TEST(Cli, FileInstances) {
  expect_all_pass(cli::run(file("verify-groupoid", data("pair.json"))));

  const auto bad = cli::run(file("verify-groupoid", data("pair_bad_inverse.json")));
  EXPECT_EQ(bad.exit_code, cli::kCheckFailed);
  const auto& axioms = find_check(bad.report, "axioms");
  EXPECT_EQ(axioms["status"], "fail");
  bool cites_inverse = false;
  for (const auto& v : axioms["violations"]) cites_inverse |= v["rule"] == to_string(Axiom::kInverse);
  EXPECT_TRUE(cites_inverse);

  // gauge groupoid written out, reloaded, with an explicit translation file
  const auto gg = fx::gauge_3_s3();
  const std::string g_path = temp("gauge.json"), t_path = temp("translations.json");
  io::write_file(g_path, io::groupoid_to_json(gg.groupoid).dump());
  json t = json::array();
  for (Arrow a : translation_subgroupoid(gg, identity_section(gg.bundle)).arrows())
    t.push_back(gg.groupoid.arrow_name(a));
  io::write_file(t_path, t.dump());
  for (const char* name : {"semidirect", "verify-prop1", "verify-theorem1", "rep-check", "random-op"}) {
    RunConfig c = file(name, g_path);
    c.translations = t_path;
    c.trials = 5;
    expect_all_pass(cli::run(c));
  }
  expect_all_pass(cli::run(file("quotient", g_path)));
  std::filesystem::remove(g_path);
  std::filesystem::remove(t_path);
}

TEST(Cli, Prop1CounterexampleStillPasses) {
  // Γ₁ = Γ: neither side of the biconditional holds, so it holds
  const auto gg = fx::gauge_2_z2();
  const std::string g_path = temp("z2.json"), t_path = temp("all.json");
  io::write_file(g_path, io::groupoid_to_json(gg.groupoid).dump());
  io::write_file(t_path, json(gg.groupoid.arrow_names()).dump());
  RunConfig c = file("verify-prop1", g_path);
  c.translations = t_path;
  const auto r = cli::run(c);
  EXPECT_EQ(r.exit_code, cli::kPass);
  EXPECT_EQ(find_check(r.report, "biconditional")["j_exists"], false);
  std::filesystem::remove(g_path);
  std::filesystem::remove(t_path);
}

TEST(Cli, OutputArtifacts) {
  const std::string out = temp("carrier.json");
  RunConfig c = gauge("semidirect", 2, "Z2");
  c.out = out;
  const auto r = cli::run(c);
  EXPECT_EQ(r.exit_code, cli::kPass);
  EXPECT_EQ(r.report["output"], out);
  const auto carrier = io::groupoid_from_json(io::load(out));
  EXPECT_EQ(carrier.arrow_count(), 8u);
  EXPECT_TRUE(validate_groupoid(carrier).ok());
  std::filesystem::remove(out);
}

TEST(Cli, ConvolveWithFunctionFiles) {
  const auto g = fx::pair2();
  const std::string a = temp("f1.json"), b = temp("f2.json");
  io::write_file(a, json{{"(0,1)", {1.0, 0.0}}}.dump());
  io::write_file(b, json{{"(1,0)", {0.0, 2.0}}}.dump());
  RunConfig c = file("convolve", data("pair.json"));
  c.f1 = a;
  c.f2 = b;
  const auto r = cli::run(c);
  EXPECT_EQ(r.exit_code, cli::kPass);
  // δ_(0,1) * 2i·δ_(1,0) = 2i·δ_(0,0)
  EXPECT_EQ(r.report["product"]["(0,0)"], json({0.0, 2.0}));
  EXPECT_EQ(r.report["product"]["(1,1)"], json({0.0, 0.0}));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(Cli, BadInputExitsTwo) {
  std::vector<RunConfig> bad;
  RunConfig none;
  none.command = "verify-groupoid";
  bad.push_back(none);
  bad.push_back(gauge("verify-poincare", 2, "S4"));
  bad.push_back(gauge("verify-poincare", 0, "Z2"));
  RunConfig tol = gauge("verify-theorem1", 2, "Z2");
  tol.tol = 0.0;
  bad.push_back(tol);
  RunConfig lv = gauge("commutant", 2, "Z2");
  lv.levels = 3;
  bad.push_back(lv);
  RunConfig sec = gauge("verify-poincare", 2, "Z2");
  sec.section = "/nonexistent/section.json";
  bad.push_back(sec);
  bad.push_back(file("verify-groupoid", "/nonexistent/g.json"));
  RunConfig both = file("verify-groupoid", data("pair.json"));
  both.base = 2;
  bad.push_back(both);
  bad.push_back(file("verify-poincare", data("pair.json")));
  bad.push_back(gauge("no-such-command", 2, "Z2"));
  RunConfig fiber = gauge("commutant", 2, "Z2");
  fiber.fiber = 9;
  bad.push_back(fiber);

  const std::string garbage = temp("garbage.json");
  io::write_file(garbage, "{\"base\": [\"0\"], ");
  bad.push_back(file("verify-groupoid", garbage));
  for (const auto& c : bad) {
    const auto r = cli::run(c);
    EXPECT_EQ(r.exit_code, cli::kBadInput) << r.report.dump();
    EXPECT_TRUE(r.report.contains("error"));
    EXPECT_EQ(r.report["status"], "fail");
  }
  const auto r = cli::run(file("verify-groupoid", garbage));
  EXPECT_EQ(r.report["error"]["kind"], "parse");
  EXPECT_EQ(r.report["error"]["where"].get<std::string>().rfind(garbage + " at byte", 0), 0u);
  std::filesystem::remove(garbage);
}

TEST(Cli, CapsExitThree) {
  RunConfig iso = gauge("verify-poincare", 3, "S3");
  iso.iso_cap = 8;
  const auto r = cli::run(iso);
  EXPECT_EQ(r.exit_code, cli::kTooLarge);
  EXPECT_EQ(r.report["error"]["kind"], "instance_too_large");

  RunConfig com = gauge("commutant", 3, "S3");
  com.commutant_cap = 1000;
  EXPECT_EQ(cli::run(com).exit_code, cli::kTooLarge);
  com.commutant_cap = 1000000;
  EXPECT_EQ(cli::run(com).exit_code, cli::kPass);
}

TEST(Cli, EnvironmentCaps) {
  RunConfig c;
  ::setenv("GROUPOID_ISO_CAP", "12", 1);
  ::setenv("GROUPOID_COMMUTANT_CAP", "500", 1);
  cli::apply_env_caps(c);
  EXPECT_EQ(c.iso_cap, 12u);
  EXPECT_EQ(c.commutant_cap, 500u);
  ::setenv("GROUPOID_ISO_CAP", "twelve", 1);
  EXPECT_THROW(cli::apply_env_caps(c), ParseError);
  ::setenv("GROUPOID_ISO_CAP", "0", 1);
  EXPECT_THROW(cli::apply_env_caps(c), ParseError);
  ::unsetenv("GROUPOID_ISO_CAP");
  ::unsetenv("GROUPOID_COMMUTANT_CAP");
}

TEST(Cli, DeterministicApartFromTiming) {
  for (const char* name : {"verify-theorem1", "rep-check", "random-op", "verify-poincare", "convolve"}) {
    RunConfig c = gauge(name, 3, "S3");
    c.section = "random";
    c.seed = 42;
    c.trials = 5;
    const auto a = cli::run(c), b = cli::run(c);
    EXPECT_EQ(cli::without_timing(a.report), cli::without_timing(b.report)) << name;
  }
  RunConfig c = gauge("convolve", 2, "Z2");
  c.seed = 1;
  const auto x = cli::run(c);
  c.seed = 2;
  EXPECT_NE(cli::without_timing(x.report), cli::without_timing(cli::run(c).report));
}
