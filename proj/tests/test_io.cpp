#include <gtest/gtest.h>

#include <filesystem>

#include "groupoid/groupoid.hpp"
#include "groupoid/io.hpp"

using namespace groupoid;
namespace fx = groupoid::fixtures;
using io::json;

namespace {

std::string data(const std::string& name) { return std::string(GROUPOID_TEST_DATA) + "/" + name; }

bool same_tables(const FiniteGroupoid& a, const FiniteGroupoid& b) {
  const auto x = a.tables(), y = b.tables();
  return x.base == y.base && x.arrows == y.arrows && x.src == y.src && x.tgt == y.tgt && x.compose == y.compose &&
         x.inv == y.inv && x.identity == y.identity && x.labels == y.labels;
}

template <class F>
std::string parse_error_where(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.where();
  }
  return "<no ParseError>";
}

}  // namespace

TEST(GroupoidJson, RoundTrips) {
  const auto gg = fx::gauge_3_s3();
  const auto sd = semidirect_product(gg.groupoid, lorentz_subgroupoid(gg),
                                     translation_subgroupoid(gg, identity_section(gg.bundle)));
  for (const FiniteGroupoid& g : {fx::pair2(), fx::z3(), gg.groupoid, sd.carrier}) {
    const auto back = io::groupoid_from_json(io::parse_text(io::groupoid_to_json(g).dump(), "mem"));
    EXPECT_TRUE(same_tables(g, back));
  }
  EXPECT_TRUE(sd.carrier.has_labels());
  EXPECT_TRUE(io::groupoid_to_json(sd.carrier).contains("labels"));
  EXPECT_FALSE(io::groupoid_to_json(gg.groupoid).contains("labels"));
}

TEST(GroupoidJson, CheckedInPairFileIsBitExact) {
  EXPECT_EQ(io::read_file(data("pair.json")), io::groupoid_to_json(fx::pair2()).dump(2) + "\n");
  const auto g = io::groupoid_from_json(io::load(data("pair.json")));
  EXPECT_TRUE(validate_groupoid(g).ok());
  const auto bad = io::groupoid_from_json(io::load(data("pair_bad_inverse.json")));
  const auto v = validate_groupoid(bad);
  EXPECT_FALSE(v.ok());
  EXPECT_TRUE(v.cites(Axiom::kInverse));
}

TEST(GroupoidJson, KeyOrder) {
  const json j = io::groupoid_to_json(fx::pair2());
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"base", "arrows", "compose", "inv", "identity"}));
}

TEST(GroupoidJson, ParseErrorsCarryLocations) {
  EXPECT_EQ(parse_error_where([] { io::parse_text("{\"base\": [", "f.json"); }).rfind("f.json at byte ", 0), 0u);
  EXPECT_EQ(parse_error_where([] { io::load("/nonexistent/x.json"); }), "/nonexistent/x.json");

  json j = io::groupoid_to_json(fx::pair2());
  j.erase("compose");
  EXPECT_EQ(parse_error_where([&] { io::groupoid_from_json(j); }), "/compose");

  j = io::groupoid_to_json(fx::pair2());
  j["arrows"][2]["src"] = 7;
  EXPECT_EQ(parse_error_where([&] { io::groupoid_from_json(j); }), "/arrows/2/src");

  j = io::groupoid_to_json(fx::pair2());
  j["compose"][1] = json::array({"(0,0)", "(0,1)"});
  EXPECT_EQ(parse_error_where([&] { io::groupoid_from_json(j); }), "/compose/1");

  EXPECT_EQ(parse_error_where([] { io::groupoid_from_json(json::array()); }), "/");
}

TEST(GroupoidJson, StructuralProblemsAreMalformedTables) {
  json j = io::groupoid_to_json(fx::pair2());
  j["arrows"][1]["tgt"] = "9";
  EXPECT_THROW(io::groupoid_from_json(j), MalformedTable);

  j = io::groupoid_to_json(fx::pair2());
  j["compose"][0][2] = "zz";
  EXPECT_THROW(io::groupoid_from_json(j), MalformedTable);

  j = io::groupoid_to_json(fx::pair2());
  j["inv"].erase("(1,1)");
  EXPECT_THROW(io::groupoid_from_json(j), MalformedTable);

  j = io::groupoid_to_json(fx::pair2());
  j["identity"].erase("1");
  EXPECT_THROW(io::groupoid_from_json(j), MalformedTable);

  j = io::groupoid_to_json(fx::pair2());
  j["arrows"][3]["id"] = "(0,0)";
  EXPECT_THROW(io::groupoid_from_json(j), MalformedTable);

  j = io::groupoid_to_json(fx::pair2());
  j["compose"].erase(j["compose"].size() - 1);  // a composable pair left undefined
  EXPECT_THROW(io::groupoid_from_json(j), MalformedTable);

  j = io::groupoid_to_json(fx::pair2());
  j["compose"].push_back(json::array({"(0,0)", "(1,1)", "(0,0)"}));  // not composable
  EXPECT_THROW(io::groupoid_from_json(j), MalformedTable);
}

TEST(SelectionJson, Examples) {
  const auto g = fx::pair2();
  const auto s = io::selection_from_json(g, json::array({"(0,0)", "(1,1)"}));
  EXPECT_EQ(s.arrows().size(), 2u);
  EXPECT_THROW(io::selection_from_json(g, json::array({"(2,2)"})), MalformedTable);
  EXPECT_THROW(io::selection_from_json(g, json::object()), ParseError);
}

TEST(GroupJson, RoundTripsAndIndices) {
  for (const auto& G : {FiniteGroup::symmetric(3), FiniteGroup::quaternion8(), FiniteGroup::cyclic(5)}) {
    const auto back = io::group_from_json(io::group_to_json(G));
    EXPECT_EQ(back.names(), G.names());
    for (Element a : G.elements())
      for (Element b : G.elements()) EXPECT_EQ(back.mul(a, b), G.mul(a, b));
  }
  const json z2 = {{"elements", {"e", "a"}}, {"mul", {{0, 1}, {1, 0}}}, {"identity", 0}};
  EXPECT_EQ(io::group_from_json(z2).size(), 2u);
  json bad = z2;
  bad["mul"][1][1] = 5;
  EXPECT_EQ(parse_error_where([&] { io::group_from_json(bad); }), "/mul/1/1");
  bad = z2;
  bad["mul"][1][1] = 1;  // a has no inverse
  EXPECT_THROW(io::group_from_json(bad), InvalidGroup);
}

TEST(SectionJson, RoundTripAndErrors) {
  const auto b = fx::bundle_3_s3();
  Rng rng(1);
  const Section s = random_section(b, rng);
  EXPECT_EQ(io::section_from_json(b, io::section_to_json(b, s)).sigma, s.sigma);
  const json missing = {{"0", "e"}, {"1", "e"}};
  EXPECT_EQ(parse_error_where([&] { io::section_from_json(b, missing); }), "/2");
  const json extra = {{"0", "e"}, {"1", "e"}, {"2", "e"}, {"3", "e"}};
  EXPECT_THROW(io::section_from_json(b, extra), ParseError);
  const json unknown = {{"0", "e"}, {"1", "q"}, {"2", "e"}};
  EXPECT_EQ(parse_error_where([&] { io::section_from_json(b, unknown); }), "/1");
}

TEST(FunctionJson, RoundTripAndSparse) {
  const auto g = fx::gauge_2_z2().groupoid;
  Rng rng(2);
  const auto f = random_function(g.arrow_count(), rng);
  EXPECT_EQ(max_abs_diff(io::function_from_json(g, io::function_to_json(g, f)), f), 0.0);
  const json sparse = {{"(0,a,1)", {1.5, -2.0}}};
  const auto h = io::function_from_json(g, sparse);
  EXPECT_EQ(h(*g.find_arrow("(0,a,1)")), Complex(1.5, -2.0));
  EXPECT_EQ(h(g.identity(base_at(0))), Complex{});
  EXPECT_EQ(parse_error_where([&] { io::function_from_json(g, json{{"nope", {0, 0}}}); }), "/nope");
  EXPECT_EQ(parse_error_where([&] { io::function_from_json(g, json{{"(0,a,1)", {0, "x"}}}); }), "/(0,a,1)/1");
}

TEST(Files, WriteAndRead) {
  const auto path = (std::filesystem::temp_directory_path() / "groupoid_io_test.json").string();
  io::write_file(path, "[1, 2]");
  EXPECT_EQ(io::load(path), json::array({1, 2}));
  std::filesystem::remove(path);
  EXPECT_THROW(io::write_file("/nonexistent/dir/x.json", "{}"), ParseError);
}
