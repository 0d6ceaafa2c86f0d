#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <string>

#include "srdev/builtins.hpp"
#include "srdev/errors.hpp"
#include "srdev/io.hpp"

using namespace srdev;
using nlohmann::json;

namespace {

std::string tmp(const std::string& name) { return std::string(SRDEV_TEST_TMP) + "/io_" + name; }

}  // namespace

TEST(AlgebraSpec, ParsesOneBasedKeysAndFractions) {
  const json j = json::parse(R"({"dim": 3, "growth": [2, 3], "brackets": {"1,2": {"3": "1/2"}}})");
  const AlgebraSpec s = parse_algebra_spec(j);
  EXPECT_EQ(s.dim, 3);
  EXPECT_EQ(s.brackets.at({0, 1}).at(2), rational(1, 2));
  EXPECT_EQ(parse_algebra_spec(to_json(s)), s);
}

TEST(AlgebraSpec, RoundTripsThroughFile) {
  const auto alg = free_nilpotent(3, 3);
  const std::string path = tmp("free33.json");
  write_text_file(path, to_json(alg.to_spec()).dump(2));
  EXPECT_EQ(load_algebra(path).to_spec(), alg.to_spec());
}

TEST(AlgebraSpec, RejectsMalformedInput) {
  for (const char* text :
       {R"({"growth": [2, 3], "brackets": {}})", R"({"dim": 3, "growth": [2, 3], "brackets": {"1": {"3": 1}}})",
        R"({"dim": 3, "growth": [2, 3], "brackets": {"1,2": {"3": 0.5}}})",
        R"({"dim": 3, "growth": [2, 3], "brackets": {"1,2": {"9": 1}}})",
        R"({"dim": 3, "growth": [2, 3], "brackets": {"1,2": {"3": "a/b"}}})"})
    EXPECT_THROW(parse_algebra_spec(json::parse(text)), MalformedSpec) << text;
}

TEST(JsonFile, ReportsParseErrorLocation) {
  const std::string path = tmp("broken.json");
  write_text_file(path, "{\"dim\": 3,,}");
  try {
    read_json_file(path);
    FAIL() << "expected MalformedSpec";
  } catch (const MalformedSpec& e) {
    EXPECT_NE(std::string(e.what()).find(path), std::string::npos);
  }
  EXPECT_THROW(read_json_file(tmp("missing.json")), MalformedSpec);
}

TEST(ManifoldSpec, RoundTripsBuiltins) {
  for (const auto& name : builtin_names()) {
    const auto b = builtin(name);
    const ManifoldSpec spec{b.frame, b.q0};
    const std::string path = tmp(name + ".json");
    write_text_file(path, to_json(b.frame, b.q0).dump(2));
    const ManifoldSpec back = load_manifold(path);
    EXPECT_TRUE(same_manifold(spec, back)) << name;
    for (const auto& q : sample_grid(b.frame.chart, 2))
      for (int i = 0; i < b.frame.n(); ++i)
        for (int a = 0; a < b.frame.chart.dim(); ++a)
          EXPECT_NEAR(back.frame.fields[i][a].eval(q), b.frame.fields[i][a].eval(q), 1e-12);
  }
}

TEST(ManifoldSpec, ReportsBadExpressionWithContext) {
  const json j = json::parse(R"({
    "chart": {"coords": ["x", "y"], "box": [[-1, 1], [-1, 1]]},
    "growth": [2],
    "frame": [["1", "0"], ["0", "1 + w"]]})");
  try {
    parse_manifold_spec(j);
    FAIL() << "expected MalformedSpec";
  } catch (const MalformedSpec& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("UnknownIdentifier"), std::string::npos) << what;
    EXPECT_NE(what.find("1 + w"), std::string::npos) << what;
  }
  json missing_box = j;
  missing_box["chart"].erase("box");
  missing_box["frame"][1][1] = "1";
  EXPECT_THROW(parse_manifold_spec(missing_box), MalformedSpec);
}

TEST(HomJson, UsesSortedLabels) {
  const auto alg = free_nilpotent(2, 2);
  const auto g = ambient(alg, symmetry_algebra(alg, extend_metric(alg)));
  HomElement x(2);
  x.add(0, {1, 0}, rational(3, 2));
  const json j = to_json(g, x);
  EXPECT_EQ(j.at("e1^{1,2}"), "-3/2");
}

TEST(Csv, PathAndEnsembleHeaders) {
  Path p;
  p.t = {0.0, 0.5};
  p.q = {{0.0, 1.0}, {0.25, 1.5}};
  p.h = {{1, 0, 0, 1}, {0, 1, -1, 0}};
  const std::string csv = path_csv(p);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,q1,q2,h11,h12,h21,h22");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);

  Ensemble e;
  e.paths = 2;
  e.dim = 2;
  e.times = {1.0};
  e.values = {0, 1, 2, 3};
  const std::string ecsv = ensemble_csv(e);
  EXPECT_EQ(ecsv.substr(0, ecsv.find('\n')), "path,t,q1,q2");
  EXPECT_EQ(std::count(ecsv.begin(), ecsv.end(), '\n'), 3);
}
