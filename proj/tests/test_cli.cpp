#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "srdev/cli.hpp"
#include "srdev/io.hpp"

using namespace srdev;
using nlohmann::json;

namespace {

std::string tmp(const std::string& name) { return std::string(SRDEV_TEST_TMP) + "/cli_" + name; }

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, FreeAlgebraThenSymmetry) {
  const std::string spec = tmp("free23.json");
  const std::string report = tmp("free23_sym.json");
  ASSERT_EQ(call({"algebra", "free", "--generators", "2", "--step", "3", "-o", spec}).code, 0);
  EXPECT_EQ(call({"algebra", "check", spec}).code, 0);
  const Result r = call({"symmetry", spec, "-o", report});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("dimH=1"), std::string::npos) << r.out;
  EXPECT_EQ(read_json_file(report).at("dim_h"), 1);
}

TEST(Cli, NormalModuleAndObstruction) {
  const std::string report = tmp("nm.json");
  Result r = call({"normal-module", "--builtin", "free23", "--method", "popp", "-o", report});
  EXPECT_EQ(r.code, 0) << r.err;
  const json j = read_json_file(report);
  EXPECT_EQ(j.at("dim_hom_plus"), 53);
  EXPECT_EQ(j.at("dim_im_partial_plus"), 13);
  EXPECT_EQ(j.at("dim_N"), 40);
  r = call({"obstruction", "--builtin", "free23"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("e5^{1,2,3}"), std::string::npos) << r.out;
}

TEST(Cli, DevelopConditionInfeasibleForGoursat) {
  const std::string report = tmp("goursat.json");
  const Result r = call({"develop-condition", "--builtin", "goursat-halfplane", "-o", report});
  EXPECT_EQ(r.code, 1) << r.err;
  const json j = read_json_file(report);
  EXPECT_FALSE(j.at("feasible").get<bool>());
  EXPECT_TRUE(j.contains("witness"));
  EXPECT_EQ(call({"develop-condition", "--builtin", "heisenberg3"}).code, 0);
}

TEST(Cli, InputErrorsExitWithTwo) {
  const std::string bad = tmp("bad.json");
  write_text_file(bad, "{ not json");
  Result r = call({"symmetry", bad});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("MalformedSpec"), std::string::npos) << r.err;
  EXPECT_EQ(call({"symmetry", "--builtin", "heisenberg3", "--bogus"}).code, 2);
  EXPECT_EQ(call({"symmetry", "--builtin", "no-such-thing"}).code, 2);
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"symmetry", tmp("does-not-exist.json")}).code, 2);
}

TEST(Cli, ProlongRoundTrip) {
  const std::string once = tmp("prolonged.json");
  ASSERT_EQ(call({"prolong", "--builtin", "hyperbolic-plane", "-o", once}).code, 0);
  const auto spec = load_manifold(once);
  EXPECT_EQ(spec.frame.growth, (std::vector<int>{2, 3}));
  const Result r = call({"manifold", "check", once});
  EXPECT_EQ(r.code, 0) << r.err;
  const std::string twice = tmp("prolonged2.json");
  EXPECT_EQ(call({"prolong", once, "-o", twice}).code, 0);
  EXPECT_EQ(load_manifold(twice).frame.growth, (std::vector<int>{2, 3, 4}));
}

TEST(Cli, LeviCivitaPasses) {
  const Result r = call({"verify", "levi-civita", "--builtin", "sphere-patch"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
}

TEST(Cli, SimulateWritesCsv) {
  const std::string csv = tmp("path.csv");
  Result r = call({"simulate", "develop", "--builtin", "heisenberg3", "--dt", "0.01", "--T", "0.1",
                   "--csv", csv});
  EXPECT_EQ(r.code, 0) << r.err;
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,q1,q2,q3,h11,h12,h21,h22");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 11);

  const std::string ens = tmp("ensemble.csv");
  r = call({"simulate", "popp", "--builtin", "hyperbolic-plane", "--paths", "20", "--dt", "0.01",
            "--T", "0.1", "--csv", ens});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, ChristoffelOnGoursatIsInconsistent) {
  EXPECT_EQ(call({"christoffel", "--builtin", "goursat-halfplane"}).code, 1);
  EXPECT_EQ(call({"christoffel", "--builtin", "contact-halfplane"}).code, 0);
}

TEST(Cli, GeneratorVerification) {
  const Result r = call({"verify", "generator", "--builtin", "heisenberg3", "--paths", "20000",
                         "--t", "0.05", "--f", "x^2", "--f", "x*y"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
}
