#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "almostcomm/algebra.hpp"
#include "almostcomm/matrix_io.hpp"
#include "almostcomm/tsirelson.hpp"
#include "cli.hpp"

using namespace almostcomm;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "almostcomm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("almostcomm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const json& j) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump();
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

CMatrix sigma3() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace

TEST_F(CliTest, SchurExamples) {
  const auto id = run({"schur", write("id.json", io::matrix_to_json(linalg::identity(3)))});
  ASSERT_EQ(id.code, cli::kOk) << id.err;
  EXPECT_EQ(json::parse(id.out)["certificate"]["bound"], 0.0);

  const auto z = run({"schur", write("z.json", io::matrix_to_json(sigma3()))});
  ASSERT_EQ(z.code, cli::kOk);
  const auto zj = json::parse(z.out);
  EXPECT_NEAR(zj["certificate"]["bound"].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(zj["certificate"]["actual"].get<double>(), 1.0, 1e-12);

  Rng rng({80, 0});
  const CMatrix a = linalg::kron(linalg::ginibre(2, 2, rng), linalg::identity(2));
  const auto bi = run({"schur", write("a.json", io::matrix_to_json(a)), "--bipartite", "2", "2"});
  ASSERT_EQ(bi.code, cli::kOk) << bi.err;
  EXPECT_LT(json::parse(bi.out)["certificate"]["actual"].get<double>(), 1e-12);
}

TEST_F(CliTest, InputErrors) {
  EXPECT_EQ(run({"schur", path("missing.json")}).code, cli::kInputError);
  std::ofstream(path("bad.json")) << "{not json";
  EXPECT_EQ(run({"schur", path("bad.json")}).code, cli::kInputError);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kInputError);
  EXPECT_EQ(run({"stampfli", write("z.json", io::matrix_to_json(sigma3())), "--mode", "nope"}).code,
            cli::kInputError);
  EXPECT_EQ(run({"gen", "--spec", write("spec.json", json{{"blocks", json::array()}}), "--out", path("x.json")}).code,
            cli::kInputError);
}

TEST_F(CliTest, DecomposeFamily) {
  const auto inst = tsirelson::plant_instance({{{2, 3}}, 2, 2, 2, 2, 0.0, false}, {81, 0});
  const auto r = run({"decompose", write("fam.json", io::family_to_json(inst.strategy.A)), "--seed", "3"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["block_dims"], json::parse("[[2,3]]"));
  EXPECT_LE(j["residual"].get<double>(), 1e-7);

  const GeneratorFamily scal({{0, 0}}, {0.5 * linalg::identity(3)}, {true, true, false});
  const auto s = run({"decompose", write("scal.json", io::family_to_json(scal))});
  ASSERT_EQ(s.code, cli::kOk) << s.err;
  EXPECT_EQ(json::parse(s.out)["block_dims"], json::parse("[[1,3]]"));
}

TEST_F(CliTest, StampfliModes) {
  const std::string z = write("z.json", io::matrix_to_json(sigma3()));
  const auto exact = run({"stampfli", z, "--mode", "exact", "--samples", "5000", "--seed", "2"});
  ASSERT_EQ(exact.code, cli::kOk) << exact.err;
  EXPECT_NEAR(json::parse(exact.out)["dist"].get<double>(), 1.0, 1e-12);

  const std::string s = write("s.json", io::matrix_to_json(2.0 * linalg::identity(3)));
  const auto single = run({"stampfli", s, "--mode", "single", "--epsilon", "0.01", "--n-unitaries", "200",
                           "--csv", path("single.csv")});
  ASSERT_EQ(single.code, cli::kOk) << single.err;
  EXPECT_NEAR(json::parse(single.out)["dist"].get<double>(), 0.0, 1e-12);
  const std::string csv = slurp(path("single.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "mode,d,n,epsilon,delta,eta,dist,bound,valid,mc,closed_form,sigma");

  Rng rng({82, 0});
  const std::string h = write("h.json", io::matrix_to_json(linalg::random_hermitian(4, rng)));
  const auto w = run({"stampfli", h, "--mode", "weingarten", "--samples", "50000"});
  ASSERT_EQ(w.code, cli::kOk) << w.err;
  EXPECT_TRUE(json::parse(w.out)["weingarten"]["within_3sigma"].get<bool>());

  const auto dbl = run({"stampfli", h, "--mode", "double", "--epsilon", "5", "--n-subspaces", "5",
                        "--n-unitaries", "50"});
  ASSERT_EQ(dbl.code, cli::kOk) << dbl.err;
  EXPECT_TRUE(json::parse(dbl.out)["valid"].get<bool>());
}

TEST_F(CliTest, GenThenTsirelson) {
  const std::string spec = write("spec.json", json{{"blocks", {{2, 3}}}, {"epsilon", 1e-3}, {"certificate", true}});
  const auto g = run({"gen", "--spec", spec, "--seed", "4", "--out", path("bundle.json")});
  ASSERT_EQ(g.code, cli::kOk) << g.err;
  const auto t = run({"tsirelson", path("bundle.json"), "--cert", path("bundle.json"), "--seed", "1", "--out",
                      path("run")});
  ASSERT_EQ(t.code, cli::kOk) << t.err;
  const auto rep = json::parse(slurp(path("run/report.json")))["report"];
  EXPECT_TRUE(rep["certificate_check"]["ok"].get<bool>());
  EXPECT_LE(rep["max_error"].get<double>(), rep["bounds"]["thm_general_proof"].get<double>());
  EXPECT_TRUE(fs::exists(path("run/tensor_strategy.json")));
  EXPECT_TRUE(fs::exists(path("run/report.csv")));

  // Without a certificate the bounds are reported as missing.
  const auto nc = run({"tsirelson", path("bundle.json"), "--csv", path("nc.csv")});
  ASSERT_EQ(nc.code, cli::kOk) << nc.err;
  EXPECT_TRUE(json::parse(nc.out)["report"]["bounds"]["thm_general_proof"].is_null());
  EXPECT_NE(slurp(path("nc.csv")).find("n/a"), std::string::npos);
}

TEST_F(CliTest, ExactBundleReproducesCorrelations) {
  const std::string spec = write("spec.json", json{{"blocks", {{2, 2}, {1, 2}}}, {"epsilon", 0.0}});
  ASSERT_EQ(run({"gen", "--spec", spec, "--out", path("b.json")}).code, cli::kOk);
  const auto bundle = json::parse(slurp(path("b.json")));
  EXPECT_LE(bundle["achieved_epsilon"].get<double>(), 1e-10);
  const auto t = run({"tsirelson", path("b.json")});
  ASSERT_EQ(t.code, cli::kOk) << t.err;
  EXPECT_LE(json::parse(t.out)["report"]["correlation_distance"].get<double>(), 1e-8);
}

TEST_F(CliTest, SweepIsReproducibleAcrossThreadCounts) {
  const std::string spec = write("spec.json", json{{"blocks", {{2, 2}}}, {"epsilon", 1e-3}});
  ASSERT_EQ(run({"gen", "--spec", spec, "--seed", "9", "--count", "6", "--jobs", "1", "--out", path("sweep")}).code,
            cli::kOk);
  const std::string m1 = slurp(path("sweep/manifest.json"));
  const std::string i3 = slurp(path("sweep/instance_00003.json"));
  fs::remove_all(path("sweep"));
  ASSERT_EQ(run({"gen", "--spec", spec, "--seed", "9", "--count", "6", "--jobs", "4", "--out", path("sweep")}).code,
            cli::kOk);
  EXPECT_EQ(slurp(path("sweep/manifest.json")), m1);
  EXPECT_EQ(slurp(path("sweep/instance_00003.json")), i3);
  EXPECT_EQ(json::parse(m1)["instances"].size(), 6u);
}

TEST_F(CliTest, SameSeedSameBytes) {
  const std::string z = write("z.json", io::matrix_to_json(sigma3()));
  const auto a = run({"stampfli", z, "--mode", "single", "--epsilon", "1", "--n-unitaries", "300", "--seed", "5"});
  const auto b = run({"stampfli", z, "--mode", "single", "--epsilon", "1", "--n-unitaries", "300", "--seed", "5"});
  EXPECT_EQ(a.out, b.out);
}
