#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "medli/cli.hpp"
#include "test_support.hpp"

using namespace medli;
using medli::testing::data_path;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
  io::Json report() const { return io::parse_text(out); }
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "medli");
  args.push_back("--quiet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return data_path("fixtures/" + name); }

}  // namespace

TEST(CliSolve, OrthogonalPair) {
  const CliResult r = run({"solve", fixture("orthogonal_pair.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const io::Json j = r.report();
  EXPECT_NEAR(j["success_prob"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(j["verdict"], "Optimal");
  EXPECT_TRUE(j["certified"].get<bool>());
  EXPECT_TRUE(j["fixed_point"]["is_fixed"].get<bool>());
}

TEST(CliSolve, ThetaPairWithOracle) {
  const CliResult r = run({"solve", fixture("theta_pair.json"), "--oracle"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.report()["success_prob"].get<double>(), 0.75, 1e-6);
  EXPECT_TRUE(r.report()["command"]["oracle"].get<bool>());
}

TEST(CliSolve, CorruptedJsonNamesLine) {
  const CliResult r = run({"solve", fixture("malformed.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 5"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST(CliSolve, InvalidInputsExitTwo) {
  EXPECT_EQ(run({"solve", fixture("invalid_state.json")}).code, 2);
  EXPECT_EQ(run({"solve", fixture("wrong_schema.json")}).code, 2);
  EXPECT_EQ(run({"solve", fixture("missing.json")}).code, 2);
  EXPECT_EQ(run({"solve"}).code, 2);
  EXPECT_EQ(run({"nonsense"}).code, 2);
  EXPECT_EQ(run({"solve", fixture("orthogonal_pair.json"), "--tol-psd", "-1"}).code, 2);
  EXPECT_EQ(run({"solve", fixture("orthogonal_pair.json"), "--restarts", "0"}).code, 2);
}

TEST(CliSolve, NumericalFailureExitsFour) {
  const CliResult r = run({"solve", fixture("near_singular.json")});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("SigmaSingular"), std::string::npos);
}

TEST(CliSolve, ReportsAreByteStable) {
  const CliResult a = run({"solve", fixture("random_d4.json"), "--seed", "3"});
  const CliResult b = run({"solve", fixture("random_d4.json"), "--seed", "3"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(CliSolve, ToleranceOverridesAreEchoed) {
  const CliResult r = run({"solve", fixture("orthogonal_pair.json"), "--tol-fixpoint", "1e-5"});
  EXPECT_EQ(r.report()["command"]["tolerances"]["fixpoint"].get<double>(), 1e-5);
}

TEST(CliSolve, OutFlagWritesFile) {
  const std::string path = ::testing::TempDir() + "medli_cli_out.json";
  const CliResult r = run({"solve", fixture("orthogonal_pair.json"), "--out", path});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  const CliResult direct = run({"solve", fixture("orthogonal_pair.json")});
  EXPECT_EQ(io::read_file(path), direct.out);
  std::remove(path.c_str());
}

TEST(CliCertify, SwappedProjectorsAreNotOptimal) {
  const CliResult r = run({"certify", fixture("orthogonal_pair.json"), fixture("swapped_povm.json")});
  EXPECT_EQ(r.code, 3);
  const io::Json j = r.report();
  EXPECT_EQ(j["verdict"], "NotOptimal");
  EXPECT_EQ(j["simplified"]["verdict"], "NotOptimal");
  EXPECT_TRUE(j["agreement"].get<bool>());
}

TEST(CliCertify, InverseMapPairIsOptimal) {
  const CliResult r = run({"certify", fixture("inverse_image.json"), fixture("inverse_povm.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.report()["verdict"], "Optimal");
  EXPECT_EQ(r.report()["simplified"]["verdict"], "Optimal");
}

TEST(CliCertify, RankMismatchIsStructured) {
  const CliResult r = run({"certify", fixture("fixed_point.json"), fixture("rank_mismatch_povm.json")});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.report()["simplified"]["error"], "RankSignatureMismatch");
  EXPECT_TRUE(r.report()["agreement"].is_null());
}

TEST(CliCertify, NonProjectivePovmGetsFullVerdictOnly) {
  const CliResult r = run({"certify", fixture("theta_pair.json"), fixture("non_projective_povm.json")});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.report()["simplified"]["error"], "NotProjector");
}

TEST(CliCertify, ShapeMismatchIsInputError) {
  EXPECT_EQ(run({"certify", fixture("random_d3.json"), fixture("support_povm.json")}).code, 2);
}

TEST(CliMap, FixedPointForwardIsIdentity) {
  const CliResult r = run({"map", fixture("fixed_point.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Ensemble in = io::ensemble_from_json(io::parse_text(io::read_file(fixture("fixed_point.json"))));
  const Ensemble out = io::ensemble_from_json(r.report()["image"]);
  EXPECT_LT(max_weighted_deviation(in, out), 1e-8);
}

TEST(CliMap, InverseSelfCertifies) {
  const CliResult r = run({"map", fixture("random_d5.json"), "--direction", "inverse"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.report()["verdict"], "Optimal");
  EXPECT_TRUE(r.report().contains("certificate"));
}

TEST(CliMap, OrthogonalPairBothDirections) {
  const Ensemble in = medli::testing::orthogonal_pair();
  for (const char* dir : {"forward", "inverse"}) {
    const CliResult r = run({"map", fixture("orthogonal_pair.json"), "--direction", dir});
    ASSERT_EQ(r.code, 0);
    EXPECT_LT(max_weighted_deviation(in, io::ensemble_from_json(r.report()["image"])), 1e-12) << dir;
  }
}

TEST(CliMap, BadDirection) { EXPECT_EQ(run({"map", fixture("orthogonal_pair.json"), "--direction", "up"}).code, 2); }

TEST(CliRoundtrip, Fixtures) {
  const CliResult o = run({"roundtrip", fixture("orthogonal_pair.json")});
  ASSERT_EQ(o.code, 0);
  EXPECT_LT(o.report()["inverse_after_forward"].get<double>(), 1e-10);
  for (const char* f : {"random_d3.json", "random_d5.json"}) {
    const CliResult r = run({"roundtrip", fixture(f)});
    ASSERT_EQ(r.code, 0) << f;
    EXPECT_LT(r.report()["inverse_after_forward"].get<double>(), 1e-7);
    EXPECT_LT(r.report()["forward_after_inverse"].get<double>(), 1e-7);
  }
}

TEST(CliGen, ReproducibleAndValid) {
  const CliResult a = run({"gen", "--dim", "2", "--signature", "1,1", "--seed", "7"});
  const CliResult b = run({"gen", "--dim", "2", "--signature", "1,1", "--seed", "7"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(io::ensemble_from_json(a.report()).signature(), (RankSignature{1, 1}));
}

TEST(CliGen, SignatureErrors) {
  EXPECT_EQ(run({"gen", "--dim", "3", "--signature", "2,2"}).code, 2);
  EXPECT_EQ(run({"gen", "--dim", "3", "--signature", "2,x"}).code, 2);
  EXPECT_EQ(run({"gen", "--signature", "1,1"}).code, 2);
}

TEST(CliGen, FixedPointPassesFixpoint) {
  const std::string path = ::testing::TempDir() + "medli_cli_fp.json";
  ASSERT_EQ(run({"gen", "--dim", "4", "--signature", "2,1,1", "--seed", "2", "--fixed-point", "--out", path}).code, 0);
  const CliResult r = run({"fixpoint", path});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.report()["fixed_point"]["is_fixed"].get<bool>());
  std::remove(path.c_str());
}

TEST(CliFixpoint, Examples) {
  const CliResult o = run({"fixpoint", fixture("orthogonal_pair.json")});
  EXPECT_EQ(o.code, 0);
  EXPECT_NEAR(o.report()["fixed_point"]["c_estimate"].get<double>(), 1.0 / std::sqrt(2.0), 1e-15);
  const CliResult p = run({"fixpoint", fixture("perturbed_prior.json")});
  EXPECT_EQ(p.code, 3);
  EXPECT_FALSE(p.report()["fixed_point"]["is_fixed"].get<bool>());
}

TEST(CliHelp, PrintsUsage) {
  std::ostringstream out, err;
  const char* argv[] = {"medli", "--help"};
  EXPECT_EQ(cli::run(2, argv, out, err), 0);
  EXPECT_NE(out.str().find("solve"), std::string::npos);
}
