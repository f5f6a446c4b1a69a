#include <sys/wait.h>

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "nsm/nsm.hpp"
#include "support/fixtures.hpp"

using namespace nsm;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fixtures::scratch_dir("cli");
    std::ofstream(dir_ / "scene.json") << R"({"seed": 31, "extent": 30, "objects": {"trees": 9, "bushes": 6},
      "source": {"yaw_deg": 0, "translation": [0, 0, 0], "seed": 4}})";
    ForestModel m = fixtures::small_model();
    m.fingerprint = PipelineConfig{}.fingerprint();
    rf_save(m, dir_ / "model.rf");
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static CliRun cli(const std::string& args) {
    const std::string cmd = std::string(NSM_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() + " 2> " +
                            (dir_ / "stderr.txt").string();
    const int raw = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(dir_ / "stdout.txt");
    r.err = slurp(dir_ / "stderr.txt");
    return r;
  }

  static std::string at(const char* name) { return (dir_ / name).string(); }
  static std::string config(const char* name) { return (fs::path(NSM_SOURCE_DIR) / "configs" / name).string(); }

  static inline fs::path dir_;
};

}  // namespace

TEST_F(Cli, IdentityScenarioEndToEnd) {
  ASSERT_EQ(cli("gen-scene --spec " + at("scene.json") + " --out " + at("scene.ply") + " --labels " + at("labels.json") +
                " --source-out " + at("frame0.ply") + " --gt " + at("gt.txt"))
                .code,
            0);
  const CliRun built = cli("build-map --in " + at("scene.ply") + " --out " + at("map.nsm"));
  ASSERT_EQ(built.code, 0) << built.err;
  // Every run logs its resolved configuration.
  EXPECT_NE(built.err.find("resolved config"), std::string::npos);

  fs::create_directories(dir_ / "results");
  const CliRun loc = cli("localize --map " + at("map.nsm") + " --source " + at("frame0.ply") + " --model " + at("model.rf") +
                      " --out " + (dir_ / "results" / "frame0.json").string());
  ASSERT_EQ(loc.code, 0) << loc.err;
  const auto result = nlohmann::json::parse(slurp(dir_ / "results" / "frame0.json"));
  EXPECT_EQ(result["status"], "localized");

  const CliRun ev = cli("eval --results " + at("results") + " --gt " + at("gt.txt") + " --out " + at("report.json"));
  ASSERT_EQ(ev.code, 0) << ev.err;
  const auto report = nlohmann::json::parse(slurp(dir_ / "report.json"));
  EXPECT_EQ(report["localized"], 1);
  EXPECT_LT(report["translation_m"]["rmse"].get<double>(), 1e-6);
}

TEST_F(Cli, StagewiseCommands) {
  ASSERT_EQ(cli("gen-scene --spec " + at("scene.json") + " --out " + at("s2.ply")).code, 0);
  ASSERT_EQ(cli("filter-ground --in " + at("s2.ply") + " --out " + at("ng.ply")).code, 0);
  ASSERT_EQ(cli("segment --in " + at("ng.ply") + " --out-dir " + at("segs") + " --min-points 100").code, 0);
  const auto index = nlohmann::json::parse(slurp(dir_ / "segs" / "index.json"));
  EXPECT_EQ(index["segments"].size(), 15u);
  // Shorthand changed segmentation.min_points, so the map must be read with the same setting.
  ASSERT_EQ(cli("describe --segments " + at("segs") + " --out " + at("feat.nsm") + " --set segmentation.min_points=100").code, 0);
  EXPECT_EQ(load_map(at("feat.nsm")).size(), 15u);
  ASSERT_EQ(cli("build-map --in " + at("s2.ply") + " --out " + at("s2.nsm")).code, 0);
  const CliRun m = cli("match --map " + at("s2.nsm") + " --source " + at("segs") + " --model " + at("model.rf") + " --k 5 --out " +
                    at("matches.json"));
  ASSERT_EQ(m.code, 0) << m.err;
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "matches.json"))["candidates"].size(), 15u * 5u);
}

TEST_F(Cli, TrainFromScenario) {
  ASSERT_EQ(cli("gen-scene --spec " + at("scene.json") + " --out " + at("t.ply") + " --source-out " + at("t_src.ply") + " --gt " +
                at("t_gt.txt"))
                .code,
            0);
  ASSERT_EQ(cli("build-map --in " + at("t.ply") + " --out " + at("t.nsm")).code, 0);
  ASSERT_EQ(cli("label-pairs --map " + at("t.nsm") + " --source " + at("t_src.ply") + " --gt " + at("t_gt.txt") + " --out " +
                at("pairs.csv"))
                .code,
            0);
  const CliRun tr = cli("train-rf --pairs " + at("pairs.csv") + " --trees 5 --depth 8 --out " + at("t.rf"));
  ASSERT_EQ(tr.code, 0) << tr.err;
  EXPECT_EQ(rf_load(at("t.rf")).trees.size(), 5u);
}

TEST_F(Cli, MissingInputIsIoError) {
  const CliRun r = cli("build-map --in " + at("does_not_exist.ply") + " --out " + at("x.nsm"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("does_not_exist.ply"), std::string::npos);
}

TEST_F(Cli, FingerprintMismatchIsValidationError) {
  ASSERT_EQ(cli("gen-scene --spec " + at("scene.json") + " --out " + at("fp.ply")).code, 0);
  ASSERT_EQ(cli("--config " + config("cp.toml") + " build-map --in " + at("fp.ply") + " --out " + at("cp.nsm")).code, 0);
  const CliRun r = cli("--config " + config("kitti.toml") + " localize --map " + at("cp.nsm") + " --source " + at("fp.ply") +
                    " --model " + at("model.rf") + " --out " + at("fp.json"));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("fingerprint"), std::string::npos);
}

TEST_F(Cli, UsageAndValidationErrors) {
  EXPECT_EQ(cli("build-map --bogus-flag").code, 1);
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("--set registration.tau=2 build-map --in " + at("scene.ply") + " --out " + at("y.nsm")).code, 3);
  EXPECT_EQ(cli("--set nope.key=1 build-map --in " + at("scene.ply") + " --out " + at("y.nsm")).code, 3);
}
