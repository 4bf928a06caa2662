#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "habdf/cli/commands.hpp"
#include "habdf/io/csv.hpp"
#include "habdf/metrics.hpp"

namespace fs = std::filesystem;
using namespace habdf;

namespace {

const fs::path kFixtures = HABDF_FIXTURE_DIR;
const fs::path kScenario = fs::path(HABDF_SCENARIO_DIR) / "fig3.scenario";

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / "habdf_cli_tests" / info->name();
    fs::remove_all(dir);
    fs::create_directories(dir);
  }

  Outcome run(const std::string& args) const {
    const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + HABDF_BINARY + "\" " + args + " >\"" +
                            out.string() + "\" 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Outcome r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
  }
};

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

io::CsvTable table(const fs::path& p) { return io::read_csv(p); }

double cell(const io::CsvTable& t, std::size_t row, const std::string& col) {
  const int c = t.column(col);
  EXPECT_GE(c, 0) << "missing column " << col;
  return std::stod(t.rows.at(row).at(static_cast<std::size_t>(c)));
}

std::string nominal_scenario(int frames) {
  std::ostringstream s;
  s << "seed = 5\nframes = " << frames
    << "\nmodel.accel_var = 0.01\nmodel.meas_var = 0.25\nmodel.init_pos_var = 1\n"
       "model.init_vel_var = 1\nvote.lambda = 3\nsensors = 3\n"
       "sensor.1.noise_sigma = 0.5\nsensor.2.noise_sigma = 0.5\nsensor.3.noise_sigma = 0.5\n";
  return s.str();
}

}  // namespace

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, cli::kExitUsage);
  EXPECT_EQ(run("simulate").code, cli::kExitUsage);
  EXPECT_EQ(run("frobnicate").code, cli::kExitUsage);
  EXPECT_EQ(run("--help").code, cli::kExitOk);
}

TEST_F(CliTest, SimulateMissingConfigNamesThePath) {
  const fs::path missing = dir / "no_such.scenario";
  const Outcome r = run("simulate -c " + q(missing) + " -o " + q(dir / "out.csv"));
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find(missing.string()), std::string::npos) << r.err;
}

TEST_F(CliTest, SimulateBadConfigReportsLineAndKey) {
  const fs::path cfg = write("bad.scenario", "seed = 1\nvote.omegaa = 2\n");
  const Outcome r = run("simulate -c " + q(cfg) + " -o " + q(dir / "out.csv"));
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("bad.scenario:2"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("vote.omegaa"), std::string::npos) << r.err;
}

TEST_F(CliTest, SimulateWritesOneRowPerFrame) {
  ASSERT_EQ(run("simulate -c " + q(kScenario) + " -o " + q(dir / "sim.csv")).code, 0);
  const auto t = table(dir / "sim.csv");
  EXPECT_EQ(t.rows.size(), 1000u);
  EXPECT_EQ(t.header.front(), "frame");
  EXPECT_GE(t.column("fused"), 0);
  EXPECT_GE(t.column("rvv_3"), 0);
  EXPECT_TRUE(fs::exists(dir / "sim.summary.csv"));
}

TEST_F(CliTest, SimulateSameSeedIsByteIdentical) {
  ASSERT_EQ(run("simulate -c " + q(kScenario) + " --seed 7 -o " + q(dir / "a.csv")).code, 0);
  ASSERT_EQ(run("simulate -c " + q(kScenario) + " --seed 7 -o " + q(dir / "b.csv")).code, 0);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(slurp(dir / "a.summary.csv"), slurp(dir / "b.summary.csv"));
  ASSERT_EQ(run("simulate -c " + q(kScenario) + " --seed 8 -o " + q(dir / "c.csv")).code, 0);
  EXPECT_NE(slurp(dir / "a.csv"), slurp(dir / "c.csv"));
}

TEST_F(CliTest, SimulateMatchesGoldenRun) {
  const fs::path golden = fs::path(HABDF_GOLDEN_DIR);
  ASSERT_EQ(run("simulate -c " + q(kScenario) + " -o " + q(dir / "fig3.csv")).code, 0);
  EXPECT_EQ(slurp(dir / "fig3.csv"), slurp(golden / "fig3_seed1.csv"));
  EXPECT_EQ(slurp(dir / "fig3.summary.csv"), slurp(golden / "fig3_seed1.summary.csv"));
}

TEST_F(CliTest, FuseIdenticalTracksReproducesTheTrack) {
  std::ostringstream log;
  log << "frame,detector_id,u,v,h,w,valid\n";
  for (int t = 0; t < 60; ++t) {
    for (const char* id : {"a", "b", "c"}) {
      log << t << ',' << id << ',' << 100 + 1.5 * t << ',' << 200 - 0.5 * t << ",60,40,1\n";
    }
  }
  const fs::path tracks = write("same.csv", log.str());
  ASSERT_EQ(run("fuse -t " + q(tracks) + " -o " + q(dir / "fused.csv")).code, 0);
  const auto t = table(dir / "fused.csv");
  ASSERT_EQ(t.rows.size(), 60u);
  // After the filter has locked onto the constant velocity the fused track
  // sits on the input.
  for (std::size_t r = 20; r < t.rows.size(); ++r) {
    const double f = cell(t, r, "frame");
    EXPECT_NEAR(cell(t, r, "u"), 100 + 1.5 * f, 0.05) << "frame " << f;
    EXPECT_NEAR(cell(t, r, "v"), 200 - 0.5 * f, 0.05) << "frame " << f;
    EXPECT_NEAR(cell(t, r, "h"), 60.0, 1e-6);
  }
  EXPECT_TRUE(fs::exists(dir / "fused.weights.csv"));
}

TEST_F(CliTest, FuseFrozenDetectorIsPenalized) {
  ASSERT_EQ(run("fuse -t " + q(kFixtures / "frozen_tracks.csv") + " -o " + q(dir / "fused.csv"))
                .code,
            0);
  const auto w = table(dir / "fused.weights.csv");
  const auto tracks = io::read_tracks(kFixtures / "frozen_tracks.csv");

  // The divergence span is every frame where the frozen detector repeats its
  // previous box.
  std::map<std::int64_t, BoundingBox> frozen;
  for (const auto& r : tracks) {
    if (r.detector_id == "frozen") frozen[r.frame] = r.box;
  }
  std::map<std::string, std::pair<double, int>> acc;
  for (std::size_t i = 0; i < w.rows.size(); ++i) {
    const auto f = static_cast<std::int64_t>(cell(w, i, "frame"));
    if (!frozen.count(f - 1) || !(frozen[f] == frozen[f - 1])) continue;
    if (cell(w, i, "present") == 0.0) continue;
    auto& a = acc[w.rows[i][static_cast<std::size_t>(w.column("detector_id"))]];
    a.first += cell(w, i, "w_d");
    ++a.second;
  }
  ASSERT_EQ(acc.size(), 3u);
  ASSERT_GT(acc["frozen"].second, 50);
  const double frozen_mean = acc["frozen"].first / acc["frozen"].second;
  for (const char* id : {"tracker_a", "tracker_b"}) {
    EXPECT_GT(frozen_mean, acc[id].first / acc[id].second) << id;
  }
}

TEST_F(CliTest, FuseStrongerPenaltyBeatsEveryDetector) {
  ASSERT_EQ(run("fuse -t " + q(kFixtures / "frozen_tracks.csv") + " -c " +
                q(kFixtures / "frozen_strong.cfg") + " -o " + q(dir / "fused.csv"))
                .code,
            0);
  ASSERT_EQ(run("eval -f " + q(dir / "fused.csv") + " -f " + q(kFixtures / "frozen_tracks.csv") +
                " -g " + q(kFixtures / "frozen_gt.csv") + " -o " + q(dir / "eval.csv"))
                .code,
            0);
  const auto s = table(dir / "eval.summary.csv");
  ASSERT_EQ(s.rows.size(), 4u);
  ASSERT_EQ(s.rows[0][0], "fused");
  for (std::size_t r = 1; r < s.rows.size(); ++r) {
    EXPECT_GT(cell(s, 0, "mean_jaccard"), cell(s, r, "mean_jaccard")) << s.rows[r][0];
  }
}

TEST_F(CliTest, FuseRejectsTwoDetectors) {
  const fs::path tracks =
      write("two.csv", "frame,detector_id,u,v,h,w,valid\n0,a,1,1,5,5,1\n0,b,1,1,5,5,1\n");
  const Outcome r = run("fuse -t " + q(tracks) + " -o " + q(dir / "fused.csv"));
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("3 detectors"), std::string::npos) << r.err;
}

TEST_F(CliTest, FuseEmptyFileExitsTwo) {
  const Outcome r = run("fuse -t " + q(write("empty.csv", "")) + " -o " + q(dir / "fused.csv"));
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("empty"), std::string::npos) << r.err;
}

TEST_F(CliTest, FuseMalformedRowNamesItsLine) {
  const fs::path tracks = write(
      "bad.csv", "frame,detector_id,u,v,h,w,valid\n0,a,1,1,5,5,1\n0,b,1,1,5,5,1\n0,c,1,oops,5,5,1\n");
  const Outcome r = run("fuse -t " + q(tracks) + " -o " + q(dir / "fused.csv"));
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("bad.csv:4"), std::string::npos) << r.err;
}

TEST_F(CliTest, EvalIdentityScoresPerfectly) {
  const fs::path gt = kFixtures / "frozen_gt.csv";
  ASSERT_EQ(run("eval -f " + q(gt) + " -g " + q(gt) + " -o " + q(dir / "eval.csv")).code, 0);
  const auto s = table(dir / "eval.summary.csv");
  ASSERT_EQ(s.rows.size(), 1u);
  EXPECT_EQ(cell(s, 0, "success_rate"), 1.0);
  EXPECT_EQ(cell(s, 0, "mean_jaccard"), 1.0);
}

TEST_F(CliTest, EvalShiftedByHundredPixelsFailsEverywhere) {
  const auto gt = table(kFixtures / "frozen_gt.csv");
  std::ostringstream shifted;
  shifted << "frame,u,v,h,w\n";
  for (const auto& row : gt.rows) {
    shifted << row[0] << ',' << std::stod(row[1]) + 100.0 << ',' << row[2] << ',' << row[3] << ','
            << row[4] << '\n';
  }
  const fs::path est = write("shifted.csv", shifted.str());
  ASSERT_EQ(run("eval -f " + q(est) + " -g " + q(kFixtures / "frozen_gt.csv") + " -o " +
                q(dir / "eval.csv"))
                .code,
            0);
  EXPECT_EQ(cell(table(dir / "eval.summary.csv"), 0, "success_rate"), 0.0);
}

TEST_F(CliTest, EvalMixedFixtureMatchesSummarize) {
  ASSERT_EQ(run("eval -f " + q(kFixtures / "frozen_tracks.csv") + " -g " +
                q(kFixtures / "frozen_gt.csv") + " -o " + q(dir / "eval.csv"))
                .code,
            0);
  // Oracle: score the fixture directly with the metrics library.
  const auto gt_table = table(kFixtures / "frozen_gt.csv");
  std::map<std::int64_t, BoundingBox> gt;
  for (const auto& r : gt_table.rows) {
    gt[std::stoll(r[0])] = {std::stod(r[1]), std::stod(r[2]), std::stod(r[3]), std::stod(r[4])};
  }
  std::map<std::string, ApproachRun> runs;
  std::vector<std::string> order;
  for (const auto& rec : io::read_tracks(kFixtures / "frozen_tracks.csv")) {
    if (!runs.count(rec.detector_id)) order.push_back(rec.detector_id);
    auto& run = runs[rec.detector_id];
    run.name = rec.detector_id;
    if (rec.valid) run.evals.push_back(evaluate_frame(rec.box, gt.at(rec.frame), rec.frame));
  }
  std::vector<ApproachRun> ordered;
  for (const auto& id : order) ordered.push_back(runs[id]);
  const auto expected = summarize(ordered);

  const auto s = table(dir / "eval.summary.csv");
  ASSERT_EQ(s.rows.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(s.rows[i][0], expected[i].name);
    EXPECT_EQ(cell(s, i, "frames"), static_cast<double>(expected[i].frames));
    EXPECT_NEAR(cell(s, i, "mean_jaccard"), expected[i].mean_jaccard, 1e-8);
    EXPECT_NEAR(cell(s, i, "mean_dist"), expected[i].mean_dist, 1e-6);
    EXPECT_NEAR(cell(s, i, "success_rate"), expected[i].success_rate, 1e-8);
  }
  EXPECT_GT(expected.back().success_rate, 0.0);
  EXPECT_LT(expected.back().success_rate, 1.0);
}

TEST_F(CliTest, EvalMissingGroundTruthExitsTwo) {
  const Outcome r = run("eval -f " + q(kFixtures / "frozen_gt.csv") + " -g " + q(dir / "nope.csv") +
                    " -o " + q(dir / "eval.csv"));
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("nope.csv"), std::string::npos);
}

TEST_F(CliTest, SweepSingleCellEqualsSimulateSummary) {
  ASSERT_EQ(run("simulate -c " + q(kScenario) + " -o " + q(dir / "sim.csv")).code, 0);
  ASSERT_EQ(run("sweep -c " + q(kScenario) + " -g \"vote.omega=5\" -o " + q(dir / "sweep.csv"))
                .code,
            0);
  const auto sweep = table(dir / "sweep.csv");
  const auto sim = table(dir / "sim.summary.csv");
  ASSERT_EQ(sweep.rows.size(), 1u);
  const auto& srow = sweep.rows[0];
  auto sim_rmse = [&](const std::string& series) {
    for (const auto& r : sim.rows) {
      if (r[0] == series) return r[1];
    }
    return std::string("missing");
  };
  EXPECT_EQ(srow[static_cast<std::size_t>(sweep.column("fused_rmse"))], sim_rmse("fused"));
  for (int i = 1; i <= 3; ++i) {
    const std::string k = std::to_string(i);
    EXPECT_EQ(srow[static_cast<std::size_t>(sweep.column("sensor_rmse_" + k))],
              sim_rmse("sensor_" + k));
    EXPECT_EQ(srow[static_cast<std::size_t>(sweep.column("expert_rmse_" + k))],
              sim_rmse("expert_" + k));
  }
}

TEST_F(CliTest, SweepOverXiLowersMeanPenalty) {
  const fs::path cfg = write("nominal.scenario", nominal_scenario(400));
  ASSERT_EQ(run("sweep -c " + q(cfg) + " -g \"expert.xi=1|2|3|4|6\" -o " + q(dir / "sweep.csv"))
                .code,
            0);
  const auto t = table(dir / "sweep.csv");
  ASSERT_EQ(t.rows.size(), 5u);
  for (int i = 1; i <= 3; ++i) {
    const std::string col = "mean_wM_" + std::to_string(i);
    for (std::size_t r = 1; r < t.rows.size(); ++r) {
      EXPECT_LT(cell(t, r, col), cell(t, r - 1, col)) << col << " row " << r;
    }
  }
}

TEST_F(CliTest, SweepIsReproducible) {
  const fs::path cfg = write("nominal.scenario", nominal_scenario(200));
  const std::string grid = " -g \"vote.lambda=1|5;fusion.delta=1|2\" --seed 3 -o ";
  ASSERT_EQ(run("sweep -c " + q(cfg) + grid + q(dir / "a.csv")).code, 0);
  ASSERT_EQ(run("sweep -c " + q(cfg) + grid + q(dir / "b.csv")).code, 0);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(table(dir / "a.csv").rows.size(), 4u);
}

TEST_F(CliTest, SweepGridFileIsAccepted) {
  const fs::path cfg = write("nominal.scenario", nominal_scenario(100));
  const fs::path grid = write("grid.txt", "# two values\nvote.omega = 1 | 2\n");
  ASSERT_EQ(run("sweep -c " + q(cfg) + " -g " + q(grid) + " -o " + q(dir / "s.csv")).code, 0);
  EXPECT_EQ(table(dir / "s.csv").rows.size(), 2u);
}

TEST_F(CliTest, SweepRejectsOversizedGrid) {
  std::string values;
  for (int i = 1; i <= 101; ++i) values += (i > 1 ? "|" : "") + std::to_string(i);
  const fs::path cfg = write("nominal.scenario", nominal_scenario(10));
  const Outcome r = run("sweep -c " + q(cfg) + " -g \"vote.omega=" + values + ";vote.lambda=" +
                    values + "\" -o " + q(dir / "s.csv"));
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("--force"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "s.csv"));
}

TEST_F(CliTest, SweepUnknownGridKeyIsAConfigError) {
  const fs::path cfg = write("nominal.scenario", nominal_scenario(10));
  const Outcome r = run("sweep -c " + q(cfg) + " -g \"vote.omegaa=1\" -o " + q(dir / "s.csv"));
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("vote.omegaa"), std::string::npos) << r.err;
}

TEST(ParseGrid, InlineSpecification) {
  const auto axes = cli::parse_grid("a.b = 1 | 2 ;c=x");
  ASSERT_EQ(axes.size(), 2u);
  EXPECT_EQ(axes[0].key, "a.b");
  EXPECT_EQ(axes[0].values, (std::vector<std::string>{"1", "2"}));
  EXPECT_EQ(axes[1].values, (std::vector<std::string>{"x"}));
  EXPECT_THROW(cli::parse_grid("a=1;a=2"), io::ConfigError);
  EXPECT_THROW(cli::parse_grid("a=1||2"), io::ConfigError);
  EXPECT_THROW(cli::parse_grid(""), io::ConfigError);
}
