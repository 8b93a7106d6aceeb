#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "redge/sweep.hpp"

namespace {

namespace fs = std::filesystem;
using redge::ExperimentConfig;
using redge::Scheme;

ExperimentConfig tiny_config() {
  ExperimentConfig c = ExperimentConfig::full_profile();
  c.devices = 2;
  c.antennas = 2;
  c.shape = {1, 8, redge::InputMode::kEffectiveChannels};
  c.training.epochs = 2;
  c.training.minibatches_per_epoch = 2;
  c.training.realizations_per_minibatch = 4;
  c.training.samples = 20;
  c.training.validation_size = 5;
  c.training.test_size = 10;
  c.training.adam.learning_rate = 1e-3;
  c.normalization_draws = 50;
  c.schemes = {Scheme::kNone, Scheme::kJoint};
  c.seeds = {1, 2};
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("redge_sweep_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(SweepCsv, Format) {
  redge::SweepRecord ok{Scheme::kJoint, redge::SweepAxis::kPMaxDbm, 30.0, 3, 200, 0.25, 0.125,
                        0.0625, false};
  redge::SweepRecord bad{Scheme::kNone, redge::SweepAxis::kNone, std::nullopt, 1, 200,
                         std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, true};
  EXPECT_EQ(redge::sweep_csv({ok, bad}),
            "scheme,axis,axis_value,seed,realizations,tgamma_s,comm_s,comp_s,status\n"
            "joint,p_max_dbm,30,3,200,0.25,0.125,0.0625,ok\n"
            "regular,none,,1,200,nan,0,0,diverged\n");
}

TEST(CellHash, SensitiveToResultDeterminingInputsOnly) {
  const ExperimentConfig c = tiny_config();
  const auto h = redge::cell_hash(c, Scheme::kJoint, std::nullopt, 1);
  EXPECT_NE(h, redge::cell_hash(c, Scheme::kNone, std::nullopt, 1));
  EXPECT_NE(h, redge::cell_hash(c, Scheme::kJoint, std::nullopt, 2));
  EXPECT_NE(h, redge::cell_hash(c, Scheme::kJoint, 30.0, 1));
  ExperimentConfig d = c;
  d.training.workers = 4;
  EXPECT_EQ(h, redge::cell_hash(d, Scheme::kJoint, std::nullopt, 1));
  d.seeds = {1, 2, 3, 4};
  d.schemes = {Scheme::kJoint};
  EXPECT_EQ(h, redge::cell_hash(d, Scheme::kJoint, std::nullopt, 1));
  d.sigma_h_sq = 0.02;
  EXPECT_NE(h, redge::cell_hash(d, Scheme::kJoint, std::nullopt, 1));
}

TEST(DecomposeDelays, SingleDeviceSumsExactly) {
  ExperimentConfig c = tiny_config();
  c.devices = 1;
  const auto system = c.system();
  const auto model = redge::build_model(c, system, 1);
  const auto set = redge::build_test_set(c, system);
  const auto d = redge::decompose_delays(model, system, set, c.training.gamma);
  EXPECT_NEAR(d.comm_s + d.comp_s, d.tgamma_s, 1e-12 * d.tgamma_s);
}

TEST(DecomposeDelays, ComputationDominatesAtLowPowerForJointDesk) {
  ExperimentConfig c = ExperimentConfig::full_profile();
  c.apply_desk_profile();
  c.p_max_dbm = 26.0;
  c.training.epochs = 10;
  const fs::path dir = scratch("lowp");
  redge::SweepOptions o;
  o.out_dir = dir;
  o.use_cache = false;
  const auto cell = redge::run_cell(c, Scheme::kJoint, std::nullopt, 1, o);
  ASSERT_FALSE(cell.record.diverged);
  EXPECT_GT(cell.record.comp_s, cell.record.comm_s);
  EXPECT_LE(std::max(cell.record.comm_s, cell.record.comp_s), cell.record.tgamma_s);
  fs::remove_all(dir);
}

TEST(RunSweep, DeterministicCachedAndParallelIndependent) {
  const ExperimentConfig c = tiny_config();
  const fs::path a = scratch("a"), b = scratch("b");
  redge::SweepOptions oa;
  oa.out_dir = a;
  const auto ra = redge::run_sweep(c, oa);
  ASSERT_EQ(ra.records.size(), 4u);
  EXPECT_FALSE(ra.any_diverged);
  EXPECT_EQ(ra.records[0].scheme, Scheme::kNone);
  EXPECT_EQ(ra.records[3].seed, 2u);
  EXPECT_TRUE(fs::exists(a / "reports" / "joint_s2.csv"));

  redge::SweepOptions ob;
  ob.out_dir = b;
  ob.use_cache = false;
  ob.workers = 2;
  redge::run_sweep(c, ob);
  EXPECT_EQ(slurp(a / "sweep.csv"), slurp(b / "sweep.csv"));

  int cached = 0;
  oa.log = [&cached](const std::string& msg) {
    if (msg.find("cached checkpoint") != std::string::npos) ++cached;
  };
  const std::string before = slurp(a / "sweep.csv");
  redge::run_sweep(c, oa);
  EXPECT_EQ(cached, 4);
  EXPECT_EQ(slurp(a / "sweep.csv"), before);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(RunSweep, DivergedCellsAreFlaggedAndOthersContinue) {
  ExperimentConfig c = tiny_config();
  c.seeds = {1};
  c.training.adam.learning_rate = 1e300;
  c.training.epochs = 4;
  const fs::path dir = scratch("div");
  redge::SweepOptions o;
  o.out_dir = dir;
  const auto r = redge::run_sweep(c, o);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_TRUE(r.any_diverged);
  for (const auto& rec : r.records) {
    if (rec.diverged) {
      EXPECT_TRUE(std::isnan(rec.tgamma_s));
    }
  }
  EXPECT_NE(slurp(dir / "sweep.csv").find(",diverged\n"), std::string::npos);
  fs::remove_all(dir);
}

TEST(WriteFileAtomic, ReplacesContents) {
  const fs::path dir = scratch("atomic");
  redge::write_file_atomic(dir / "x.txt", "one");
  redge::write_file_atomic(dir / "x.txt", "two");
  EXPECT_EQ(slurp(dir / "x.txt"), "two");
  EXPECT_FALSE(fs::exists(dir / "x.txt.tmp"));
  fs::remove_all(dir);
}

}  // namespace
