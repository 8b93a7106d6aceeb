#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "redge/experiment_config.hpp"

namespace {

using redge::ExperimentConfig;
using redge::Scheme;
using redge::SweepAxis;

TEST(FullProfile, TableValues) {
  const ExperimentConfig c = ExperimentConfig::full_profile();
  EXPECT_EQ(c.antennas, 8);
  EXPECT_EQ(c.devices, 6);
  EXPECT_EQ(c.shape.hidden_depth, 10);
  EXPECT_EQ(c.shape.hidden_width, 400);
  EXPECT_EQ(c.training.epochs, 500);
  EXPECT_EQ(c.training.minibatches_per_epoch, 50);
  EXPECT_EQ(c.training.realizations_per_minibatch, 1000);
  EXPECT_EQ(c.training.samples, 1000);
  EXPECT_EQ(c.training.gamma, 0.05);
  EXPECT_EQ(c.training.adam.learning_rate, 1e-4);
  const auto s = c.system();
  EXPECT_NEAR(s.p_max_mw, 6309.573444801933, 1e-9);
  EXPECT_NEAR(s.noise_power_mw(), 0.0316227766, 1e-10);
  EXPECT_EQ(s.cpu.f_max, 4.6e9);
  EXPECT_EQ(s.omega_mean(), 400.0);
  EXPECT_NO_THROW(c.validate());
}

TEST(DeskProfile, OverridesSizesOnly) {
  ExperimentConfig c = ExperimentConfig::full_profile();
  c.apply_desk_profile();
  EXPECT_TRUE(c.desk_scale);
  EXPECT_EQ(c.devices, 4);
  EXPECT_EQ(c.antennas, 6);
  EXPECT_EQ(c.shape.hidden_depth, 4);
  EXPECT_EQ(c.shape.hidden_width, 128);
  EXPECT_EQ(c.training.samples, 200);
  EXPECT_EQ(c.p_max_dbm, 38.0);
  EXPECT_EQ(c.sigma_h_sq, 0.05);
}

TEST(Parse, DeskFlagThenExplicitOverrides) {
  const auto c = redge::parse_experiment_config(
      "[sweep]\ndesk_scale = true\nseeds = 1, 2,3\n[training]\nepochs = 7\n");
  EXPECT_EQ(c.devices, 4);
  EXPECT_EQ(c.training.epochs, 7);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
}

TEST(Parse, SweepAxisAndGrid) {
  const auto c = redge::parse_experiment_config(
      "[sweep]\naxis = p_max_dbm\nvalues = 26, 30, 34, 38\nschemes = regular, joint\n");
  EXPECT_EQ(c.axis, SweepAxis::kPMaxDbm);
  EXPECT_EQ(c.schemes, (std::vector<Scheme>{Scheme::kNone, Scheme::kJoint}));
  const auto points = c.grid_points();
  ASSERT_EQ(points.size(), 4u);
  EXPECT_EQ(*points[1], 30.0);
  EXPECT_NEAR(c.system(points[0]).p_max_mw, std::pow(10.0, 2.6), 1e-9);
  EXPECT_EQ(c.system(points[0]).sigma_h_sq, c.sigma_h_sq);

  const auto h = redge::parse_experiment_config("[sweep]\naxis = sigma_h_sq\nvalues = 0.02\n");
  EXPECT_EQ(h.system(h.grid_points()[0]).sigma_h_sq, 0.02);
  const auto w = redge::parse_experiment_config("[sweep]\naxis = sigma_w_sq\nvalues = 25600\n");
  EXPECT_EQ(w.system(w.grid_points()[0]).sigma_w_sq, 25600.0);
}

TEST(Parse, NoAxisGivesSingleEmptyPoint) {
  const auto c = redge::parse_experiment_config("");
  const auto points = c.grid_points();
  ASSERT_EQ(points.size(), 1u);
  EXPECT_FALSE(points[0].has_value());
}

TEST(Parse, RejectsUnknownOrMalformedInput) {
  EXPECT_THROW(redge::parse_experiment_config("[system]\nantenas = 4\n"), redge::ParameterError);
  EXPECT_THROW(redge::parse_experiment_config("[system]\nantennas = four\n"),
               redge::ParameterError);
  EXPECT_THROW(redge::parse_experiment_config("[system]\nantennas = 4.5\n"),
               redge::ParameterError);
  EXPECT_THROW(redge::parse_experiment_config("[sweep]\naxis = bandwidth\n"),
               redge::ParameterError);
  EXPECT_THROW(redge::parse_experiment_config("[sweep]\nschemes = joint, hybrid\n"),
               redge::ParameterError);
  EXPECT_THROW(redge::parse_experiment_config("[sweep]\ndesk_scale = maybe\n"),
               redge::ParameterError);
  EXPECT_THROW(redge::parse_experiment_config("[model]\ninput_mode = polar\n"),
               redge::ParameterError);
  EXPECT_THROW(redge::parse_experiment_config("antennas = 4\n"), redge::ParameterError);
  EXPECT_THROW(redge::parse_experiment_config("[system\n"), redge::ParameterError);
}

TEST(Validate, RejectsInconsistentSweeps) {
  ExperimentConfig c = ExperimentConfig::full_profile();
  c.axis = SweepAxis::kSigmaHSq;
  EXPECT_THROW(c.validate(), redge::ParameterError);
  c.grid = {0.02};
  EXPECT_NO_THROW(c.validate());
  c.seeds.clear();
  EXPECT_THROW(c.validate(), redge::ParameterError);
  c.seeds = {1};
  c.schemes.clear();
  EXPECT_THROW(c.validate(), redge::ParameterError);
}

TEST(ToIni, RoundTripsExactly) {
  ExperimentConfig c = ExperimentConfig::full_profile();
  c.apply_desk_profile();
  c.axis = SweepAxis::kSigmaWSq;
  c.grid = {0.1, 1.0 / 3.0, 25600.0};
  c.sigma_h_sq = 0.035;
  c.cpu_tau = 1.2345678901234567e-28;
  c.seeds = {5, 18446744073709551615ull};
  c.schemes = {Scheme::kCompOnly, Scheme::kCommOnly};
  c.shape.input_mode = redge::InputMode::kRawChannels;
  const std::string text = c.to_ini();
  const auto back = redge::parse_experiment_config(text);
  EXPECT_EQ(back.to_ini(), text);
  EXPECT_EQ(back.grid, c.grid);
  EXPECT_EQ(back.cpu_tau, c.cpu_tau);
  EXPECT_EQ(back.seeds, c.seeds);
  EXPECT_EQ(back.schemes, c.schemes);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(redge::format_double(0.1), "0.1");
  EXPECT_EQ(redge::format_double(38.0), "38");
  EXPECT_EQ(redge::format_double(std::nan("")), "nan");
  for (double v : {1.0 / 3.0, 6309.573444801933, 1e-28, -2.5e300}) {
    EXPECT_EQ(std::stod(redge::format_double(v)), v);
  }
}

TEST(Fnv1a64, KnownVectors) {
  EXPECT_EQ(redge::fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(redge::fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(redge::fnv1a64("foobar"), 0x85944171f73967e8ull);
}

TEST(ShippedConfigs, LoadAndValidate) {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(REDGE_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    SCOPED_TRACE(entry.path().string());
    EXPECT_NO_THROW(redge::load_experiment_config(entry.path()).validate());
    ++count;
  }
  EXPECT_GE(count, 7);

  const std::filesystem::path dir(REDGE_CONFIG_DIR);
  const auto full = redge::load_experiment_config(dir / "table1.ini");
  EXPECT_EQ(full.to_ini(), ExperimentConfig::full_profile().to_ini());
  const auto power = redge::load_experiment_config(dir / "sweep_power.ini");
  EXPECT_TRUE(power.desk_scale);
  EXPECT_EQ(power.devices, 4);
  EXPECT_EQ(power.axis, SweepAxis::kPMaxDbm);
  EXPECT_EQ(power.grid, (std::vector<double>{26, 30, 34, 38}));
  const auto intensity = redge::load_experiment_config(dir / "sweep_intensity_error.ini");
  EXPECT_EQ(intensity.sigma_h_sq, 0.035);
  EXPECT_EQ(redge::load_experiment_config(dir / "oracle_single.ini").devices, 1);
}

}  // namespace
