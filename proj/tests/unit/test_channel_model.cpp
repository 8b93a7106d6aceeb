#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "redge/channel_model.hpp"

namespace {

using redge::CMatrix;
using redge::Complex;
using redge::Rng;
using redge::Vector;

oracle::CMat to_oracle(const CMatrix& m) {
  oracle::CMat out = oracle::cmat(static_cast<std::size_t>(m.rows()),
                                  static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  }
  return out;
}

CMatrix random_channels(int k, int l, Rng& rng) {
  redge::StandardNormal normal;
  CMatrix h(k, l);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < l; ++j) h(i, j) = redge::complex_normal(rng, normal, 1.0);
  }
  return h;
}

TEST(SampleChannelPair, ZeroErrorVarianceGivesExactEstimates) {
  Rng rng(1);
  const auto pair = redge::sample_channel_pair(4, 3, 0.0, rng);
  EXPECT_EQ(pair.h_true.rows(), 3);
  EXPECT_EQ(pair.h_true.cols(), 4);
  EXPECT_TRUE(pair.h_true == pair.h_est);
}

TEST(SampleChannelPair, UnitErrorVarianceGivesZeroEstimates) {
  Rng rng(2);
  const auto pair = redge::sample_channel_pair(4, 3, 1.0, rng);
  EXPECT_EQ(pair.h_est.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(pair.h_true.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SampleChannelPair, RejectsInvalidParameters) {
  Rng rng(3);
  EXPECT_THROW(redge::sample_channel_pair(4, 3, -0.01, rng), redge::ParameterError);
  EXPECT_THROW(redge::sample_channel_pair(4, 3, 1.01, rng), redge::ParameterError);
  EXPECT_THROW(redge::sample_channel_pair(0, 3, 0.1, rng), redge::ParameterError);
  EXPECT_THROW(redge::sample_channel_pair(4, 0, 0.1, rng), redge::ParameterError);
}

TEST(SampleChannelPair, MonteCarloMoments) {
  Rng rng(4);
  double err_sq = 0.0, true_sq = 0.0, est_sq = 0.0;
  Complex err_sum = 0.0, true_sum = 0.0;
  long n = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto pair = redge::sample_channel_pair(100, 100, 0.05, rng);
    const CMatrix err = pair.h_true - pair.h_est;
    err_sq += err.squaredNorm();
    true_sq += pair.h_true.squaredNorm();
    est_sq += pair.h_est.squaredNorm();
    err_sum += err.sum();
    true_sum += pair.h_true.sum();
    n += err.size();
  }
  const double dn = static_cast<double>(n);
  ASSERT_EQ(n, 1000000);
  const double var_err = err_sq / dn - std::norm(err_sum / dn);
  const double var_true = true_sq / dn - std::norm(true_sum / dn);
  EXPECT_NEAR(var_err, 0.05, 0.001);
  EXPECT_NEAR(var_true, 1.0, 0.01);
  // Cov(h_est) + Cov(err) = Cov(h_true) within 3 sigma of the estimator; the
  // difference is the cross term 2 Re(h_est conj(err)), variance
  // 4 * (1 - s) * s / 2 per entry.
  const double sigma = std::sqrt(2.0 * 0.95 * 0.05 / dn);
  EXPECT_NEAR(est_sq / dn + err_sq / dn, true_sq / dn, 3.0 * sigma);
}

TEST(Rzf, SingleUserIsMatchedFilter) {
  Rng rng(5);
  const CMatrix h = random_channels(1, 5, rng);
  const auto beams = redge::rzf_beamformers(h, 0.2);
  const Eigen::VectorXcd expected = h.row(0).transpose() / h.row(0).norm();
  EXPECT_LT((beams.v.col(0) - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_DOUBLE_EQ(beams.alpha, 0.2);
}

TEST(Rzf, OrthogonalEqualNormChannels) {
  CMatrix h = CMatrix::Zero(2, 3);
  h(0, 0) = Complex(0.0, 2.0);
  h(1, 2) = Complex(2.0, 0.0);
  const auto beams = redge::rzf_beamformers(h, 0.2);
  for (int k = 0; k < 2; ++k) {
    const Eigen::VectorXcd expected = h.row(k).transpose() / h.row(k).norm();
    EXPECT_LT((beams.v.col(k) - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_LT(std::abs(beams.v.col(0).dot(beams.v.col(1))), 1e-12);
}

TEST(Rzf, MatchesDenseOracle) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix h = random_channels(2, 4, rng);
    const auto beams = redge::rzf_beamformers(h, 0.2);
    const auto v = oracle::rzf(to_oracle(h), 0.2);
    for (int l = 0; l < 4; ++l) {
      for (int k = 0; k < 2; ++k) EXPECT_NEAR(std::abs(beams.v(l, k) - v[l][k]), 0.0, 1e-12);
    }
  }
}

TEST(Rzf, ColumnsAreUnitNorm) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + trial % 6;
    const CMatrix h = random_channels(k, 8, rng);
    const auto beams = redge::rzf_beamformers(h, 0.2);
    for (int j = 0; j < k; ++j) EXPECT_NEAR(beams.v.col(j).norm(), 1.0, 1e-9);
  }
}

TEST(Rzf, ZeroEstimateFallsBackToBasisVector) {
  const CMatrix h = CMatrix::Zero(2, 3);
  const auto beams = redge::rzf_beamformers(h, 0.2);
  EXPECT_EQ(beams.v(0, 0), Complex(1.0, 0.0));
  EXPECT_EQ(beams.v(1, 1), Complex(1.0, 0.0));
  EXPECT_NEAR(beams.v.col(0).norm(), 1.0, 1e-15);
}

TEST(Rzf, RejectsNonPositiveAlpha) {
  Rng rng(8);
  const CMatrix h = random_channels(2, 3, rng);
  EXPECT_THROW(redge::rzf_beamformers(h, 0.0), redge::ParameterError);
}

TEST(Rates, ZeroPowerGivesZeroRate) {
  Rng rng(9);
  const CMatrix h = random_channels(3, 4, rng);
  const auto beams = redge::rzf_beamformers(h, 0.2);
  const Vector r = redge::achievable_rates(h, beams, {1e6, 0.03, Vector::Zero(3)});
  EXPECT_EQ(r.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Rates, UnitSnrGivesBandwidth) {
  CMatrix h(1, 1);
  h(0, 0) = 1.0;
  redge::BeamformingMatrix beams{CMatrix::Ones(1, 1), 0.2};
  const double noise = 0.0316;
  const Vector r = redge::achievable_rates(h, beams, {1e6, noise, Vector::Constant(1, noise)});
  EXPECT_NEAR(r[0], 1e6, 1e-6);
}

TEST(Rates, MatchesScalarOracle) {
  Rng rng(10);
  std::uniform_real_distribution<double> power(0.0, 3000.0);
  for (int trial = 0; trial < 50; ++trial) {
    const CMatrix h = random_channels(3, 4, rng);
    const CMatrix h_est = h + 0.3 * random_channels(3, 4, rng);
    const auto beams = redge::rzf_beamformers(h_est, 0.2);
    Vector p(3);
    for (int k = 0; k < 3; ++k) p[k] = power(rng);
    const Vector r = redge::achievable_rates(h, beams, {1e6, 0.0316, p});
    const auto expected = oracle::rates(to_oracle(h), to_oracle(beams.v),
                                        {p[0], p[1], p[2]}, 1e6, 0.0316);
    for (int k = 0; k < 3; ++k) EXPECT_LT(oracle::relative_error(r[k], expected[k]), 1e-12);
  }
}

TEST(Rates, StrictlyIncreasingInOwnPower) {
  Rng rng(11);
  const CMatrix h = random_channels(3, 4, rng);
  const auto beams = redge::rzf_beamformers(h + 0.2 * random_channels(3, 4, rng), 0.2);
  Vector p = Vector::Constant(3, 100.0);
  const Vector r0 = redge::achievable_rates(h, beams, {1e6, 0.0316, p});
  p[1] *= 1.5;
  const Vector r1 = redge::achievable_rates(h, beams, {1e6, 0.0316, p});
  EXPECT_GT(r1[1], r0[1]);
}

TEST(Rates, InvariantToJointPowerNoiseScaling) {
  Rng rng(12);
  const CMatrix h = random_channels(3, 4, rng);
  const auto beams = redge::rzf_beamformers(h + 0.2 * random_channels(3, 4, rng), 0.2);
  const Vector p = Vector::LinSpaced(3, 10.0, 500.0);
  const Vector r0 = redge::achievable_rates(h, beams, {1e6, 0.0316, p});
  const Vector r1 = redge::achievable_rates(h, beams, {1e6, 0.0316 * 7.0, p * 7.0});
  for (int k = 0; k < 3; ++k) EXPECT_LT(oracle::relative_error(r0[k], r1[k]), 1e-12);
}

TEST(Rates, DimensionMismatchThrows) {
  Rng rng(13);
  const CMatrix h = random_channels(3, 4, rng);
  const auto beams = redge::rzf_beamformers(h, 0.2);
  EXPECT_THROW(redge::achievable_rates(h, beams, {1e6, 0.03, Vector::Ones(2)}),
               redge::StructuralError);
}

}  // namespace
