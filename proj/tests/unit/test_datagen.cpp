#include <cspr/datagen.hpp>
#include <cspr/spatial_filter.hpp>

#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "test_support.hpp"

namespace {

using cspr::ErrorKind;
using cspr::Matrix;
using cspr::SynthSpec;
using cspr::test::pearson;

SynthSpec small_spec() {
  SynthSpec s;
  s.trials = 200;
  return s;
}

std::vector<double> projected_logvar(const cspr::LabeledTrialSet& d, const Eigen::VectorXd& w) {
  std::vector<double> out;
  for (const auto& x : d.trials) {
    const Eigen::RowVectorXd y = w.transpose() * x;
    out.push_back(std::log((y.array() - y.mean()).square().sum() / static_cast<double>(y.size() - 1)));
  }
  return out;
}

TEST(Datagen, SingleNoiselessSourceGivesRankOneTrials) {
  SynthSpec s;
  s.trials = 5;
  s.sources = 1;
  s.noise_ratio = 0.0;
  const auto w = cspr::generate_trials(s, 3);
  for (const auto& x : w.data.trials) {
    Eigen::JacobiSVD<Matrix> svd(x);
    const auto sv = svd.singularValues();
    EXPECT_LE(sv(1), 1e-10 * sv(0));
  }
}

TEST(Datagen, DeterministicPerSeedAndJobCount) {
  const auto a = cspr::generate_trials(small_spec(), 11, 1);
  const auto b = cspr::generate_trials(small_spec(), 11, 3);
  ASSERT_EQ(a.data.size(), b.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) EXPECT_EQ(a.data.trials[i], b.data.trials[i]);
  EXPECT_EQ(a.data.targets, b.data.targets);
  EXPECT_EQ(a.mixing, b.mixing);
  const auto c = cspr::generate_trials(small_spec(), 12, 1);
  EXPECT_NE(a.data.targets, c.data.targets);
}

TEST(Datagen, ShapesTargetsAndMixing) {
  const auto w = cspr::generate_trials(small_spec(), 13);
  EXPECT_EQ(w.data.channels(), 16u);
  EXPECT_EQ(w.data.samples(), 768u);
  EXPECT_EQ(w.data.size(), 200u);
  for (double y : w.data.targets) EXPECT_GT(y, 0.0);
  EXPECT_TRUE((w.mixing.transpose() * w.mixing).isApprox(Matrix::Identity(3, 3), 1e-12));
  // Target source spread evenly over the channels.
  for (Eigen::Index c = 0; c < 16; ++c) EXPECT_NEAR(std::abs(w.mixing(c, 0)), 0.25, 1e-12);
  w.data.validate();
}

TEST(Datagen, TargetIsMonotoneInSourceLogVariance) {
  const auto w = cspr::generate_trials(small_spec(), 14);
  EXPECT_NEAR(pearson(w.data.targets, w.source_logvar), 1.0, 1e-12);
}

TEST(Datagen, OracleUnmixingTracksTarget) {
  const auto w = cspr::generate_trials(small_spec(), 15);
  // Row of the pseudo-inverse isolates source 1.
  const Eigen::VectorXd unmix = w.mixing.col(0);
  EXPECT_GT(pearson(projected_logvar(w.data, unmix), w.data.targets), 0.99);
}

TEST(Datagen, FittedFilterApproachesOracleWithoutNoise) {
  auto s = small_spec();
  s.noise_ratio = 0.0;
  const auto w = cspr::generate_trials(s, 16);
  const double oracle = pearson(projected_logvar(w.data, w.mixing.col(0)), w.data.targets);
  for (auto mode : {cspr::CovarianceMode::MeanTrial, cspr::CovarianceMode::WeightedCov}) {
    cspr::CsprOptions opt;
    opt.filters_per_class = 4;
    opt.mode = mode;
    const auto bank = cspr::fit_cspr(w.data, opt);
    const double fitted = pearson(projected_logvar(w.data, bank.weights().col(8)), w.data.targets);
    EXPECT_GE(fitted, oracle - 0.05) << cspr::to_string(mode);
  }
}

TEST(Datagen, FilteredSourceBeatsBestRawChannel) {
  const auto w = cspr::generate_trials(small_spec(), 17);
  cspr::CsprOptions opt;
  opt.filters_per_class = 4;
  const auto bank = cspr::fit_cspr(w.data, opt);
  const double filtered = pearson(projected_logvar(w.data, bank.weights().col(8)), w.data.targets);
  double best_raw = 0.0;
  for (Eigen::Index c = 0; c < 16; ++c) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(16);
    e(c) = 1.0;
    best_raw = std::max(best_raw, std::abs(pearson(projected_logvar(w.data, e), w.data.targets)));
  }
  EXPECT_GE(filtered, best_raw + 0.1);
}

TEST(Datagen, InvalidSpecs) {
  SynthSpec s;
  s.sources = 17;
  EXPECT_CSPR_ERROR(cspr::generate_trials(s, 0), ErrorKind::InvalidArgument);
  s = SynthSpec{};
  s.distractor_gain = -1.0;
  EXPECT_CSPR_ERROR(cspr::generate_trials(s, 0), ErrorKind::InvalidArgument);
  s = SynthSpec{};
  s.target_slope = 5.0;
  EXPECT_CSPR_ERROR(s.validate(), ErrorKind::InvalidArgument);
}

TEST(Datagen, SpecJsonRoundTrip) {
  SynthSpec s;
  s.channels = 9;
  s.distractor_gain = 1.5;
  s.bandpass = false;
  const auto back = SynthSpec::from_json(s.to_json());
  EXPECT_EQ(back.to_json(), s.to_json());
}

TEST(Datagen, SessionEventsFollowGapRule) {
  SynthSpec s;
  s.channels = 4;
  s.session_duration_s = 300.0;
  const auto sess = cspr::generate_session(s, 21, "p01");
  sess.session.validate();
  EXPECT_EQ(sess.session.subject_id, "p01");
  EXPECT_EQ(sess.session.eeg.rows(), 4);
  EXPECT_EQ(sess.session.eeg.cols(), 300 * 256);
  ASSERT_GT(sess.session.events.size(), 20u);
  for (std::size_t i = 1; i < sess.session.events.size(); ++i) {
    const double gap = sess.session.events[i].onset_s - sess.session.events[i - 1].onset_s;
    EXPECT_GE(gap, 2.0 - 1e-12);
    EXPECT_LE(gap, 10.0 + 1e-12);
  }
  for (const auto& e : sess.session.events) EXPECT_GT(e.rt_s, 0.0);
  EXPECT_EQ(sess.response_speeds.size(), sess.session.events.size());
}

TEST(BandLimitedNoise, UnitVarianceAndConfinedSpectrum) {
  const auto x = cspr::band_limited_noise(2048, 256.0, 4.0, 13.0, 5, 0);
  double mean = 0.0;
  for (double v : x) mean += v / 2048.0;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean) / 2047.0;
  EXPECT_NEAR(var, 1.0, 1e-12);

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, x);
  double inside = 0.0;
  double outside = 0.0;
  for (std::size_t k = 1; k <= 1024; ++k) {
    const double f = 256.0 * static_cast<double>(k) / 2048.0;
    (f >= 4.0 && f <= 13.0 ? inside : outside) += std::norm(spec[k]);
  }
  EXPECT_LE(outside, 1e-6 * inside);
}

TEST(PlantedMixing, OrthonormalWithEqualMagnitudeFirstColumn) {
  const Matrix a = cspr::planted_mixing(9, 4, 3);
  EXPECT_TRUE((a.transpose() * a).isApprox(Matrix::Identity(4, 4), 1e-12));
  for (Eigen::Index c = 0; c < 9; ++c) EXPECT_NEAR(std::abs(a(c, 0)), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(a, cspr::planted_mixing(9, 4, 3));
}

}  // namespace
