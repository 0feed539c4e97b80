#include <cspr/dsp.hpp>
#include <cspr/features.hpp>

#include <gtest/gtest.h>

#include <sstream>
#include <vector>

#include "test_support.hpp"

namespace {

using cspr::BandPowerOptions;
using cspr::ErrorKind;
using cspr::FeatureMode;
using cspr::Matrix;

std::vector<Matrix> noise_trials(std::size_t n, Eigen::Index c, std::uint64_t seed) {
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(cspr::test::random_matrix(c, 768, seed + i));
  return out;
}

TEST(Features, RawColumnCountAndLabels) {
  const auto trials = noise_trials(3, 62, 1);
  const auto fm = cspr::extract_features(trials, FeatureMode::Raw, BandPowerOptions{});
  EXPECT_EQ(fm.rows(), 3u);
  EXPECT_EQ(fm.cols(), 124u);
  ASSERT_EQ(fm.labels.size(), 124u);
  EXPECT_EQ(fm.labels[0], "ch1_theta");
  EXPECT_EQ(fm.labels[1], "ch1_alpha");
  EXPECT_EQ(fm.labels[123], "ch62_alpha");
}

TEST(Features, FilteredColumnCount) {
  cspr::LabeledTrialSet data;
  data.trials = noise_trials(30, 62, 2);
  for (std::size_t i = 0; i < 30; ++i) {
    data.trials[i].topRows(5) *= 1.0 + 0.1 * static_cast<double>(i);
    data.targets.push_back(static_cast<double>(i));
  }
  cspr::CsprOptions opt;
  const auto bank = cspr::fit_cspr(data, opt);
  const auto fm = cspr::extract_features(data.trials, FeatureMode::Filtered, BandPowerOptions{}, &bank);
  EXPECT_EQ(fm.cols(), 126u);
  EXPECT_EQ(fm.labels[0], "k1f1_theta");
  EXPECT_EQ(fm.labels[125], "k3f21_alpha");
  EXPECT_CSPR_ERROR(cspr::extract_features(data.trials, FeatureMode::Filtered, BandPowerOptions{}),
                    ErrorKind::InvalidArgument);
}

TEST(Features, MatchesPerChannelBandPower) {
  const auto trials = noise_trials(2, 3, 3);
  const auto fm = cspr::extract_features(trials, FeatureMode::Raw, BandPowerOptions{});
  for (Eigen::Index c = 0; c < 3; ++c) {
    std::vector<double> x(768);
    for (int t = 0; t < 768; ++t) x[static_cast<std::size_t>(t)] = trials[1](c, t);
    const auto psd = cspr::welch_psd(x, 256.0, 256, 0.5);
    EXPECT_DOUBLE_EQ(fm.values(1, 2 * c), cspr::band_power_db(psd, 4.0, 8.0));
    EXPECT_DOUBLE_EQ(fm.values(1, 2 * c + 1), cspr::band_power_db(psd, 8.0, 13.0));
  }
}

TEST(Features, CarModeEqualsRawOfReferencedTrials) {
  const auto trials = noise_trials(3, 5, 4);
  std::vector<Matrix> referenced;
  for (const auto& t : trials) referenced.push_back(cspr::car_filter(t));
  const auto a = cspr::extract_features(trials, FeatureMode::Car, BandPowerOptions{});
  const auto b = cspr::extract_features(referenced, FeatureMode::Raw, BandPowerOptions{});
  EXPECT_EQ(a.values, b.values);
}

TEST(Features, DuplicateTrialsGiveIdenticalRows) {
  auto trials = noise_trials(2, 4, 5);
  trials.push_back(trials[0]);
  const auto fm = cspr::extract_features(trials, FeatureMode::Raw, BandPowerOptions{});
  EXPECT_EQ(fm.values.row(0), fm.values.row(2));
}

TEST(Features, TrialOrderPermutesRows) {
  const auto trials = noise_trials(4, 3, 6);
  const std::vector<Matrix> reversed(trials.rbegin(), trials.rend());
  const auto a = cspr::extract_features(trials, FeatureMode::Raw, BandPowerOptions{});
  const auto b = cspr::extract_features(reversed, FeatureMode::Raw, BandPowerOptions{}, nullptr, 3);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ(a.values.row(i), b.values.row(3 - i));
}

TEST(Features, RaggedTrialsThrow) {
  auto trials = noise_trials(2, 3, 7);
  trials.push_back(cspr::test::random_matrix(4, 768, 8));
  EXPECT_CSPR_ERROR(cspr::extract_features(trials, FeatureMode::Raw, BandPowerOptions{}), ErrorKind::Dimension);
}

TEST(FeatureCsv, RoundTripIsExact) {
  const auto fm = cspr::extract_features(noise_trials(3, 2, 9), FeatureMode::Raw, BandPowerOptions{});
  const std::vector<double> targets{0.1, 1.0 / 3.0, 2.5e-7};
  std::stringstream ss;
  cspr::write_feature_csv(ss, fm, targets);
  std::string header;
  std::getline(std::stringstream(ss.str()), header);
  EXPECT_EQ(header, "ch1_theta,ch1_alpha,ch2_theta,ch2_alpha,target");

  cspr::FeatureMatrix back;
  const auto back_targets = cspr::read_feature_csv(ss, back);
  EXPECT_EQ(back.values, fm.values);
  EXPECT_EQ(back.labels, fm.labels);
  EXPECT_EQ(back_targets, targets);
}

TEST(FeatureCsv, MalformedInputIsFormatError) {
  cspr::FeatureMatrix fm;
  std::stringstream no_target("a,b\n1,2\n");
  EXPECT_CSPR_ERROR(cspr::read_feature_csv(no_target, fm), ErrorKind::Format);
  std::stringstream ragged("a,target\n1,2,3\n");
  EXPECT_CSPR_ERROR(cspr::read_feature_csv(ragged, fm), ErrorKind::Format);
  std::stringstream bad_number("a,target\n1,x\n");
  EXPECT_CSPR_ERROR(cspr::read_feature_csv(bad_number, fm), ErrorKind::Format);
}

}  // namespace
