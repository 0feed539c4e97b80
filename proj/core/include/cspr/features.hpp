#pragma once

#include "cspr/linalg.hpp"
#include "cspr/spatial_filter.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cspr {

struct FrequencyBand {
  std::string name;
  double low_hz;
  double high_hz;
};

/// Spatial transform applied before band-power extraction.
enum class FeatureMode { Raw, Car, Filtered };

std::string_view to_string(FeatureMode mode) noexcept;

struct BandPowerOptions {
  double sample_rate_hz = 256.0;
  double segment_seconds = 1.0;
  double overlap_fraction = 0.5;
  std::vector<FrequencyBand> bands = {{"theta", 4.0, 8.0}, {"alpha", 8.0, 13.0}};

  std::size_t segment_len() const;
};

/// N x d dB band powers. Columns are ordered channel-major: every band of
/// output channel 0, then every band of channel 1, and so on.
struct FeatureMatrix {
  Matrix values;
  std::vector<std::string> labels;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

/// dB band powers of every row of one (already spatially filtered) trial.
std::vector<double> band_power_features(const Matrix& signals, const BandPowerOptions& options);

/// Applies the spatial transform to each trial, then extracts band powers.
/// `bank` is required for FeatureMode::Filtered and ignored otherwise.
FeatureMatrix extract_features(std::span<const Matrix> trials, FeatureMode mode,
                               const BandPowerOptions& options, const FilterBank* bank = nullptr,
                               std::size_t jobs = 1);

/// Header row of labels plus `target`; values with 17 significant digits.
void write_feature_csv(std::ostream& out, const FeatureMatrix& features, std::span<const double> targets);

/// Parses a CSV written by write_feature_csv. Returns the targets column.
std::vector<double> read_feature_csv(std::istream& in, FeatureMatrix& features);

/// 17 significant digits, enough for any double to round-trip.
std::string format_double(double value);

}  // namespace cspr
