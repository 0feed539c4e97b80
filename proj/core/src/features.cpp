#include "cspr/features.hpp"

#include "cspr/dsp.hpp"
#include "cspr/error.hpp"
#include "cspr/parallel.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace cspr {

std::string_view to_string(FeatureMode mode) noexcept {
  switch (mode) {
    case FeatureMode::Raw: return "raw";
    case FeatureMode::Car: return "car";
    case FeatureMode::Filtered: return "filtered";
  }
  return "raw";
}

std::size_t BandPowerOptions::segment_len() const {
  const auto len = static_cast<std::size_t>(std::llround(segment_seconds * sample_rate_hz));
  require(len >= 2, ErrorKind::InvalidArgument, "band power: Welch segment is shorter than 2 samples");
  return len;
}

std::vector<double> band_power_features(const Matrix& signals, const BandPowerOptions& options) {
  require(!options.bands.empty(), ErrorKind::InvalidArgument, "band power: no bands configured");
  const auto seg = options.segment_len();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(signals.rows()) * options.bands.size());
  std::vector<double> row(static_cast<std::size_t>(signals.cols()));
  for (Eigen::Index c = 0; c < signals.rows(); ++c) {
    for (Eigen::Index s = 0; s < signals.cols(); ++s) row[static_cast<std::size_t>(s)] = signals(c, s);
    const auto psd = welch_psd(row, options.sample_rate_hz, seg, options.overlap_fraction);
    for (const auto& band : options.bands) out.push_back(band_power_db(psd, band.low_hz, band.high_hz));
  }
  return out;
}

FeatureMatrix extract_features(std::span<const Matrix> trials, FeatureMode mode,
                               const BandPowerOptions& options, const FilterBank* bank, std::size_t jobs) {
  require(!trials.empty(), ErrorKind::Degenerate, "extract_features: no trials");
  require(mode != FeatureMode::Filtered || bank != nullptr, ErrorKind::InvalidArgument,
          "extract_features: filtered mode needs a fitted filter bank");
  const auto c = trials.front().rows();
  const auto s = trials.front().cols();
  for (const auto& t : trials) {
    require(t.rows() == c && t.cols() == s, ErrorKind::Dimension, "extract_features: trials differ in shape");
  }

  const std::size_t outputs = mode == FeatureMode::Filtered ? bank->outputs() : static_cast<std::size_t>(c);
  const std::size_t width = outputs * options.bands.size();

  FeatureMatrix fm;
  fm.values.resize(static_cast<Eigen::Index>(trials.size()), static_cast<Eigen::Index>(width));
  fm.labels.reserve(width);
  const std::size_t per_class = mode == FeatureMode::Filtered ? bank->filters_per_class() : 0;
  for (std::size_t o = 0; o < outputs; ++o) {
    std::string stem;
    if (mode == FeatureMode::Filtered) {
      stem = "k" + std::to_string(o / per_class + 1) + "f" + std::to_string(o % per_class + 1);
    } else {
      stem = "ch" + std::to_string(o + 1);
    }
    for (const auto& band : options.bands) fm.labels.push_back(stem + "_" + band.name);
  }

  parallel_for(trials.size(), jobs, [&](std::size_t n) {
    std::vector<double> row;
    switch (mode) {
      case FeatureMode::Raw: row = band_power_features(trials[n], options); break;
      case FeatureMode::Car: row = band_power_features(car_filter(trials[n]), options); break;
      case FeatureMode::Filtered: row = band_power_features(bank->apply(trials[n]), options); break;
    }
    for (std::size_t j = 0; j < width; ++j) fm.values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) = row[j];
  });
  return fm;
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& features, std::span<const double> targets) {
  require(targets.size() == features.rows(), ErrorKind::Dimension,
          "write_feature_csv: target count differs from feature rows");
  for (const auto& label : features.labels) out << label << ',';
  out << "target\n";
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t j = 0; j < features.cols(); ++j) {
      out << format_double(features.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << ',';
    }
    out << format_double(targets[i]) << '\n';
  }
}

std::vector<double> read_feature_csv(std::istream& in, FeatureMatrix& features) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };

  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Format, "feature CSV: missing header");
  auto header = split(line);
  if (header.empty() || header.back() != "target") fail(ErrorKind::Format, "feature CSV: last column must be 'target'");
  header.pop_back();

  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size() + 1) fail(ErrorKind::Format, "feature CSV: ragged row");
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto& cell = cells[j];
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), row[j]);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        fail(ErrorKind::Format, "feature CSV: bad number '" + cell + "'");
      }
    }
    targets.push_back(row.back());
    row.pop_back();
    rows.push_back(std::move(row));
  }

  features.labels = std::move(header);
  features.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(features.labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      features.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return targets;
}

}  // namespace cspr
