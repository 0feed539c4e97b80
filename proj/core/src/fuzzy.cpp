#include "cspr/fuzzy.hpp"

#include "cspr/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace cspr {

namespace {

// Distance from the peak at which exp(-d^2 / (2 sigma^2)) = 0.5 is
// sigma * sqrt(2 ln 2); adjacent classes meet at half the peak gap.
const double kHalfWidthFactor = 2.0 * std::sqrt(2.0 * std::numbers::ln2);

}  // namespace

std::string_view to_string(MembershipShape shape) noexcept {
  return shape == MembershipShape::Gaussian ? "gaussian" : "triangular";
}

MembershipShape parse_membership_shape(std::string_view name) {
  if (name == "triangular") return MembershipShape::Triangular;
  if (name == "gaussian") return MembershipShape::Gaussian;
  fail(ErrorKind::InvalidArgument, "unknown membership shape '" + std::string(name) + "'");
}

std::vector<double> percentile_points(std::size_t num_classes) {
  require(num_classes >= 2, ErrorKind::InvalidArgument,
          "percentile_points: need K >= 2, got " + std::to_string(num_classes));
  std::vector<double> points(num_classes);
  for (std::size_t k = 1; k <= num_classes; ++k) {
    points[k - 1] = 100.0 * static_cast<double>(k) / static_cast<double>(num_classes + 1);
  }
  return points;
}

double empirical_percentile(std::span<const double> values, double percent) {
  require(!values.empty(), ErrorKind::Degenerate, "empirical_percentile: empty input");
  require(percent >= 0.0 && percent <= 100.0, ErrorKind::InvalidArgument,
          "empirical_percentile: percentile must lie in [0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = percent / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

FuzzyPartition::FuzzyPartition(std::vector<double> peaks, MembershipShape shape)
    : shape_(shape), peaks_(std::move(peaks)) {
  require(peaks_.size() >= 2, ErrorKind::InvalidArgument, "fuzzy partition needs K >= 2");
  for (std::size_t k = 0; k < peaks_.size(); ++k) {
    require(std::isfinite(peaks_[k]), ErrorKind::InvalidArgument, "fuzzy partition: non-finite peak");
    if (k > 0 && !(peaks_[k] > peaks_[k - 1])) {
      fail(ErrorKind::Degenerate, "fuzzy partition: percentile points " + std::to_string(k) + " and " +
                                      std::to_string(k + 1) + " coincide (too many tied targets)");
    }
  }
  if (shape_ == MembershipShape::Gaussian) {
    const auto n = peaks_.size();
    left_spread_.assign(n, 0.0);
    right_spread_.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0) left_spread_[k] = (peaks_[k] - peaks_[k - 1]) / kHalfWidthFactor;
      if (k + 1 < n) right_spread_[k] = (peaks_[k + 1] - peaks_[k]) / kHalfWidthFactor;
    }
  }
}

FuzzyPartition FuzzyPartition::build(std::span<const double> train_targets, std::size_t num_classes,
                                     MembershipShape shape) {
  const auto levels = percentile_points(num_classes);
  require(train_targets.size() >= num_classes, ErrorKind::Degenerate,
          "fuzzy partition: fewer targets than classes");
  std::vector<double> peaks;
  peaks.reserve(levels.size());
  for (double p : levels) peaks.push_back(empirical_percentile(train_targets, p));
  return FuzzyPartition(std::move(peaks), shape);
}

FuzzyPartition FuzzyPartition::from_peaks(std::vector<double> peaks, MembershipShape shape) {
  return FuzzyPartition(std::move(peaks), shape);
}

double FuzzyPartition::membership(std::size_t k, double y) const {
  const auto n = peaks_.size();
  require(k < n, ErrorKind::InvalidArgument, "membership: class index out of range");
  const double peak = peaks_[k];
  const bool first = k == 0;
  const bool last = k + 1 == n;

  if (y == peak) return 1.0;
  if (y < peak) {
    if (first) return 1.0;
    if (shape_ == MembershipShape::Triangular) {
      const double foot = peaks_[k - 1];
      return y <= foot ? 0.0 : (y - foot) / (peak - foot);
    }
    const double z = (y - peak) / left_spread_[k];
    return std::exp(-0.5 * z * z);
  }
  if (last) return 1.0;
  if (shape_ == MembershipShape::Triangular) {
    const double foot = peaks_[k + 1];
    return y >= foot ? 0.0 : (foot - y) / (foot - peak);
  }
  const double z = (y - peak) / right_spread_[k];
  return std::exp(-0.5 * z * z);
}

std::vector<double> FuzzyPartition::memberships(double y) const {
  std::vector<double> mu(peaks_.size());
  for (std::size_t k = 0; k < mu.size(); ++k) mu[k] = membership(k, y);
  return mu;
}

nlohmann::json FuzzyPartition::to_json() const {
  nlohmann::json doc;
  doc["shape"] = std::string(to_string(shape_));
  doc["K"] = peaks_.size();
  doc["peaks"] = peaks_;
  if (shape_ == MembershipShape::Gaussian) {
    doc["left_spreads"] = left_spread_;
    doc["right_spreads"] = right_spread_;
  }
  return doc;
}

FuzzyPartition FuzzyPartition::from_json(const nlohmann::json& doc) {
  try {
    auto shape = parse_membership_shape(doc.at("shape").get<std::string>());
    auto peaks = doc.at("peaks").get<std::vector<double>>();
    if (doc.contains("K") && doc.at("K").get<std::size_t>() != peaks.size()) {
      fail(ErrorKind::Format, "fuzzy partition: K does not match the number of peaks");
    }
    return FuzzyPartition(std::move(peaks), shape);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("fuzzy partition: ") + e.what());
  } catch (const Error& e) {
    // A stored partition that does not validate is a bad file, not a bad argument.
    if (e.kind() == ErrorKind::Format) throw;
    fail(ErrorKind::Format, e.what());
  }
}

}  // namespace cspr
