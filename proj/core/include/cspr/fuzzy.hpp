#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace cspr {

enum class MembershipShape { Triangular, Gaussian };

std::string_view to_string(MembershipShape shape) noexcept;
MembershipShape parse_membership_shape(std::string_view name);

/// Percentile levels 100 k / (K + 1), k = 1..K.
std::vector<double> percentile_points(std::size_t num_classes);

/// Linear-interpolation percentile: sort, h = p/100 (n-1), interpolate
/// between floor(h) and ceil(h).
double empirical_percentile(std::span<const double> values, double percent);

/// K fuzzy classes over a continuous target, peaked at target percentiles.
///
/// Class k peaks at P_k. Triangular classes fall linearly to zero at the
/// neighbouring peaks; Gaussian classes use a separate spread on each side so
/// that neighbours cross at the midpoint with membership 0.5. The outer flank
/// of the first and last class is a shoulder (membership 1 beyond the peak).
class FuzzyPartition {
 public:
  static FuzzyPartition build(std::span<const double> train_targets, std::size_t num_classes,
                              MembershipShape shape);

  /// Reassembles a partition from stored peaks; spreads are rederived.
  static FuzzyPartition from_peaks(std::vector<double> peaks, MembershipShape shape);

  MembershipShape shape() const noexcept { return shape_; }
  std::size_t num_classes() const noexcept { return peaks_.size(); }
  const std::vector<double>& peaks() const noexcept { return peaks_; }

  /// Gaussian spreads; the outer flanks hold 0 (shoulders). Empty for triangular.
  const std::vector<double>& left_spreads() const noexcept { return left_spread_; }
  const std::vector<double>& right_spreads() const noexcept { return right_spread_; }

  double membership(std::size_t k, double y) const;
  std::vector<double> memberships(double y) const;

  nlohmann::json to_json() const;
  static FuzzyPartition from_json(const nlohmann::json& doc);

 private:
  FuzzyPartition(std::vector<double> peaks, MembershipShape shape);

  MembershipShape shape_;
  std::vector<double> peaks_;
  std::vector<double> left_spread_;
  std::vector<double> right_spread_;
};

}  // namespace cspr
