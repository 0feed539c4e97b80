#pragma once

#include "cspr/linalg.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace cspr {

/// Epoched EEG trials (channels x samples, all the same shape) with one
/// continuous target per trial.
struct LabeledTrialSet {
  std::vector<Matrix> trials;
  std::vector<double> targets;
  double sample_rate_hz = 256.0;

  std::size_t size() const noexcept { return trials.size(); }
  std::size_t channels() const noexcept { return trials.empty() ? 0 : static_cast<std::size_t>(trials.front().rows()); }
  std::size_t samples() const noexcept { return trials.empty() ? 0 : static_cast<std::size_t>(trials.front().cols()); }

  /// Throws Dimension on ragged trials or a target count mismatch, and
  /// InvalidArgument on non-finite values.
  void validate() const;

  LabeledTrialSet subset(std::span<const std::size_t> indices) const;
};

}  // namespace cspr
