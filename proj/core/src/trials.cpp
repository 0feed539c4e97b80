#include "cspr/trials.hpp"

#include "cspr/error.hpp"

#include <cmath>
#include <string>

namespace cspr {

void LabeledTrialSet::validate() const {
  require(trials.size() == targets.size(), ErrorKind::Dimension,
          "trial set: " + std::to_string(trials.size()) + " trials but " +
              std::to_string(targets.size()) + " targets");
  require(sample_rate_hz > 0.0 && std::isfinite(sample_rate_hz), ErrorKind::InvalidArgument,
          "trial set: sample rate must be positive");
  if (trials.empty()) return;
  const auto c = trials.front().rows();
  const auto s = trials.front().cols();
  require(c >= 1 && s >= 1, ErrorKind::Dimension, "trial set: empty trial");
  for (std::size_t n = 0; n < trials.size(); ++n) {
    require(trials[n].rows() == c && trials[n].cols() == s, ErrorKind::Dimension,
            "trial set: trial " + std::to_string(n) + " has a different shape");
    require(trials[n].allFinite(), ErrorKind::InvalidArgument,
            "trial set: trial " + std::to_string(n) + " has non-finite samples");
    require(std::isfinite(targets[n]), ErrorKind::InvalidArgument,
            "trial set: target " + std::to_string(n) + " is not finite");
  }
}

LabeledTrialSet LabeledTrialSet::subset(std::span<const std::size_t> indices) const {
  LabeledTrialSet out;
  out.sample_rate_hz = sample_rate_hz;
  out.trials.reserve(indices.size());
  out.targets.reserve(indices.size());
  for (auto i : indices) {
    require(i < trials.size(), ErrorKind::InvalidArgument, "trial set: subset index out of range");
    out.trials.push_back(trials[i]);
    out.targets.push_back(targets[i]);
  }
  return out;
}

}  // namespace cspr
