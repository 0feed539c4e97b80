#include "cspr/metrics.hpp"

#include "cspr/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cspr {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, const char* who) {
  require(!a.empty() && a.size() == b.size(), ErrorKind::Dimension,
          std::string(who) + ": inputs must be non-empty and of equal length");
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth, "rmse");
  double ss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) ss += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return std::sqrt(ss / static_cast<double>(pred.size()));
}

double cc(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth, "cc");
  const auto n = static_cast<double>(pred.size());
  double mp = 0.0;
  double mt = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mp += pred[i];
    mt += truth[i];
  }
  mp /= n;
  mt /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dp = pred[i] - mp;
    const double dt = truth[i] - mt;
    sxy += dp * dt;
    sxx += dp * dp;
    syy += dt * dt;
  }
  // Relative test: spreads at rounding level count as constant.
  const double sp = std::sqrt(sxx / n);
  const double st = std::sqrt(syy / n);
  if (!(sp > 1e-12 * std::max(1.0, std::abs(mp))) || !(st > 1e-12 * std::max(1.0, std::abs(mt)))) {
    fail(ErrorKind::Degenerate, "cc: correlation is undefined for a constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace cspr
