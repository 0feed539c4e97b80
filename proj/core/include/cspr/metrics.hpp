#pragma once

#include <span>

namespace cspr {

/// Root mean square error. Throws on empty or unequal-length inputs.
double rmse(std::span<const double> pred, std::span<const double> truth);

/// Pearson correlation. Throws Degenerate if either input is constant.
double cc(std::span<const double> pred, std::span<const double> truth);

}  // namespace cspr
