#pragma once

#include <span>

namespace weyl {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Fit of log|y| against log x; non-positive entries are rejected.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace weyl
