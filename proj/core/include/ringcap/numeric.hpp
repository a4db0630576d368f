#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ringcap {

/// Shortest decimal with 17 significant digits; parses back to the same double.
std::string format_double(double value);

/// `count` values geometrically spaced on [lo, hi], both ends included.
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
  double r_squared = 1.0;
};

/// Ordinary least squares y = slope * x + intercept.
LinearFit fit_line(std::span<const double> xs, std::span<const double> ys);

/// Least squares of log y against log x. Requires positive data.
LinearFit fit_loglog(std::span<const double> xs, std::span<const double> ys);

}  // namespace ringcap
