#include "initprop/density.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "initprop/error.hpp"

namespace initprop {

namespace {

void require_positive_u(double u) {
  if (!(u > 0.0) || !std::isfinite(u)) {
    throw Error(Errc::invalid_argument, "pre-activation stddev u must be positive");
  }
}

// t_y written as in the density formula rather than std::atanh.
double t_of(double y) { return 0.5 * std::log((1.0 + y) / (1.0 - y)); }

}  // namespace

double tanh_pdf(double y, double u) {
  require_positive_u(u);
  if (!(std::abs(y) < 1.0)) {
    throw Error(Errc::numeric_domain, "tanh density is defined on |y| < 1, got y=" +
                                          std::to_string(y));
  }
  const double t = t_of(y);
  const double jacobian = 1.0 / ((1.0 - y) * (1.0 + y));
  const double normal = std::exp(-t * t / (2.0 * u * u)) / std::sqrt(2.0 * std::numbers::pi * u * u);
  return jacobian * normal;
}

DensityCurve curve(double u, int grid_points) {
  require_positive_u(u);
  if (grid_points < 3) throw Error(Errc::invalid_argument, "density grid needs at least 3 points");
  DensityCurve out;
  out.preact_stddev = u;
  out.points.reserve(grid_points);
  const double lo = -1.0 + kDensityEdgeClip;
  const double span = 2.0 * (1.0 - kDensityEdgeClip);
  const int last = grid_points - 1;
  for (int k = 0; k < grid_points; ++k) {
    // Symmetric construction so the grid holds y = 0 exactly when the count is odd.
    double y = 0.0;
    if (2 * k < last) {
      y = lo + span * k / last;
    } else if (2 * k > last) {
      y = -(lo + span * (last - k) / last);
    }
    out.points.push_back({y, tanh_pdf(y, u)});
  }
  out.integral = pdf_integral(u);
  return out;
}

double pdf_integral(double u, int intervals) {
  require_positive_u(u);
  if (intervals < 2) throw Error(Errc::invalid_argument, "integration needs at least 2 intervals");
  const double t_max = t_of(1.0 - kDensityEdgeClip);
  const double h = 2.0 * t_max / intervals;
  double sum = 0.0;
  for (int k = 0; k <= intervals; ++k) {
    const double t = -t_max + h * k;
    const double y = std::tanh(t);
    const double dy_dt = (1.0 - y) * (1.0 + y);
    const double weight = (k == 0 || k == intervals) ? 0.5 : 1.0;
    sum += weight * tanh_pdf(y, u) * dy_dt;
  }
  return sum * h + saturation_fraction(u, 1.0 - kDensityEdgeClip);
}

namespace {

// 2 (1 − Φ(t/u)) = erfc(t / (u √2)); returns the erfc argument.
double saturation_fraction_argument(double u, double threshold) {
  require_positive_u(u);
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(Errc::invalid_argument, "saturation threshold must lie in (0, 1)");
  }
  return t_of(threshold) / (u * std::numbers::sqrt2);
}

}  // namespace

double saturation_fraction(double u, double threshold) {
  return std::erfc(saturation_fraction_argument(u, threshold));
}

double log_saturation_fraction(double u, double threshold) {
  const double x = saturation_fraction_argument(u, threshold);
  if (x < 25.0) return std::log(std::erfc(x));
  // erfc(x) = e^{-x²} / (x √π) · (1 − 1/(2x²) + 3/(4x⁴) − 15/(8x⁶) + …)
  const double r = 1.0 / (2.0 * x * x);
  const double series = 1.0 - r + 3.0 * r * r - 15.0 * r * r * r;
  return -x * x - std::log(x * std::sqrt(std::numbers::pi)) + std::log(series);
}

std::vector<std::size_t> local_maxima(const DensityCurve& c) {
  std::vector<std::size_t> out;
  const auto& p = c.points;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool above_left = i == 0 || p[i].density > p[i - 1].density;
    const bool above_right = i + 1 == p.size() || p[i].density > p[i + 1].density;
    if (above_left && above_right && p.size() > 1) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> local_minima(const DensityCurve& c) {
  std::vector<std::size_t> out;
  const auto& p = c.points;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool below_left = i == 0 || p[i].density < p[i - 1].density;
    const bool below_right = i + 1 == p.size() || p[i].density < p[i + 1].density;
    if (below_left && below_right && p.size() > 1) out.push_back(i);
  }
  return out;
}

}  // namespace initprop
