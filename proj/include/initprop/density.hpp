#pragma once

#include <vector>

namespace initprop {

/// Distribution of tanh(Y) for Y ~ N(0, u²).

inline constexpr double kDensityEdgeClip = 1e-6;

struct DensityPoint {
  double y = 0.0;
  double density = 0.0;
};

struct DensityCurve {
  double preact_stddev = 0.0;
  std::vector<DensityPoint> points;
  /// Numerical integral of the density over (−1, 1).
  double integral = 0.0;
};

/// f(y) = 1/(1−y²) · 1/√(2πu²) · exp(−t_y² / 2u²), t_y = ½ ln((1+y)/(1−y)).
double tanh_pdf(double y, double u);

/// tanh_pdf on a uniform grid over [−1+ε, 1−ε], ε = kDensityEdgeClip.
DensityCurve curve(double u, int grid_points);

/// ∫ tanh_pdf over (−1, 1): trapezoid on [−1+ε, 1−ε] in the coordinate
/// t = atanh(y) (grid uniform in t) plus the analytic mass of the two clipped
/// tails, which is saturation_fraction(u, 1−ε).
double pdf_integral(double u, int intervals = 20'000);

/// P(|tanh(uZ)| > threshold) = 2 (1 − Φ(atanh(threshold) / u)).
double saturation_fraction(double u, double threshold);

/// ln saturation_fraction(u, threshold), accurate where the fraction itself
/// underflows (deep layers with tiny u). Same ordering as saturation_fraction.
double log_saturation_fraction(double u, double threshold);

/// Indices of local maxima of the sampled density. An endpoint counts when it
/// is strictly above its single neighbour.
std::vector<std::size_t> local_maxima(const DensityCurve& curve);
std::vector<std::size_t> local_minima(const DensityCurve& curve);

}  // namespace initprop
