#pragma once

#include <span>
#include <vector>

#include "initprop/activations.hpp"

namespace initprop {

/// Nodes and weights of an n-point rule, stored in ascending node order.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss–Hermite rule rescaled to the standard normal density:
/// E[f(Z)] ≈ Σ w_i f(z_i), Σ w_i = 1. Exact for polynomials of degree < 2n.
QuadratureRule gauss_hermite_normal(int n);

/// Gauss–Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// Mean and variance of g(u·Z) for Z ~ N(0, 1).
struct TransformedMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
};

/// Gaussian expectations of an activation evaluated on N(0, u²).
///
/// Smooth activations at moderate u use the Gauss–Hermite rule directly.
/// Activations that declare kinks, and any activation once u exceeds
/// kHermiteMaxStddev (where g(u·z) turns into a near-step that Gauss–Hermite
/// resolves poorly), are integrated piecewise instead: the standard-normal
/// integral over [-kTruncation, kTruncation] is cut at 0 and at every kink / u,
/// and each piece gets a Gauss–Legendre rule of the same size.
class NormalQuadrature {
 public:
  static constexpr double kTruncation = 12.0;
  static constexpr double kHermiteMaxStddev = 2.0;

  explicit NormalQuadrature(int nodes);

  int nodes() const noexcept { return nodes_; }

  /// Throws Error(numeric_domain) when the sums are not finite.
  TransformedMoments moments(const ActivationSpec& g, double u) const;

 private:
  int nodes_;
  QuadratureRule hermite_;
  QuadratureRule legendre_;
};

}  // namespace initprop
