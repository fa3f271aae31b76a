#pragma once

#include <functional>
#include <span>

namespace volterra::quad {

using Integrand = std::function<double(double)>;

struct Result {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

struct Tolerance {
  double relative = 1e-12;
  unsigned max_depth = 15;
};

// Adaptive Gauss-Kronrod (15 point) on [a, b]. `converged` is false when the
// estimated error exceeds the requested relative tolerance times the L1 norm.
Result integrate(const Integrand& f, double a, double b, Tolerance tol = {});

// Integrand behaving like (s - a)^(-gamma) near a, gamma in [0, 1).
// Uses u = (s - a)^(1 - gamma) so the transformed integrand stays bounded, then
// tanh-sinh, which tolerates the leftover fractional powers at the endpoint.
Result integrate_left_singular(const Integrand& f, double a, double b, double gamma,
                               Tolerance tol = {});

// Mirror image of integrate_left_singular for a singularity at b.
Result integrate_right_singular(const Integrand& f, double a, double b, double gamma,
                                Tolerance tol = {});

// Sums integrate() over consecutive panels [breaks[i], breaks[i+1]].
Result integrate_panels(const Integrand& f, std::span<const double> breaks, Tolerance tol = {});

// Composite trapezoid rule on a uniform grid with spacing h.
double trapezoid(std::span<const double> values, double h);

}  // namespace volterra::quad
