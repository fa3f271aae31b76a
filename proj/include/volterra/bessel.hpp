#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "volterra/kernel.hpp"

namespace volterra {

/// Modified Bessel function of the first kind I_nu(z) for nu > -1, z >= 0,
/// summed from its power series until the tail bound drops below 1e-17 of the
/// partial sum. Throws std::domain_error for nu <= -1 or z < 0 and
/// std::range_error when the value overflows (use bessel_i_scaled) or when
/// z = 0 and nu < 0.
double bessel_i(double nu, double z);

/// exp(-z) I_nu(z); finite for every z >= 0 with nu >= 0 or z > 0.
double bessel_i_scaled(double nu, double z);

/// (z/2)^(-nu) I_nu(z) = sum_k (z^2/4)^k / (k! Gamma(nu + k + 1)), which stays
/// regular at z = 0 for negative orders.
double bessel_i_reduced(double nu, double z);

/// The first n_terms of the series for I_nu(z) (no tail criterion).
double bessel_i_partial(double nu, double z, std::size_t n_terms);

/// Number of series terms bessel_i uses at (nu, z).
std::size_t bessel_i_terms(double nu, double z);

/// Transition density of |x|-valued process generated by Delta_theta:
///   ((2+theta)/2t) |xy|^((1+theta)/2) exp(-(|x|^(2+theta) + |y|^(2+theta))/2t) I_nu(|xy|^(1+theta/2)/t)
/// with nu = alpha - 1. At x = 0 (or y = 0) it reduces to p_t^theta of the other
/// argument. Symmetric and even in both arguments.
class TransitionDensity {
 public:
  /// Throws std::domain_error on the degenerate branch alpha = 0.
  explicit TransitionDensity(KernelSpec spec);

  const KernelSpec& spec() const { return spec_; }
  double operator()(double t, double x, double y) const;
  /// Upper limit for y-integrals of p_t(x, .): beyond it the Gaussian-type
  /// factor exp(-(b - a)^2 / 2t) is below 1e-18.
  double support_bound(double t, double x) const;

 private:
  KernelSpec spec_;
};

/// int_0^infty p_s(x,u) p_t(u,z) du against p_{s+t}(x,z).
struct ChapmanKolmogorovPoint {
  double s = 0.0, t = 0.0, x = 0.0, z = 0.0;
  double composed = 0.0;
  double direct = 0.0;
  double relative_error = 0.0;
  bool converged = true;
};

ChapmanKolmogorovPoint chapman_kolmogorov(const TransitionDensity& td, double s, double t,
                                          double x, double z);

/// int_0^infty p_t(x, y) dy.
double transition_mass(const TransitionDensity& td, double t, double x);

struct UpperBoundReport {
  std::size_t samples = 0;
  double min_value = 0.0;         // over random (t, x, y) samples
  bool positive = false;
  std::vector<double> y_mesh;     // y -> 0 mesh at the probe point
  std::vector<double> limit_gap;  // |p_t(x, y) - p_t^theta(x)| / p_t^theta(x) along the mesh
  double probe_x = 0.4;
  double probe_t = 1.0;
  // Diagnostic only: smallest sampled t beyond which p_t(0.3, 0.7) decreases.
  double decreasing_from = 0.0;
};

UpperBoundReport upper_bound_check(const TransitionDensity& td, std::size_t samples,
                                   double probe_x = 0.4, double probe_t = 1.0);

void to_json(nlohmann::json& j, const ChapmanKolmogorovPoint& p);
void to_json(nlohmann::json& j, const UpperBoundReport& r);

}  // namespace volterra
