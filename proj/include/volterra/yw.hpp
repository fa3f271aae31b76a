#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "volterra/bessel.hpp"
#include "volterra/kernel.hpp"

namespace volterra {

/// a_n = exp(-n (n + 1) / 2), the levels with int_{a_n}^{a_{n-1}} dx / x = n.
double yw_level(int n);

/// Yamada-Watanabe mollifiers psi_n supported on [a_n, a_{n-1}] and the
/// smoothed absolute values phi_n(x) = int_0^|x| int_0^y psi_n.
///
/// psi_n is the bump exp(-1/(1-u^2)) placed on s = log(x / a_n) / n in (0, 1)
/// and divided by n x times its mass, so int psi_n = 1 and
/// psi_n(x) <= (max bump / bump mass) / (n x) = 1.657.. / (n x) < 2 / (n x).
class MollifierFamily {
 public:
  /// Throws std::invalid_argument for n_max < 1 and std::runtime_error (naming
  /// the level) if a mollifier breaks the 2 / (n x) cap.
  static MollifierFamily build(int n_max);

  int n_max() const { return n_max_; }
  double a(int n) const;
  double psi(int n, double x) const;
  /// phi_n'(x) = sgn(x) int_0^|x| psi_n.
  double phi_prime(int n, double x) const;
  double phi(int n, double x) const;
  /// sup_x (|x| - phi_n(x)) = a_n + int_{a_n}^{a_{n-1}} (1 - phi_n'), attained for |x| >= a_{n-1}.
  double sup_gap(int n) const;
  /// int psi_n by adaptive quadrature in x.
  double psi_mass(int n) const;
  /// max over a log mesh of psi_n(x) n x / 2 (must stay <= 1).
  double cap_ratio(int n) const;

 private:
  explicit MollifierFamily(int n_max);
  double bump(double s) const;
  double bump_cdf(double s) const;

  int n_max_;
  double bump_mass_ = 0.0;
  std::vector<double> cdf_;  // bump cdf on a uniform s grid
};

/// eta = zeta / alpha must exceed 1 / (2 xi - 1) with zeta in (0, 1).
double eta_threshold(double xi);
bool zeta_window_ok(double zeta, double alpha, double xi);

/// Spatial test function approximating delta_x:
///   Phi_x^n(y) = (1 / m_sigma) cut(|y - x|) N(y; x, 1/m^2)
/// with m = a_{n-1}^(-1/eta), cut = 1 on [0, 1/m], 0 beyond 1/m + b_n, and b_n
/// chosen so the Gaussian mass of the annulus 1/m < |y - x| < 1/m + b_n is a_n/2.
struct BumpTest {
  int n = 1;
  double eta = 0.0;
  double m = 1.0;
  double x = 0.0;
  double b_n = 0.0;
  double m_sigma = 0.0;

  double operator()(double y) const;
  double radius() const { return 1.0 / m + b_n; }
  /// Gaussian mass of the annulus, by quadrature.
  double annulus_mass() const;
};

/// Throws std::domain_error unless eta > 1/(2 xi - 1), std::runtime_error if the
/// annulus equation has no bracketed root.
BumpTest build_bump(int n, double eta, double x, double xi);

/// int Phi_x^n(0) dx over x, and int Phi_x^n(0)^2 dx over x.
double bump_mass_at_zero(int n, double eta, double xi);
double bump_square_mass_at_zero(int n, double eta, double xi);

/// Psi(s, x) = (S_{t-s} phi_M)(x) g_N(x), with S the semigroup of Delta_theta
/// evaluated on even functions through the transition density on the half line.
class SemigroupTest {
 public:
  /// Requires M >= 2, N >= 1, t > 0 and alpha > 0.
  SemigroupTest(int N, int M, double t, const KernelSpec& spec);

  int N() const { return N_; }
  int M() const { return M_; }
  double t() const { return t_; }

  /// M exp(-M^2 x^2) on |x| <= 1/M, smoothly cut to 0 at |x| = 1/(M-1).
  double phi_M(double x) const;
  /// 1 on |x| <= N, 0 on |x| >= N+1, quintic smoothstep between.
  double g(double x) const;
  double g_prime(double x) const;
  double g_second(double x) const;
  /// Delta_theta g_N = (2/(2+theta)^2) (|x|^-theta g')'.
  double delta_theta_g(double x) const;

  /// (S_tau phi_M)(x); tau = 0 returns phi_M(x).
  double S(double tau, double x) const;
  /// (S_s (S_tau phi_M))(x) by nested quadrature.
  double S_composed(double s, double tau, double x) const;
  double psi(double s, double x) const;
  double psi_dx(double s, double x) const;

  const TransitionDensity& transition() const { return td_; }

 private:
  int N_, M_;
  double t_;
  KernelSpec spec_;
  TransitionDensity td_;
};

struct SemigroupReport {
  std::vector<double> s_mesh;
  std::vector<double> psi_at_zero;
  bool positive_at_zero = false;
  double support_radius = 0.0;
  bool support_ok = false;
  std::vector<double> weighted_gradient;  // int |x|^-theta (d_x Psi_s)^2 dx per s
  bool weighted_gradient_finite = false;
  std::vector<double> C_g;                // per N = 1 .. n_cutoffs
  bool C_g_bounded = false;
  std::vector<double> tail_constants;     // max |S phi + d_x S phi| e^{|x|} on N < |x| < N+1
  bool tail_ok = false;
  double identity_gap = 0.0;              // max |Psi(t, x) - phi_M g_N|
  double semigroup_error = 0.0;           // max relative |S_s S_tau phi - S_{s+tau} phi|
};

SemigroupReport validate_semigroup_test(const SemigroupTest& test, std::size_t s_points = 5,
                                        int n_cutoffs = 6);

void to_json(nlohmann::json& j, const SemigroupReport& r);

}  // namespace volterra
