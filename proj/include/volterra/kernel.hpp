#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace volterra {

/// Which scalar kernel the Volterra equation is solved with: the plain power
/// law (t - s)^(-alpha), or c_theta (t - s)^(-alpha) = p^theta_{t-s}(0), the
/// x = 0 slice of the density family used by the random-field lift.
enum class KernelNormalization { plain, c_theta };

KernelNormalization parse_normalization(const std::string& name);
std::string to_string(KernelNormalization n);

/// Singular power-law kernel (t - s)^(-alpha) with alpha in [0, 1/2), together
/// with the exponent theta = 1/alpha - 2 and the constant c_theta that make
/// p_t(x) = c_theta t^(-alpha) exp(-|x|^(2+theta) / (2t)) a probability
/// density on the half line. alpha = 0 is the degenerate branch: the kernel is
/// identically one and the density family is unavailable.
class KernelSpec {
 public:
  /// Throws std::domain_error unless 0 <= alpha < 1/2 and horizon > 0.
  static KernelSpec make(double alpha, double horizon = 1.0);

  double alpha() const { return alpha_; }
  double horizon() const { return horizon_; }
  bool degenerate() const { return alpha_ == 0.0; }
  /// Empty on the degenerate branch.
  std::optional<double> theta() const { return theta_; }
  /// Equal to 1 on the degenerate branch.
  double c_theta() const { return c_theta_; }
  /// 2 + theta; throws on the degenerate branch.
  double space_power() const;
  /// Order of the Bessel function in the transition density, alpha - 1.
  double bessel_order() const;

 private:
  KernelSpec(double alpha, double horizon);

  double alpha_;
  double horizon_;
  std::optional<double> theta_;
  double c_theta_ = 1.0;
};

/// (t - s)^(-alpha); requires 0 <= s < t.
double kernel_value(const KernelSpec& spec, double t, double s);

/// p_t^theta(x); even in x. Requires alpha > 0 and t > 0.
double density(const KernelSpec& spec, double t, double x);

/// p_{t1}(x) - p_{t0}(x) without catastrophic cancellation.
double density_time_difference(const KernelSpec& spec, double t1, double t0, double x);
/// p_t(x) - p_t(y) without catastrophic cancellation.
double density_space_difference(const KernelSpec& spec, double t, double x, double y);

/// Exact integral of (t_k - s)^(-alpha) over [t_j, t_j1], with t_j < t_j1 <= t_k.
double drift_weight(const KernelSpec& spec, double t_k, double t_j, double t_j1);

/// Lag weights on a uniform grid of step dt: entry m - 1 is the integral of the
/// kernel over one step at lag m, i.e. over u in [(m - 1) dt, m dt], where the
/// kernel is (normalised) u^(-alpha) for x = 0 and p_u^theta(x) otherwise.
/// The same vector drives the scalar solver and the field lift.
std::vector<double> lag_weights(const KernelSpec& spec, double dt, std::size_t n, double x,
                                KernelNormalization normalization);

// ---------------------------------------------------------------------------
// Kernel estimate sweeps

struct LemmaSweep {
  std::vector<double> times{0.25, 0.5, 0.9};
  std::vector<double> anchors{0.0, 0.25, 0.5};
  double small_min = 1e-4;
  double small_max = 1e-2;
  std::size_t small_points = 9;
  double beta = 0.2;
  double slope_tol = 0.05;
  double quad_tol = 1e-11;
};

struct SweepPoint {
  double t = 0.0;
  double t_prime = 0.0;
  double x = 0.0;
  double y = 0.0;
  double beta = 0.0;
};

struct LemmaReport {
  std::string lemma;
  double exponent_theoretical = 0.0;
  double exponent_fitted = 0.0;
  double constant_fitted = 0.0;
  SweepPoint worst_point;
  bool pass = false;
  std::string diagnostic;
};

/// Lipschitz-in-space difference bound (exponent beta in |x - y|).
LemmaReport verify_density_difference(const KernelSpec& spec, const LemmaSweep& sweep);
/// Time-increment L2 bound (exponent 1 - 2 alpha in |t' - t|).
LemmaReport verify_time_increment(const KernelSpec& spec, const LemmaSweep& sweep);
/// Space-increment L2 bound (exponent 1 - 2 alpha in |x - y|).
LemmaReport verify_space_increment(const KernelSpec& spec, const LemmaSweep& sweep);

std::vector<LemmaReport> verify_kernel_lemmas(const KernelSpec& spec, const LemmaSweep& sweep);

void to_json(nlohmann::json& j, const SweepPoint& p);
void to_json(nlohmann::json& j, const LemmaReport& r);

}  // namespace volterra
