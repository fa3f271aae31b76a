#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace volterra {

using Coefficient = std::function<double(double t, double x)>;

/// Drift mu(t, x) and diffusion sigma(t, x) with declared constants:
///   |mu| + |sigma| <= C_growth (1 + |x|)
///   |mu(t,x) - mu(t,y)| <= C_mu |x - y|
///   |sigma(t,x) - sigma(t,y)| <= C_sigma |x - y|^xi
/// `ratio_bound`, when known, bounds |dmu / dsigma| over pairs in [-K, K].
/// Both maps must be pure; they are called concurrently.
struct CoefficientPair {
  Coefficient mu;
  Coefficient sigma;
  double C_growth = 0.0;
  double C_mu = 0.0;
  double C_sigma = 0.0;
  double xi = 1.0;
  std::function<double(double K)> ratio_bound;
  std::string description;
};

/// sigma = c sgn(x)|x|^xi, mu = a + b x. The declared Hoelder constant is the
/// sharp global one, c 2^(1-xi): the pair x = -y realises it. Throws
/// std::domain_error unless xi in [1/2, 1] and c >= 0.
CoefficientPair builtin_power_diffusion(double xi, double c, double drift_a = 0.0,
                                        double drift_b = 0.0);

/// Piecewise-linear interpolation of tabulated mu and sigma on increasing nodes,
/// constant beyond the ends. Constants are derived from the table; the Hoelder
/// constant uses min(L d, osc) <= L^xi osc^(1-xi) d^xi.
CoefficientPair builtin_lipschitz_table(std::vector<double> x, std::vector<double> mu,
                                        std::vector<double> sigma, double xi);

/// mu, sigma independent of x: mu = m, sigma = s.
CoefficientPair constant_pair(double m, double s);

/// Builds a pair from {type: "power", xi, c, drift: {a, b}} or
/// {type: "lipschitz_table", x, mu, sigma, xi}. Throws std::invalid_argument.
CoefficientPair coefficients_from_json(const nlohmann::json& j);

/// 1 / (2 (1 - alpha)).
double xi_threshold(double alpha);
/// xi > threshold for alpha > 0; xi >= threshold allowed at alpha = 0.
bool xi_admissible(double alpha, double xi);

struct InitialCondition {
  std::function<double(double t)> x0;
  std::string description;
};

InitialCondition constant_initial(double value);

/// max |x0(t) - x0(s)| / |t - s|^beta over pairs of a uniform mesh on [0, T].
double holder_quotient(const InitialCondition& ic, double beta, double T, std::size_t points);

struct AssumptionMesh {
  double T = 1.0;
  std::size_t t_points = 5;
  /// Nodes on [-K, K]; use 2^k + 1 so that refinements nest.
  std::size_t x_points = 129;
};

struct AssumptionReport {
  double K = 0.0;
  double alpha = 0.0;
  double growth_estimate = 0.0;
  double mu_lipschitz_estimate = 0.0;
  double sigma_holder_estimate = 0.0;
  double ratio_estimate = 0.0;
  std::optional<double> ratio_declared;
  std::size_t convention_pairs = 0;  // both differences zero, counted as 1
  std::size_t violation_pairs = 0;   // sigma difference zero, mu difference not
  double xi_threshold = 0.0;
  bool xi_admissible = false;
  bool within_declared = false;      // estimates <= declared * 1.05
  std::vector<std::string> warnings;
};

/// Estimates the constants of the pair over mesh pairs in [0, T] x [-K, K].
/// Throws std::runtime_error if a coefficient is not finite on the mesh.
AssumptionReport validate_assumptions(const CoefficientPair& pair, double alpha, double K,
                                      const AssumptionMesh& mesh = {});

void to_json(nlohmann::json& j, const AssumptionReport& r);

}  // namespace volterra
