#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "volterra/coefficients.hpp"
#include "volterra/kernel.hpp"
#include "volterra/solver.hpp"

namespace volterra {

// ---------------------------------------------------------------------------
// Common-noise Picard study

enum class Verdict { consistent, violated, inconclusive };
std::string to_string(Verdict v);
/// 0 consistent, 2 violated, 3 inconclusive.
int exit_code(Verdict v);

struct UniquenessOptions {
  int level = 10;
  std::size_t base_steps = 2;
  double T = 1.0;
  int iterations = 60;
  double init_shift = 1.0;       // second initial guess is x0 + init_shift
  double gap_threshold = 1e-6;   // relative to 1 + sup |X|
  KernelNormalization normalization = KernelNormalization::plain;
};

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<double> gaps;  // sup_k |X^a_k - X^b_k| after each iteration
  double sup_abs = 0.0;      // sup_k |X_k| of the final iterate
  bool diverging = false;    // gap grew over 5 consecutive iterations
};

struct UniquenessReport {
  std::vector<std::uint64_t> seeds;
  std::vector<int> levels;
  std::vector<SeedRun> runs;
  std::vector<double> median_gaps;  // per iteration
  double median_sup_abs = 0.0;
  double noise_floor = 0.0;         // 64 eps (1 + median sup |X|)
  double threshold = 0.0;           // gap_threshold (1 + median sup |X|)
  double final_median_gap = 0.0;
  bool monotone_after_transient = false;  // non-increasing from iteration 2 on, or below the floor
  std::vector<double> gronwall_envelope;  // eps = init_shift, C = kernel factor * (C_mu + C_sigma)
  bool admissible = false;
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::string> warnings;
};

/// Runs the discrete Volterra map from x0 and from x0 + init_shift on the same
/// Brownian path for every seed and records the sup-gap after each iteration.
UniquenessReport picard_uniqueness(const KernelSpec& spec, const CoefficientPair& pair,
                                   const InitialCondition& x0, const std::vector<std::uint64_t>& seeds,
                                   const UniquenessOptions& options = {});

/// Majorant of f_k <= eps + C sum_{j<k} W(t_k, t_j, t_{j+1}) f_j solved as an
/// equality on the increasing grid t_grid (W the exact kernel integral).
std::vector<double> gronwall_envelope(double alpha, double eps, double C, const std::vector<double>& t_grid);

struct EnvelopeDominance {
  std::vector<bool> dominated;  // per seed
  double fraction = 0.0;
  std::vector<double> mean_gap;  // seed average of |X^eps_k - X_k|
  bool mean_dominated = false;   // mean_gap <= envelope at every node
  double eps = 0.0;
  double C = 0.0;
};

/// Solves the SVE from x0 and from x0 + eps on each seed's path and checks
/// |X^eps_k - X_k| <= gronwall_envelope(alpha, eps, C)_k at every node.
EnvelopeDominance envelope_dominance(const KernelSpec& spec, const CoefficientPair& pair,
                                     const InitialCondition& x0, const std::vector<std::uint64_t>& seeds,
                                     int level, std::size_t base_steps, double eps, double C,
                                     KernelNormalization normalization = KernelNormalization::plain);

// ---------------------------------------------------------------------------
// Distributional SPDE residual

/// Conservative Delta_theta = (2/(2+theta)^2) d/dx |x|^-theta d/dx on a uniform
/// grid, with midpoint weights |x_{i+1/2}|^-theta; end nodes get 0.
std::vector<double> delta_theta_fd(const KernelSpec& spec, const std::vector<double>& xs,
                                   const std::vector<double>& values);

/// Space-time test function Phi_s(x) with its time derivative; zero for
/// |x - center| >= radius.
struct SpaceTimeTest {
  std::function<double(double s, double x)> value;
  std::function<double(double s, double x)> ds;
  double center = 0.0;
  double radius = 0.0;
};

/// Phi_s(x) = (1 + kappa s) B(|x|^(2+theta) / radius^(2+theta)), B the standard
/// bump normalised to B(0) = 1. The |x|^(2+theta) argument keeps
/// |x|^-theta Phi' regular at the origin.
SpaceTimeTest radial_test_function(const KernelSpec& spec, double radius, double kappa = 0.5);
SpaceTimeTest zero_test_function();

struct DspdeTerms {
  double lhs = 0.0;        // int X(t, x) Phi_t(x) dx
  double initial = 0.0;    // int x0(0) Phi_0 + int_0^t int Phi_s dx dx0(s)
  double evolution = 0.0;  // int_0^t int X (Delta_theta Phi + d_s Phi) dx ds
  double drift = 0.0;      // source_mass * int_0^t mu(s, X(s,0)) Phi_s(0) ds
  double noise = 0.0;      // source_mass * int_0^t sigma(s, X(s,0)) Phi_s(0) dB_s
  double source_mass = 0.0;
  double residual = 0.0;   // |lhs - rest| / max term magnitude
};

/// Evaluates both sides of the weak form at the final time with trapezoidal
/// space sums, left-point time sums and left-point stochastic sums. The point
/// sources carry the mass of p^theta over the whole line, 2, because the
/// density is normalised on the half line. Throws std::domain_error if the test
/// function's support leaves the interior of the space grid.
DspdeTerms dspde_residual(const RandomField& field, const VolterraSolution& solution, const SpaceTimeTest& phi);

/// Compactly supported C^2 test function with its exact Delta_theta.
struct TestFunction {
  std::function<double(double)> value;
  std::function<double(double)> delta_theta;
  double lo = 0.0, hi = 0.0;  // support
};

/// Bump exp(-1/(1-u^2)), u = (x - center) / radius; requires 0 outside the support.
TestFunction bump_test_function(const KernelSpec& spec, double center, double radius);
TestFunction zero_function();

/// | sum_i h p_t(x_i, y) Delta_theta phi(x_i) - sum_i h (D_h p_t(., y))(x_i) phi(x_i) |
/// with D_h the conservative stencil on the grid h Z (x = 0 is a node; midpoint
/// weights never touch it).
double partial_integration_check(const KernelSpec& spec, double t, double y, const TestFunction& phi,
                                 double h = 0.01);

void to_json(nlohmann::json& j, const SeedRun& r);
void to_json(nlohmann::json& j, const UniquenessReport& r);
void to_json(nlohmann::json& j, const DspdeTerms& d);

}  // namespace volterra
