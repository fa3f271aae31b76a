#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "volterra/coefficients.hpp"
#include "volterra/driver.hpp"
#include "volterra/kernel.hpp"

namespace volterra {

/// Thrown when the state stops being finite; `step` is the first bad index.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(std::size_t step, const std::string& what) : std::runtime_error(what), step(step) {}
  std::size_t step;
};

/// Lag weights of the left-point scheme on a uniform grid of n steps.
/// drift[m] integrates the kernel over the step at lag m + 1; noise[m] =
/// drift[m] / dt is the interval-averaged kernel applied to Brownian increments.
struct SchemeWeights {
  double dt = 0.0;
  std::vector<double> drift;
  std::vector<double> noise;
};

SchemeWeights scheme_weights(const KernelSpec& spec, double dt, std::size_t n, double x,
                             KernelNormalization normalization);

/// sum_{j<k} drift[k-j-1] mu[j] + noise[k-j-1] noise_input[j]; the one place
/// the scheme sums, shared by the solver, the Picard map and the field lift.
double convolve(const SchemeWeights& w, const std::vector<double>& mu,
                const std::vector<double>& noise_input, std::size_t k);

struct VolterraSolution {
  KernelSpec spec = KernelSpec::make(0.0);
  KernelNormalization normalization = KernelNormalization::plain;
  std::uint64_t seed = 0;
  int level = 0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<double> values;      // X(t_k)
  std::vector<double> x0_values;   // x0(t_k)
  std::vector<double> drift;       // mu(t_j, X_j)
  std::vector<double> noise;       // sigma(t_j, X_j) dB_j
  std::vector<std::string> warnings;
};

/// Left-point Volterra-Euler scheme:
///   X_k = x0(t_k) + sum_{j<k} mu(t_j, X_j) W_kj + sum_{j<k} sigma(t_j, X_j) (W_kj / dt) dB_j
/// with W_kj the exact kernel integral over [t_j, t_{j+1}] (times c_theta for
/// the c_theta normalisation). O(n^2). Inadmissible xi only adds a warning.
VolterraSolution solve_sve(const KernelSpec& spec, const CoefficientPair& pair,
                           const InitialCondition& x0, const BrownianGrid& path,
                           KernelNormalization normalization = KernelNormalization::plain);

/// One application of the discrete Volterra map to a candidate path `prev`.
std::vector<double> volterra_map(const SchemeWeights& w, const CoefficientPair& pair,
                                 const std::vector<double>& times,
                                 const std::vector<double>& x0_values,
                                 const std::vector<double>& increments,
                                 const std::vector<double>& prev);

struct RandomField {
  std::vector<double> times;
  std::vector<double> space;
  std::vector<double> values;    // X(t_k, x_i) at k * space.size() + i
  std::vector<double> z_values;  // X - x0(t_k)

  double at(std::size_t k, std::size_t i) const { return values[k * space.size() + i]; }
  double z_at(std::size_t k, std::size_t i) const { return z_values[k * space.size() + i]; }
};

/// Convolves the stored mu and sigma dB samples of the solution against
/// p^theta_{t-s}(x) weights. At x = 0 these are the c_theta weights, so under
/// the c_theta normalisation X(t, 0) reproduces the solution bit for bit.
/// Throws std::domain_error for alpha = 0.
RandomField lift_field(const VolterraSolution& solution, const std::vector<double>& space);

/// Symmetric grid of `nodes` points on [-x_max, x_max].
std::vector<double> space_grid(double x_max, std::size_t nodes);

struct HolderOptions {
  std::size_t min_paths = 100;
  std::size_t min_lags = 4;
  double smooth_threshold = 0.9;
};

struct HolderFit {
  double exponent = 0.0;          // slope / 2
  double intercept = 0.0;
  bool smooth = false;            // exponent >= smooth_threshold
  std::vector<double> lags;       // in time (or space) units
  std::vector<double> mean_square;
};

/// Regresses log E|X(s + lag) - X(s)|^2 on log lag, averaging over samples and
/// over all admissible s. Each sample is a sequence on a grid of step `spacing`;
/// `lags` are in grid steps. Throws std::invalid_argument when there are fewer
/// than min_paths samples, fewer than min_lags lags, or the lags span less
/// than a decade.
HolderFit holder_estimate(const std::vector<std::vector<double>>& samples, double spacing,
                          const std::vector<std::size_t>& lags, const HolderOptions& options = {});

/// sup over common nodes of |X^{l+1} - X^l| for l = base_level .. base_level + refinements - 1,
/// all levels driven by the same seed.
std::vector<double> refinement_gaps(const KernelSpec& spec, const CoefficientPair& pair,
                                    const InitialCondition& x0, std::uint64_t seed, int base_level,
                                    int refinements, std::size_t base_steps, double T = 1.0);

}  // namespace volterra
