#include "volterra/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "volterra/stats.hpp"

namespace volterra {

SchemeWeights scheme_weights(const KernelSpec& spec, double dt, std::size_t n, double x,
                             KernelNormalization normalization) {
  SchemeWeights w;
  w.dt = dt;
  w.drift = lag_weights(spec, dt, n, x, normalization);
  w.noise.resize(n);
  for (std::size_t m = 0; m < n; ++m) w.noise[m] = w.drift[m] / dt;
  return w;
}

double convolve(const SchemeWeights& w, const std::vector<double>& mu,
                const std::vector<double>& noise_input, std::size_t k) {
  double acc = 0.0;
  const double* dw = w.drift.data() + k - 1;
  const double* nw = w.noise.data() + k - 1;
  for (std::size_t j = 0; j < k; ++j) acc += *(dw - j) * mu[j] + *(nw - j) * noise_input[j];
  return acc;
}

namespace {

void check_finite(double v, std::size_t k, const char* what) {
  if (std::isfinite(v)) return;
  std::ostringstream os;
  os << what << " is not finite at step " << k;
  throw BlowUpError(k, os.str());
}

}  // namespace

VolterraSolution solve_sve(const KernelSpec& spec, const CoefficientPair& pair,
                           const InitialCondition& x0, const BrownianGrid& path,
                           KernelNormalization normalization) {
  const std::size_t n = path.n_steps();
  VolterraSolution s;
  s.spec = spec;
  s.normalization = normalization;
  s.seed = path.seed;
  s.level = path.level;
  s.dt = path.dt;
  s.times.resize(n + 1);
  s.values.resize(n + 1);
  s.x0_values.resize(n + 1);
  s.drift.resize(n);
  s.noise.resize(n);
  if (!xi_admissible(spec.alpha(), pair.xi)) {
    std::ostringstream os;
    os << "xi = " << pair.xi << " is not admissible for alpha = " << spec.alpha()
       << " (needs xi > " << xi_threshold(spec.alpha()) << ")";
    s.warnings.push_back(os.str());
  }
  const SchemeWeights w = scheme_weights(spec, path.dt, n, 0.0, normalization);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = path.time(k);
    s.times[k] = t;
    s.x0_values[k] = x0.x0(t);
    s.values[k] = s.x0_values[k] + (k ? convolve(w, s.drift, s.noise, k) : 0.0);
    check_finite(s.values[k], k, "state");
    if (k == n) break;
    s.drift[k] = pair.mu(t, s.values[k]);
    s.noise[k] = pair.sigma(t, s.values[k]) * path.increments[k];
    check_finite(s.drift[k] + s.noise[k], k, "coefficient");
  }
  return s;
}

std::vector<double> volterra_map(const SchemeWeights& w, const CoefficientPair& pair,
                                 const std::vector<double>& times,
                                 const std::vector<double>& x0_values,
                                 const std::vector<double>& increments,
                                 const std::vector<double>& prev) {
  const std::size_t n = increments.size();
  std::vector<double> mu(n), nz(n), next(n + 1);
  for (std::size_t j = 0; j < n; ++j) {
    mu[j] = pair.mu(times[j], prev[j]);
    nz[j] = pair.sigma(times[j], prev[j]) * increments[j];
  }
  for (std::size_t k = 0; k <= n; ++k) {
    next[k] = x0_values[k] + (k ? convolve(w, mu, nz, k) : 0.0);
    check_finite(next[k], k, "iterate");
  }
  return next;
}

std::vector<double> space_grid(double x_max, std::size_t nodes) {
  if (nodes < 2 || !(x_max > 0.0)) throw std::invalid_argument("space grid needs >= 2 nodes and x_max > 0");
  auto xs = linspace(-x_max, x_max, nodes);
  // Exact symmetry and an exact zero node when the count is odd.
  for (std::size_t i = 0; i < nodes / 2; ++i) xs[nodes - 1 - i] = -xs[i];
  if (nodes % 2) xs[nodes / 2] = 0.0;
  return xs;
}

RandomField lift_field(const VolterraSolution& solution, const std::vector<double>& space) {
  if (solution.spec.degenerate()) throw std::domain_error("the field lift needs alpha > 0");
  const std::size_t n = solution.drift.size();
  const std::size_t m = space.size();
  RandomField f;
  f.times = solution.times;
  f.space = space;
  f.values.resize((n + 1) * m);
  f.z_values.resize((n + 1) * m);

  // Weights depend on |x| only; compute each distinct one once.
  std::map<double, std::size_t> slot;
  std::vector<double> distinct;
  for (double x : space) {
    if (slot.emplace(std::abs(x), distinct.size()).second) distinct.push_back(std::abs(x));
  }
  std::vector<SchemeWeights> weights(distinct.size());
  parallel_for(distinct.size(), [&](std::size_t d) {
    weights[d] = scheme_weights(solution.spec, solution.dt, n, distinct[d], KernelNormalization::c_theta);
  });
  parallel_for(m, [&](std::size_t i) {
    const SchemeWeights& w = weights[slot.at(std::abs(space[i]))];
    for (std::size_t k = 0; k <= n; ++k) {
      const double z = k ? convolve(w, solution.drift, solution.noise, k) : 0.0;
      const double x = solution.x0_values[k] + z;
      f.values[k * m + i] = x;
      f.z_values[k * m + i] = x - solution.x0_values[k];
    }
  });
  return f;
}

HolderFit holder_estimate(const std::vector<std::vector<double>>& samples, double spacing,
                          const std::vector<std::size_t>& lags, const HolderOptions& options) {
  if (samples.size() < options.min_paths)
    throw std::invalid_argument("holder_estimate needs at least " + std::to_string(options.min_paths) + " samples");
  if (lags.size() < options.min_lags)
    throw std::invalid_argument("holder_estimate needs at least " + std::to_string(options.min_lags) + " lags");
  const auto [lo, hi] = std::minmax_element(lags.begin(), lags.end());
  if (*lo == 0 || *hi < 10 * *lo) throw std::invalid_argument("holder_estimate lags must span a decade");
  HolderFit fit;
  for (std::size_t lag : lags) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& x : samples) {
      for (std::size_t k = 0; k + lag < x.size(); ++k) {
        const double d = x[k + lag] - x[k];
        sum += d * d;
        ++count;
      }
    }
    if (count == 0) throw std::invalid_argument("lag exceeds sample length");
    fit.lags.push_back(static_cast<double>(lag) * spacing);
    fit.mean_square.push_back(sum / static_cast<double>(count));
  }
  const LineFit line = fit_loglog(fit.lags, fit.mean_square);
  fit.exponent = 0.5 * line.slope;
  fit.intercept = line.intercept;
  fit.smooth = fit.exponent >= options.smooth_threshold;
  return fit;
}

std::vector<double> refinement_gaps(const KernelSpec& spec, const CoefficientPair& pair,
                                    const InitialCondition& x0, std::uint64_t seed, int base_level,
                                    int refinements, std::size_t base_steps, double T) {
  std::vector<double> gaps;
  const BrownianGrid finest = sample_path(seed, base_level + refinements, base_steps, T);
  VolterraSolution coarse = solve_sve(spec, pair, x0, coarsen(finest, base_level));
  for (int r = 1; r <= refinements; ++r) {
    VolterraSolution fine = solve_sve(spec, pair, x0, coarsen(finest, base_level + r));
    double gap = 0.0;
    for (std::size_t k = 0; k < coarse.values.size(); ++k)
      gap = std::max(gap, std::abs(fine.values[2 * k] - coarse.values[k]));
    gaps.push_back(gap);
    coarse = std::move(fine);
  }
  return gaps;
}

}  // namespace volterra
