#include <doctest.h>

#include <cmath>

#include "volterra/solver.hpp"
#include "volterra/stats.hpp"

using namespace volterra;

namespace {

CoefficientPair drift_only(double m) { return constant_pair(m, 0.0); }

// Discrete Ito isometry of the scheme with sigma = 1: sum_m noise[m]^2 dt.
double discrete_variance(const KernelSpec& spec, int level) {
  const std::size_t n = std::size_t{2} << level;
  const auto w = scheme_weights(spec, 1.0 / n, n, 0.0, KernelNormalization::plain);
  double v = 0.0;
  for (double x : w.noise) v += x * x * w.dt;
  return v;
}

}  // namespace

TEST_CASE("constant drift reproduces the kernel integral exactly") {
  const auto spec = KernelSpec::make(0.25);
  for (int level : {2, 6, 10}) {
    const auto sol = solve_sve(spec, drift_only(1.0), constant_initial(0.0), sample_path(1, level, 2));
    CHECK(sol.values.front() == 0.0);
    CHECK(std::abs(sol.values.back() - 4.0 / 3.0) < 1e-12);
    for (std::size_t k = 1; k < sol.times.size(); k += 17)
      CHECK(std::abs(sol.values[k] - std::pow(sol.times[k], 0.75) / 0.75) < 1e-12);
  }
}

TEST_CASE("alpha = 0 linear ODE converges to exp(-1)") {
  const auto spec = KernelSpec::make(0.0);
  CoefficientPair p = constant_pair(0.0, 0.0);
  p.mu = [](double, double x) { return -x; };
  p.C_mu = 1.0;
  double prev = 1.0;
  for (int level : {6, 8, 10}) {
    const auto sol = solve_sve(spec, p, constant_initial(1.0), sample_path(1, level, 2));
    const double err = std::abs(sol.values.back() - std::exp(-1.0));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("stochastic convolution variance") {
  const auto spec = KernelSpec::make(0.25);
  // The discrete isometry approaches 1 / (1 - 2 alpha) = 2 from below.
  double prev = 0.0;
  for (int level : {4, 6, 8, 10, 12}) {
    const double v = discrete_variance(spec, level);
    CHECK(v > prev);
    CHECK(v < 2.0);
    prev = v;
  }
  CHECK(2.0 - prev < 0.01);

  const int level = 6;
  std::vector<double> ends(4000);
  parallel_for(ends.size(), [&](std::size_t i) {
    ends[i] = solve_sve(spec, constant_pair(0.0, 1.0), constant_initial(0.0), sample_path(i + 1, level, 2)).values.back();
  });
  const double target = discrete_variance(spec, level);
  const double se = target * std::sqrt(2.0 / (ends.size() - 1.0));
  CHECK(std::abs(sample_variance(ends) - target) < 3.0 * se);
}

TEST_CASE("scheme weights") {
  const auto spec = KernelSpec::make(0.25);
  const auto w = scheme_weights(spec, 0.125, 8, 0.0, KernelNormalization::plain);
  REQUIRE(w.drift.size() == 8);
  for (std::size_t m = 0; m < 8; ++m) CHECK(w.noise[m] == w.drift[m] / 0.125);
  std::vector<double> mu(8, 1.0), noise(8, 0.0);
  CHECK(convolve(w, mu, noise, 0) == 0.0);
  CHECK(std::abs(convolve(w, mu, noise, 8) - 4.0 / 3.0) < 1e-14);
}

TEST_CASE("blow-up is reported with the step index") {
  CoefficientPair p = constant_pair(0.0, 0.0);
  p.mu = [](double, double x) { return 1e3 * x * x; };
  try {
    solve_sve(KernelSpec::make(0.0), p, constant_initial(1.0), sample_path(1, 8, 2));
    FAIL("expected a blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.step > 0);
    CHECK(e.step <= 512);
  }
}

TEST_CASE("inadmissible xi runs with a warning") {
  const auto sol = solve_sve(KernelSpec::make(0.25), builtin_power_diffusion(0.5, 1.0), constant_initial(1.0),
                             sample_path(3, 4, 2));
  CHECK_FALSE(sol.warnings.empty());
  const auto ok = solve_sve(KernelSpec::make(0.25), builtin_power_diffusion(0.75, 1.0), constant_initial(1.0),
                            sample_path(3, 4, 2));
  CHECK(ok.warnings.empty());
}

TEST_CASE("volterra map fixed point is the solution") {
  const auto spec = KernelSpec::make(0.25);
  const auto pair = builtin_power_diffusion(0.75, 0.5, 0.5, -0.5);
  const auto path = sample_path(9, 6, 2);
  const auto sol = solve_sve(spec, pair, constant_initial(1.0), path);
  const auto w = scheme_weights(spec, sol.dt, path.n_steps(), 0.0, KernelNormalization::plain);
  const auto image = volterra_map(w, pair, sol.times, sol.x0_values, path.increments, sol.values);
  CHECK(image == sol.values);
}

TEST_CASE("lift coherence, far field and symmetry") {
  const auto spec = KernelSpec::make(0.25);
  const auto pair = builtin_power_diffusion(0.75, 0.5, 0.5, -0.5);
  const auto sol = solve_sve(spec, pair, constant_initial(1.0), sample_path(4, 7, 2), KernelNormalization::c_theta);
  const auto space = space_grid(4.0, 41);
  REQUIRE(space[20] == 0.0);
  const auto field = lift_field(sol, space);
  double max_abs_x = 0.0;
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    CHECK(field.at(k, 20) == sol.values[k]);
    for (std::size_t i = 0; i < space.size(); ++i) {
      CHECK(field.at(k, i) == field.at(k, space.size() - 1 - i));
      CHECK(field.z_at(k, i) == field.at(k, i) - sol.x0_values[k]);
      max_abs_x = std::max(max_abs_x, std::abs(field.at(k, i)));
    }
  }
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    CHECK(std::abs(field.z_at(k, 0)) < 1e-6 * (1.0 + max_abs_x));
    CHECK(std::abs(field.z_at(k, 40)) < 1e-6 * (1.0 + max_abs_x));
  }
  const auto plain = solve_sve(KernelSpec::make(0.0), pair, constant_initial(1.0), sample_path(4, 3, 2));
  CHECK_THROWS_AS(lift_field(plain, space), std::domain_error);
}

TEST_CASE("space grid") {
  const auto g = space_grid(2.0, 5);
  REQUIRE(g.size() == 5);
  CHECK(g[0] == -2.0);
  CHECK(g[2] == 0.0);
  CHECK(g[4] == 2.0);
  CHECK(g[1] == -g[3]);
  CHECK_THROWS_AS(space_grid(2.0, 1), std::invalid_argument);
}

TEST_CASE("Hoelder estimates") {
  const std::vector<std::size_t> lags{2, 4, 8, 16, 32};
  const int level = 10;
  auto samples_for = [&](double alpha, const CoefficientPair& pair) {
    std::vector<std::vector<double>> out(120);
    parallel_for(out.size(), [&](std::size_t i) {
      out[i] = solve_sve(KernelSpec::make(alpha), pair, constant_initial(1.0), sample_path(100 + i, level, 2)).values;
    });
    return out;
  };
  const double dt = 1.0 / 2048;
  const auto rough = holder_estimate(samples_for(0.25, constant_pair(0.0, 1.0)), dt, lags);
  CHECK(std::abs(rough.exponent - 0.25) < 0.1);
  CHECK_FALSE(rough.smooth);
  const auto bm = holder_estimate(samples_for(0.0, constant_pair(0.0, 1.0)), dt, lags);
  CHECK(std::abs(bm.exponent - 0.5) < 0.1);
  const auto smooth = holder_estimate(samples_for(0.25, drift_only(1.0)), dt, lags);
  CHECK(smooth.exponent >= 0.9);
  CHECK(smooth.smooth);

  std::vector<std::vector<double>> few(10, std::vector<double>(100, 0.0));
  CHECK_THROWS_AS(holder_estimate(few, dt, lags), std::invalid_argument);
  CHECK_THROWS_AS(holder_estimate(samples_for(0.0, constant_pair(0.0, 1.0)), dt, {2, 4, 8}), std::invalid_argument);
  CHECK_THROWS_AS(holder_estimate(samples_for(0.0, constant_pair(0.0, 1.0)), dt, {2, 3, 4, 5}), std::invalid_argument);
}

TEST_CASE("refinement gaps shrink and moments stay put") {
  const auto spec = KernelSpec::make(0.25);
  const auto pair = builtin_power_diffusion(0.75, 0.5, 0.5, -0.5);
  const std::size_t seeds = 50;
  std::vector<std::vector<double>> gaps(seeds);
  parallel_for(seeds, [&](std::size_t i) { gaps[i] = refinement_gaps(spec, pair, constant_initial(1.0), i + 1, 6, 3, 2); });
  std::vector<double> med;
  for (int r = 0; r < 3; ++r) {
    std::vector<double> col;
    for (const auto& g : gaps) col.push_back(g[r]);
    med.push_back(median(col));
  }
  CHECK(med[1] < med[0]);
  CHECK(med[2] < med[1]);

  std::vector<double> m4;
  for (int level : {6, 7, 8}) {
    std::vector<double> ends(400);
    parallel_for(ends.size(), [&](std::size_t i) {
      ends[i] = std::pow(solve_sve(spec, pair, constant_initial(1.0), sample_path(i + 1, level, 2)).values.back(), 4);
    });
    m4.push_back(mean(ends));
  }
  CHECK(std::abs(m4[2] / m4[1] - 1.0) < 0.1);
  CHECK(std::abs(m4[1] / m4[0] - 1.0) < 0.1);
}
