#include <doctest.h>

#include <boost/math/quadrature/trapezoidal.hpp>

#include <cmath>
#include <numeric>

#include "volterra/stats.hpp"
#include "volterra/verify.hpp"

using namespace volterra;

namespace {

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
  std::vector<std::uint64_t> s(n);
  std::iota(s.begin(), s.end(), 1);
  return s;
}

}  // namespace

TEST_CASE("gronwall envelope") {
  const auto grid = linspace(0.0, 1.0, 1025);
  for (double v : gronwall_envelope(0.25, 0.0, 3.0, grid)) CHECK(v == 0.0);
  const auto e = gronwall_envelope(0.0, 1.0, 1.0, grid);
  for (std::size_t k = 0; k < grid.size(); k += 64)
    CHECK(std::abs(e[k] / std::exp(grid[k]) - 1.0) < 0.02);
  CHECK(std::abs(e.back() / std::exp(1.0) - 1.0) < 0.02);
  for (double alpha : {0.0, 0.25, 0.4}) {
    const auto f = gronwall_envelope(alpha, 0.5, 2.0, grid);
    CHECK(f.front() == 0.5);
    for (std::size_t k = 1; k < f.size(); ++k) CHECK(f[k] >= f[k - 1]);
  }
  CHECK(gronwall_envelope(0.25, 1.0, 1.0, {}).empty());
  CHECK_THROWS_AS(gronwall_envelope(0.25, 1.0, 1.0, {0.0, 0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("picard: deterministic contraction") {
  CoefficientPair p = constant_pair(0.0, 0.0);
  p.mu = [](double, double x) { return -0.8 * x; };
  p.C_mu = 0.8;
  p.xi = 1.0;
  UniquenessOptions o;
  o.level = 6;
  o.iterations = 40;
  const auto r = picard_uniqueness(KernelSpec::make(0.25), p, constant_initial(1.0), seed_range(3), o);
  CHECK(r.final_median_gap < 1e-10);
  CHECK(r.verdict == Verdict::consistent);
  CHECK(r.monotone_after_transient);
  for (const auto& run : r.runs) CHECK(run.gaps.back() < 1e-10);
  CHECK(exit_code(r.verdict) == 0);
}

TEST_CASE("picard: admissible and inadmissible configurations") {
  UniquenessOptions o;
  o.level = 7;
  o.iterations = 50;
  const auto spec = KernelSpec::make(0.25);
  const auto r = picard_uniqueness(spec, builtin_power_diffusion(0.75, 0.5, 0.5, -0.5), constant_initial(1.0),
                                   seed_range(8), o);
  CHECK(r.admissible);
  CHECK(r.warnings.empty());
  CHECK(r.verdict == Verdict::consistent);
  CHECK(r.monotone_after_transient);
  CHECK(r.final_median_gap <= r.threshold);
  CHECK(r.median_gaps.size() == 50);
  CHECK(r.gronwall_envelope.size() == (std::size_t{2} << 7) + 1);
  nlohmann::json j = r;
  CHECK(j["verdict"] == "consistent");
  for (const char* key : {"seeds", "levels", "median_gaps", "gronwall_envelope_final", "final_gaps", "threshold", "noise_floor"})
    CHECK(j.contains(key));

  const auto bad = picard_uniqueness(spec, builtin_power_diffusion(0.5, 0.5), constant_initial(1.0), seed_range(4), o);
  CHECK_FALSE(bad.admissible);
  CHECK_FALSE(bad.warnings.empty());

  CHECK_THROWS_AS(picard_uniqueness(spec, builtin_power_diffusion(0.75, 0.5), constant_initial(1.0), {}, o),
                  std::invalid_argument);
  o.iterations = 2;
  CHECK_THROWS_AS(picard_uniqueness(spec, builtin_power_diffusion(0.75, 0.5), constant_initial(1.0), seed_range(1), o),
                  std::invalid_argument);
}

TEST_CASE("verdict codes") {
  CHECK(exit_code(Verdict::consistent) == 0);
  CHECK(exit_code(Verdict::violated) == 2);
  CHECK(exit_code(Verdict::inconclusive) == 3);
  CHECK(to_string(Verdict::inconclusive) == "inconclusive");
}

TEST_CASE("envelope dominance") {
  const auto spec = KernelSpec::make(0.25);
  const auto pair = builtin_power_diffusion(0.75, 0.5, 0.5, -0.5);
  const auto d = envelope_dominance(spec, pair, constant_initial(1.0), seed_range(40), 8, 2, 1e-3,
                                    pair.C_mu + pair.C_sigma);
  CHECK(d.dominated.size() == 40);
  CHECK(d.fraction > 0.0);
  CHECK(d.mean_dominated);
  CHECK(d.mean_gap.front() == doctest::Approx(1e-3));
  // sigma = 0: the gap obeys the deterministic inequality exactly.
  CoefficientPair lin = constant_pair(0.0, 0.0);
  lin.mu = [](double, double x) { return 0.7 * x; };
  lin.C_mu = 0.7;
  const auto e = envelope_dominance(spec, lin, constant_initial(1.0), seed_range(5), 7, 2, 0.1, 0.7);
  CHECK(e.fraction == 1.0);
}

TEST_CASE("delta_theta finite differences") {
  const auto spec = KernelSpec::make(0.25);
  const auto xs = linspace(-2.0, 2.0, 401);
  std::vector<double> ones(xs.size(), 1.0);
  for (double v : delta_theta_fd(spec, xs, ones)) CHECK(v == 0.0);
  // A smooth bump away from the origin: FD against the exact operator, second order.
  const auto f = bump_test_function(spec, 1.0, 0.5);
  auto fd_error = [&](const std::vector<double>& grid) {
    std::vector<double> vals;
    for (double x : grid) vals.push_back(f.value(x));
    const auto lap = delta_theta_fd(spec, grid, vals);
    double err = 0.0;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) err = std::max(err, std::abs(lap[i] - f.delta_theta(grid[i])));
    return err;
  };
  const double coarse = fd_error(xs), fine = fd_error(linspace(-2.0, 2.0, 801));
  CHECK(fine * 3.5 <= coarse);
  std::vector<double> vals;
  for (double x : xs) vals.push_back(f.value(x));
  const auto lap = delta_theta_fd(spec, xs, vals);
  // Conservative form: the interior sum of a compactly supported image vanishes.
  CHECK(std::abs(std::accumulate(lap.begin(), lap.end(), 0.0)) < 1e-9);
  CHECK_THROWS_AS(delta_theta_fd(spec, {0.0, 1.0}, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("partial integration identity") {
  const auto spec = KernelSpec::make(0.25);
  const auto phi = bump_test_function(spec, 1.2, 1.0);
  const double g1 = partial_integration_check(spec, 0.5, 0.3, phi, 0.01);
  const double g2 = partial_integration_check(spec, 0.5, 0.3, phi, 0.005);
  CHECK(g1 < 1e-4);
  CHECK(g2 * 4.0 <= g1);
  CHECK(partial_integration_check(spec, 0.5, 0.3, zero_function(), 0.01) == 0.0);
  CHECK(partial_integration_check(spec, 0.5, 0.0, phi, 0.01) < 1e-4);
  CHECK_THROWS_AS(bump_test_function(spec, 0.1, 0.4), std::invalid_argument);
}

TEST_CASE("dspde residual: zero test function and support escape") {
  const auto spec = KernelSpec::make(0.25);
  const auto sol = solve_sve(spec, builtin_power_diffusion(0.75, 0.5), constant_initial(1.0), sample_path(1, 5, 2),
                             KernelNormalization::c_theta);
  const auto field = lift_field(sol, space_grid(2.0, 41));
  const auto z = dspde_residual(field, sol, zero_test_function());
  CHECK(z.residual == 0.0);
  CHECK(z.lhs == 0.0);
  CHECK_THROWS_AS(dspde_residual(field, sol, radial_test_function(spec, 1.95)), std::domain_error);
}

TEST_CASE("dspde residual: deterministic sub-case") {
  // sigma = mu = 0 and a moving initial condition: a pure quadrature identity.
  const auto spec = KernelSpec::make(0.25);
  const InitialCondition x0{[](double t) { return 1.0 + t * t; }, "1+t^2"};
  const auto phi = radial_test_function(spec, 1.0);
  std::vector<double> res;
  for (int level : {6, 8, 10}) {
    const auto sol = solve_sve(spec, constant_pair(0.0, 0.0), x0, sample_path(1, level, 2), KernelNormalization::c_theta);
    const auto d = dspde_residual(lift_field(sol, space_grid(2.0, 201)), sol, phi);
    CHECK(d.drift == 0.0);
    CHECK(d.noise == 0.0);
    res.push_back(d.residual);
  }
  CHECK(res.back() < 1e-3);
  CHECK(res[1] < res[0]);
  CHECK(res[2] < res[1]);
  nlohmann::json j = DspdeTerms{};
  CHECK(j.contains("residual"));
}
