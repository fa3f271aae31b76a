// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "volterra/bessel.hpp"
#include "volterra/stats.hpp"
#include "volterra/verify.hpp"
#include "volterra/yw.hpp"

using namespace volterra;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_seconds > 0.0 && secs > budget_seconds) {
    o.pass = false;
    o.detail += " (over the time budget)";
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %2d %-26s %8.2fs  %s\n", o.pass ? "PASS" : "FAIL", id, name, secs, o.detail.c_str());
  std::fflush(stdout);
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::uint64_t n) {
  std::vector<std::uint64_t> s(n);
  std::iota(s.begin(), s.end(), first);
  return s;
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

int main() {
  constexpr double inf = std::numeric_limits<double>::infinity();

  criterion(1, "density normalization", 5.0, [] {
    double worst = 0.0;
    for (double alpha : {0.1, 0.25, 0.4}) {
      const auto spec = KernelSpec::make(alpha);
      for (double t : {0.01, 0.1, 1.0}) {
        boost::math::quadrature::tanh_sinh<double> ts;
        const double mass = ts.integrate([&](double x) { return density(spec, t, x); }, 0.0, inf);
        worst = std::max(worst, std::abs(mass - 1.0));
      }
    }
    return Outcome{worst < 1e-6, fmt("max |mass - 1| = %.3e", worst)};
  });

  criterion(2, "bessel half-integer forms", 1.0, [] {
    constexpr double pi = 3.141592653589793;
    double worst = 0.0;
    for (double z : logspace(0.01, 30.0, 2000)) {
      const double pre = std::sqrt(2.0 / (pi * z));
      worst = std::max(worst, std::abs(bessel_i(-0.5, z) / (pre * std::cosh(z)) - 1.0));
      worst = std::max(worst, std::abs(bessel_i(0.5, z) / (pre * std::sinh(z)) - 1.0));
    }
    return Outcome{worst < 1e-10, fmt("max relative error %.3e", worst)};
  });

  criterion(3, "chapman-kolmogorov", 60.0, [] {
    const TransitionDensity td(KernelSpec::make(0.25));
    double worst = 0.0;
    std::size_t points = 0;
    for (double s : linspace(0.1, 0.5, 5))
      for (double t : linspace(0.1, 0.5, 5))
        for (double x : linspace(0.1, 1.0, 5))
          for (double z : linspace(0.1, 1.0, 5)) {
            worst = std::max(worst, chapman_kolmogorov(td, s, t, x, z).relative_error);
            ++points;
          }
    return Outcome{worst < 1e-4, fmt("max relative error %.3e over %.0f points", worst, double(points))};
  });

  criterion(4, "kernel estimate slopes", 120.0, [] {
    bool ok = true;
    std::ostringstream os;
    for (double alpha : {0.1, 0.25}) {
      for (const auto& r : verify_kernel_lemmas(KernelSpec::make(alpha), LemmaSweep{})) {
        const bool good = r.exponent_fitted >= (1.0 - 2.0 * alpha) - 0.05;
        ok = ok && good;
        os << r.lemma << "@" << alpha << "=" << fmt("%.3f", r.exponent_fitted) << " ";
      }
    }
    return Outcome{ok, os.str()};
  });

  criterion(5, "solver oracles", 600.0, [] {
    const auto spec = KernelSpec::make(0.25);
    const auto det = solve_sve(spec, constant_pair(1.0, 0.0), constant_initial(0.0), sample_path(1, 12, 2));
    const double exact = 1.0 / 0.75;
    const double det_err = std::abs(det.values.back() - exact) / exact;

    const int level = 10;
    std::vector<double> ends(10000);
    parallel_for(ends.size(), [&](std::size_t i) {
      ends[i] = solve_sve(spec, constant_pair(0.0, 1.0), constant_initial(0.0), sample_path(i + 1, level, 2)).values.back();
    });
    const double var = sample_variance(ends);
    const double se = 2.0 * std::sqrt(2.0 / (ends.size() - 1.0));
    const bool ok = det_err < 0.01 && std::abs(var - 2.0) < 3.0 * se;
    return Outcome{ok, fmt("sigma=0 rel err %.2e; variance %.4f", det_err, var) + fmt(" (3 SE = %.4f)", 3.0 * se)};
  });

  criterion(6, "time hoelder exponent", 0.0, [] {
    const int level = 12;
    const double dt = 1.0 / (std::size_t{2} << level);
    const std::vector<std::size_t> lags{2, 4, 8, 16, 32, 64};
    bool ok = true;
    std::ostringstream os;
    for (auto [alpha, xi] : {std::pair{0.0, 0.75}, {0.25, 0.75}, {0.4, 0.9}}) {
      const auto spec = KernelSpec::make(alpha);
      const auto pair = builtin_power_diffusion(xi, 1.0, 0.5, -0.5);
      std::vector<std::vector<double>> paths(200);
      parallel_for(paths.size(), [&](std::size_t i) {
        paths[i] = solve_sve(spec, pair, constant_initial(1.0), sample_path(500 + i, level, 2)).values;
      });
      const auto fit = holder_estimate(paths, dt, lags);
      const double target = 0.5 - alpha;
      ok = ok && std::abs(fit.exponent - target) <= 0.1;
      os << fmt("alpha=%.2f: %.3f ", alpha, fit.exponent) << fmt("(target %.2f) ", target);
    }
    return Outcome{ok, os.str()};
  });

  criterion(7, "lift coherence", 0.0, [] {
    const auto spec = KernelSpec::make(0.25);
    const auto pair = builtin_power_diffusion(0.75, 0.5, 0.5, -0.5);
    std::size_t mismatches = 0, nodes = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto sol = solve_sve(spec, pair, constant_initial(1.0), sample_path(seed, 8, 2), KernelNormalization::c_theta);
      const auto space = space_grid(2.0, 21);
      const auto field = lift_field(sol, space);
      for (std::size_t k = 0; k < sol.times.size(); ++k, ++nodes)
        mismatches += field.at(k, 10) != sol.values[k];
    }
    return Outcome{mismatches == 0, fmt("%.0f of %.0f nodes differ", double(mismatches), double(nodes))};
  });

  criterion(8, "yamada-watanabe family", 0.0, [] {
    const auto fam = MollifierFamily::build(8);
    bool ok = true;
    double worst_mass = 0.0, worst_bump = 0.0;
    for (int n = 1; n <= 8; ++n) {
      ok = ok && fam.a(n) == std::exp(-0.5 * n * (n + 1.0)) && yw_level(n) == fam.a(n);
      ok = ok && fam.sup_gap(n) <= fam.a(n - 1);
      worst_mass = std::max(worst_mass, std::abs(fam.psi_mass(n) - 1.0));
      worst_bump = std::max(worst_bump, bump_mass_at_zero(n, 4.0, 0.75));
    }
    ok = ok && worst_mass < 1e-8 && worst_bump <= 2.0;
    return Outcome{ok, fmt("max |int psi - 1| = %.2e; max int Phi(0) = %.4f", worst_mass, worst_bump)};
  });

  criterion(9, "gronwall envelope", 0.0, [] {
    const auto grid = linspace(0.0, 1.0, 1025);
    bool zero = true;
    for (double v : gronwall_envelope(0.25, 0.0, 2.0, grid)) zero = zero && v == 0.0;
    const auto e = gronwall_envelope(0.0, 1.0, 1.0, grid);
    double worst = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) worst = std::max(worst, std::abs(e[k] / std::exp(grid[k]) - 1.0));
    return Outcome{zero && worst < 0.02,
                   std::string(zero ? "eps=0 envelope is zero; " : "eps=0 envelope is not zero; ") +
                       fmt("max relative gap to e^t %.3e", worst)};
  });

  criterion(10, "picard uniqueness", 900.0, [] {
    UniquenessOptions o;
    o.level = 10;
    o.iterations = 60;
    const auto r = picard_uniqueness(KernelSpec::make(0.25), builtin_power_diffusion(0.75, 0.5, 0.5, -0.5),
                                     constant_initial(1.0), seed_range(1, 50), o);
    const bool ok = r.monotone_after_transient && r.final_median_gap <= r.threshold && r.verdict == Verdict::consistent;
    return Outcome{ok, fmt("final median gap %.2e, threshold %.2e, ", r.final_median_gap, r.threshold) +
                           "verdict " + to_string(r.verdict) + (r.monotone_after_transient ? ", monotone" : ", not monotone")};
  });

  criterion(11, "dspde residual", 0.0, [] {
    const auto spec = KernelSpec::make(0.25);
    const InitialCondition x0{[](double t) { return 1.0 + t * t; }, "1+t^2"};
    const auto det = solve_sve(spec, constant_pair(0.0, 0.0), x0, sample_path(1, 10, 2), KernelNormalization::c_theta);
    const double det_res = dspde_residual(lift_field(det, space_grid(2.0, 201)), det, radial_test_function(spec, 1.0)).residual;

    const auto pair = builtin_power_diffusion(0.75, 0.5, 0.5, -0.5);
    std::vector<double> medians;
    for (auto [level, nodes] : {std::pair{6, 51}, {7, 101}, {8, 201}}) {
      const auto space = space_grid(2.0, static_cast<std::size_t>(nodes));
      std::vector<double> res(20);
      parallel_for(res.size(), [&](std::size_t i) {
        const auto sol = solve_sve(spec, pair, constant_initial(1.0), sample_path(i + 1, level, 2), KernelNormalization::c_theta);
        res[i] = dspde_residual(lift_field(sol, space), sol, radial_test_function(spec, 1.0)).residual;
      });
      medians.push_back(median(res));
    }
    const bool ok = det_res < 1e-3 && medians[1] < medians[0] && medians[2] < medians[1];
    std::ostringstream os;
    os << fmt("deterministic %.2e; stochastic medians ", det_res);
    for (double m : medians) os << fmt("%.2e ", m);
    return Outcome{ok, os.str()};
  });

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
