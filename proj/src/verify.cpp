#include "volterra/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "volterra/bessel.hpp"
#include "volterra/driver.hpp"
#include "volterra/quadrature.hpp"
#include "volterra/stats.hpp"

namespace volterra {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::consistent: return "consistent";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::consistent: return 0;
    case Verdict::violated: return 2;
    case Verdict::inconclusive: return 3;
  }
  return 3;
}

namespace {

double sup_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double g = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) g = std::max(g, std::abs(a[k] - b[k]));
  return g;
}

double kernel_factor(const KernelSpec& spec, KernelNormalization n) {
  return n == KernelNormalization::c_theta ? spec.c_theta() : 1.0;
}

}  // namespace

UniquenessReport picard_uniqueness(const KernelSpec& spec, const CoefficientPair& pair,
                                   const InitialCondition& x0, const std::vector<std::uint64_t>& seeds,
                                   const UniquenessOptions& options) {
  if (seeds.empty()) throw std::invalid_argument("uniqueness study needs at least one seed");
  if (options.iterations < 3) throw std::invalid_argument("uniqueness study needs >= 3 iterations");
  UniquenessReport r;
  r.seeds = seeds;
  r.levels = {options.level};
  r.admissible = xi_admissible(spec.alpha(), pair.xi);
  if (!r.admissible) {
    std::ostringstream os;
    os << "xi = " << pair.xi << " is not admissible for alpha = " << spec.alpha() << " (needs xi > "
       << xi_threshold(spec.alpha()) << "); the theory does not cover this configuration";
    r.warnings.push_back(os.str());
  }

  const std::size_t n = options.base_steps << options.level;
  const double dt = options.T / static_cast<double>(n);
  const SchemeWeights w = scheme_weights(spec, dt, n, 0.0, options.normalization);

  r.runs.resize(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    const BrownianGrid path = sample_path(seeds[i], options.level, options.base_steps, options.T);
    std::vector<double> times(n + 1), x0v(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      times[k] = path.time(k);
      x0v[k] = x0.x0(times[k]);
    }
    std::vector<double> a = x0v, b = x0v;
    for (double& v : b) v += options.init_shift;
    SeedRun run;
    run.seed = seeds[i];
    int rising = 0;
    for (int it = 0; it < options.iterations; ++it) {
      a = volterra_map(w, pair, times, x0v, path.increments, a);
      b = volterra_map(w, pair, times, x0v, path.increments, b);
      run.gaps.push_back(sup_gap(a, b));
      if (it > 0 && run.gaps[it] > run.gaps[it - 1]) {
        if (++rising >= 5) run.diverging = true;
      } else {
        rising = 0;
      }
    }
    run.sup_abs = max_abs(a);
    r.runs[i] = std::move(run);
  });

  std::vector<double> sups;
  for (const auto& run : r.runs) sups.push_back(run.sup_abs);
  r.median_sup_abs = median(sups);
  r.noise_floor = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + r.median_sup_abs);
  r.threshold = options.gap_threshold * (1.0 + r.median_sup_abs);
  for (int it = 0; it < options.iterations; ++it) {
    std::vector<double> g;
    for (const auto& run : r.runs) g.push_back(run.gaps[it]);
    r.median_gaps.push_back(median(g));
  }
  r.final_median_gap = r.median_gaps.back();
  r.monotone_after_transient = true;
  for (std::size_t i = 2; i < r.median_gaps.size(); ++i) {
    if (r.median_gaps[i] > r.median_gaps[i - 1] && r.median_gaps[i] > r.noise_floor)
      r.monotone_after_transient = false;
  }
  std::size_t diverging = 0;
  for (const auto& run : r.runs) diverging += run.diverging;
  if (diverging) r.warnings.push_back(std::to_string(diverging) + " seed(s) showed 5 consecutive gap increases");

  std::vector<double> times(n + 1);
  for (std::size_t k = 0; k <= n; ++k) times[k] = options.T * static_cast<double>(k) / static_cast<double>(n);
  r.gronwall_envelope = gronwall_envelope(spec.alpha(), options.init_shift,
                                          kernel_factor(spec, options.normalization) * (pair.C_mu + pair.C_sigma), times);

  if (r.final_median_gap <= r.threshold) {
    r.verdict = Verdict::consistent;
  } else {
    // Two candidates that stop approaching each other well above the
    // threshold point to distinct fixed points of the map.
    const std::size_t k = r.median_gaps.size();
    const double earlier = r.median_gaps[k >= 11 ? k - 11 : 0];
    const bool stalled = r.final_median_gap >= 0.5 * earlier;
    r.verdict = stalled && r.final_median_gap > 10.0 * r.threshold ? Verdict::violated : Verdict::inconclusive;
  }
  return r;
}

std::vector<double> gronwall_envelope(double alpha, double eps, double C, const std::vector<double>& t_grid) {
  if (t_grid.empty()) return {};
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (!(t_grid[k] > t_grid[k - 1])) throw std::invalid_argument("time grid must increase");
  const KernelSpec spec = KernelSpec::make(alpha, std::max(t_grid.back(), 1e-300));
  std::vector<double> f(t_grid.size());
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += drift_weight(spec, t_grid[k], t_grid[j], t_grid[j + 1]) * f[j];
    f[k] = eps + C * acc;
  }
  return f;
}

EnvelopeDominance envelope_dominance(const KernelSpec& spec, const CoefficientPair& pair,
                                     const InitialCondition& x0, const std::vector<std::uint64_t>& seeds,
                                     int level, std::size_t base_steps, double eps, double C,
                                     KernelNormalization normalization) {
  EnvelopeDominance d;
  d.eps = eps;
  d.C = C;
  d.dominated.resize(seeds.size());
  const InitialCondition shifted{[&](double t) { return x0.x0(t) + eps; }, "shifted"};
  std::vector<char> ok(seeds.size());
  std::vector<std::vector<double>> gaps(seeds.size());
  std::vector<double> env;
  parallel_for(seeds.size(), [&](std::size_t i) {
    const BrownianGrid path = sample_path(seeds[i], level, base_steps, spec.horizon());
    const auto a = solve_sve(spec, pair, x0, path, normalization);
    const auto b = solve_sve(spec, pair, shifted, path, normalization);
    const auto e = gronwall_envelope(spec.alpha(), eps, C, a.times);
    bool below = true;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
      gaps[i].push_back(std::abs(b.values[k] - a.values[k]));
      below = below && gaps[i][k] <= e[k] * (1.0 + 1e-12);
    }
    ok[i] = below;
    if (i == 0) env = e;
  });
  std::size_t count = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    d.dominated[i] = ok[i];
    count += ok[i];
  }
  d.fraction = seeds.empty() ? 0.0 : static_cast<double>(count) / static_cast<double>(seeds.size());
  if (seeds.empty()) return d;
  d.mean_gap.assign(env.size(), 0.0);
  for (const auto& g : gaps)
    for (std::size_t k = 0; k < g.size(); ++k) d.mean_gap[k] += g[k] / static_cast<double>(seeds.size());
  d.mean_dominated = true;
  for (std::size_t k = 0; k < env.size(); ++k)
    d.mean_dominated = d.mean_dominated && d.mean_gap[k] <= env[k] * (1.0 + 1e-12);
  return d;
}

// ---------------------------------------------------------------------------

std::vector<double> delta_theta_fd(const KernelSpec& spec, const std::vector<double>& xs,
                                   const std::vector<double>& values) {
  const std::size_t n = xs.size();
  if (values.size() != n || n < 3) throw std::invalid_argument("delta_theta_fd needs >= 3 matching nodes");
  const double h = xs[1] - xs[0];
  const double th = *spec.theta();
  const double s = spec.space_power();
  const double scale = 2.0 / (s * s) / (h * h);
  std::vector<double> out(n, 0.0);
  std::vector<double> flux(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double mid = 0.5 * (xs[i] + xs[i + 1]);
    flux[i] = std::pow(std::abs(mid), -th) * (values[i + 1] - values[i]);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = scale * (flux[i] - flux[i - 1]);
  return out;
}

namespace {

constexpr double kBumpAtZero = 0.36787944117144232160;  // exp(-1)

double bump(double v) { return std::abs(v) >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - v * v)); }

}  // namespace

SpaceTimeTest radial_test_function(const KernelSpec& spec, double radius, double kappa) {
  if (spec.degenerate()) throw std::domain_error("test functions for Delta_theta need alpha > 0");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  const double s = spec.space_power();
  const double rs = std::pow(radius, s);
  SpaceTimeTest f;
  f.center = 0.0;
  f.radius = radius;
  f.value = [=](double t, double x) { return (1.0 + kappa * t) * bump(std::pow(std::abs(x), s) / rs) / kBumpAtZero; };
  f.ds = [=](double, double x) { return kappa * bump(std::pow(std::abs(x), s) / rs) / kBumpAtZero; };
  return f;
}

SpaceTimeTest zero_test_function() {
  SpaceTimeTest f;
  f.value = [](double, double) { return 0.0; };
  f.ds = [](double, double) { return 0.0; };
  f.radius = 0.0;
  return f;
}

DspdeTerms dspde_residual(const RandomField& field, const VolterraSolution& solution, const SpaceTimeTest& phi) {
  const auto& xs = field.space;
  const std::size_t m = xs.size();
  const std::size_t n = solution.drift.size();
  if (m < 3 || field.times.size() != n + 1) throw std::invalid_argument("field and solution do not match");
  const double h = xs[1] - xs[0];
  if (std::abs(phi.center) + phi.radius >= std::min(-xs.front(), xs.back()) - h)
    throw std::domain_error("test function support leaves the space grid");
  const KernelSpec& spec = solution.spec;
  const double dt = solution.dt;

  DspdeTerms d;
  d.source_mass = 2.0;
  std::vector<double> ph(m), row(m);
  auto phi_row = [&](double s) {
    for (std::size_t i = 0; i < m; ++i) ph[i] = phi.value(s, xs[i]);
  };

  phi_row(field.times[n]);
  for (std::size_t i = 0; i < m; ++i) row[i] = field.at(n, i) * ph[i];
  d.lhs = quad::trapezoid(row, h);

  phi_row(0.0);
  d.initial = solution.x0_values[0] * quad::trapezoid(ph, h);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = field.times[k];
    phi_row(s);
    const double mass = quad::trapezoid(ph, h);
    d.initial += mass * (solution.x0_values[k + 1] - solution.x0_values[k]);
    const auto lap = delta_theta_fd(spec, xs, ph);
    for (std::size_t i = 0; i < m; ++i) row[i] = field.at(k, i) * (lap[i] + phi.ds(s, xs[i]));
    d.evolution += dt * quad::trapezoid(row, h);
    const double at0 = phi.value(s, 0.0);
    d.drift += d.source_mass * solution.drift[k] * at0 * dt;
    d.noise += d.source_mass * solution.noise[k] * at0;
  }
  const double rhs = d.initial + d.evolution + d.drift + d.noise;
  const double scale = std::max({std::abs(d.lhs), std::abs(d.initial), std::abs(d.evolution),
                                 std::abs(d.drift), std::abs(d.noise)});
  d.residual = scale == 0.0 ? 0.0 : std::abs(d.lhs - rhs) / scale;
  return d;
}

TestFunction bump_test_function(const KernelSpec& spec, double center, double radius) {
  if (spec.degenerate()) throw std::domain_error("test functions for Delta_theta need alpha > 0");
  if (!(radius > 0.0) || std::abs(center) < radius) throw std::invalid_argument("bump must stay away from the origin");
  const double th = *spec.theta();
  const double s = spec.space_power();
  TestFunction f;
  f.lo = center - radius;
  f.hi = center + radius;
  f.value = [=](double x) { return bump((x - center) / radius); };
  f.delta_theta = [=](double x) {
    const double u = (x - center) / radius;
    if (std::abs(u) >= 1.0) return 0.0;
    const double b = bump(u);
    const double w = 1.0 - u * u;
    const double d1 = -2.0 * u / (w * w) * b / radius;
    const double d2 = (6.0 * u * u * u * u - 2.0) / (w * w * w * w) * b / (radius * radius);
    const double ax = std::abs(x);
    const double sgn = x < 0.0 ? -1.0 : 1.0;
    return 2.0 / (s * s) * (std::pow(ax, -th) * d2 - th * std::pow(ax, -th - 1.0) * sgn * d1);
  };
  return f;
}

TestFunction zero_function() {
  TestFunction f;
  f.value = [](double) { return 0.0; };
  f.delta_theta = [](double) { return 0.0; };
  return f;
}

double partial_integration_check(const KernelSpec& spec, double t, double y, const TestFunction& phi, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("mesh width must be positive");
  const TransitionDensity td(spec);
  const double reach = std::max({std::abs(phi.lo), std::abs(phi.hi), h}) + 3.0 * h;
  const long K = static_cast<long>(std::ceil(reach / h));
  std::vector<double> xs, p, f, lap_exact;
  for (long i = -K; i <= K; ++i) {
    const double x = static_cast<double>(i) * h;
    xs.push_back(x);
    p.push_back(td(t, std::abs(x), y));
    f.push_back(phi.value(x));
    lap_exact.push_back(phi.delta_theta(x));
  }
  const auto lap_p = delta_theta_fd(spec, xs, p);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    lhs += h * p[i] * lap_exact[i];
    rhs += h * lap_p[i] * f[i];
  }
  return std::abs(lhs - rhs);
}

void to_json(nlohmann::json& j, const SeedRun& r) {
  j = {{"seed", r.seed}, {"gaps", r.gaps}, {"sup_abs", r.sup_abs}, {"diverging", r.diverging}};
}

void to_json(nlohmann::json& j, const UniquenessReport& r) {
  std::vector<double> finals;
  for (const auto& run : r.runs) finals.push_back(run.gaps.back());
  j = {{"seeds", r.seeds},
       {"levels", r.levels},
       {"final_gaps", finals},
       {"median_gaps", r.median_gaps},
       {"median_sup_abs", r.median_sup_abs},
       {"noise_floor", r.noise_floor},
       {"threshold", r.threshold},
       {"final_median_gap", r.final_median_gap},
       {"monotone_after_transient", r.monotone_after_transient},
       {"gronwall_envelope_final", r.gronwall_envelope.empty() ? 0.0 : r.gronwall_envelope.back()},
       {"admissible", r.admissible},
       {"verdict", to_string(r.verdict)},
       {"warnings", r.warnings}};
}

void to_json(nlohmann::json& j, const DspdeTerms& d) {
  j = {{"lhs", d.lhs},       {"initial", d.initial},          {"evolution", d.evolution},
       {"drift", d.drift},   {"noise", d.noise},              {"source_mass", d.source_mass},
       {"residual", d.residual}};
}

}  // namespace volterra
