#include "volterra/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "volterra/quadrature.hpp"
#include "volterra/stats.hpp"

namespace volterra {

namespace {

constexpr std::size_t kMaxTerms = 200000;
constexpr double kRescale = 1e250;

// sum_k (z^2/4)^k / (k! Gamma(nu + k + 1)) represented as mantissa * exp(log_scale).
struct SeriesSum {
  double mantissa = 0.0;
  double log_scale = 0.0;
  std::size_t terms = 0;
};

SeriesSum reduced_series(double nu, double z, std::size_t fixed_terms = 0) {
  if (!(nu > -1.0)) throw std::domain_error("Bessel order must exceed -1");
  if (!(z >= 0.0) || !std::isfinite(z)) throw std::domain_error("Bessel argument must be finite and >= 0");
  const double q = 0.25 * z * z;
  SeriesSum s;
  s.log_scale = -std::lgamma(nu + 1.0);
  double term = 1.0;
  s.mantissa = 1.0;
  s.terms = 1;
  for (std::size_t k = 0;; ++k) {
    if (fixed_terms && s.terms >= fixed_terms) break;
    const double kk = static_cast<double>(k);
    const double ratio = q / ((kk + 1.0) * (nu + kk + 1.0));
    if (fixed_terms == 0) {
      // Terms decrease from here on once ratio < 1; the geometric tail bound
      // term * r / (1 - r) then dominates the remainder.
      if (ratio < 1.0 && term * ratio / (1.0 - ratio) < 1e-17 * s.mantissa) break;
      if (q == 0.0) break;
    }
    term *= ratio;
    s.mantissa += term;
    ++s.terms;
    if (s.mantissa > kRescale) {
      s.mantissa /= kRescale;
      term /= kRescale;
      s.log_scale += std::log(kRescale);
    }
    if (s.terms > kMaxTerms) throw std::range_error("Bessel series did not terminate");
  }
  return s;
}

double assemble(const SeriesSum& s, double log_prefactor) {
  const double v = s.mantissa * std::exp(s.log_scale + log_prefactor);
  if (!std::isfinite(v)) throw std::range_error("Bessel value overflows double precision");
  return v;
}

double zero_argument(double nu) {
  if (nu > 0.0) return 0.0;
  if (nu == 0.0) return 1.0;
  throw std::range_error("I_nu(0) diverges for negative order");
}

}  // namespace

double bessel_i(double nu, double z) {
  const SeriesSum s = reduced_series(nu, z);
  if (z == 0.0) return zero_argument(nu);
  return assemble(s, nu * std::log(0.5 * z));
}

double bessel_i_scaled(double nu, double z) {
  const SeriesSum s = reduced_series(nu, z);
  if (z == 0.0) return zero_argument(nu);
  return assemble(s, nu * std::log(0.5 * z) - z);
}

double bessel_i_reduced(double nu, double z) { return assemble(reduced_series(nu, z), 0.0); }

double bessel_i_partial(double nu, double z, std::size_t n_terms) {
  if (n_terms == 0) return 0.0;
  const SeriesSum s = reduced_series(nu, z, n_terms);
  if (z == 0.0) return zero_argument(nu);
  return assemble(s, nu * std::log(0.5 * z));
}

std::size_t bessel_i_terms(double nu, double z) { return reduced_series(nu, z).terms; }

// ---------------------------------------------------------------------------

TransitionDensity::TransitionDensity(KernelSpec spec) : spec_(spec) {
  if (spec_.degenerate()) throw std::domain_error("transition density needs alpha > 0");
}

double TransitionDensity::operator()(double t, double x, double y) const {
  if (!(t > 0.0)) throw std::domain_error("transition density requires t > 0");
  if (x == 0.0) return density(spec_, t, y);
  if (y == 0.0) return density(spec_, t, x);
  const double s = spec_.space_power();
  const double nu = spec_.bessel_order();
  const double a = std::pow(std::abs(x), 0.5 * s);
  const double b = std::pow(std::abs(y), 0.5 * s);
  const double z = a * b / t;
  if (z <= 50.0) {
    // (s / 2t) |xy|^((s-1)/2) (z/2)^nu = (s / 2t) (2t)^(-nu)
    return s / (2.0 * t) * std::pow(2.0 * t, -nu) * std::exp(-(a * a + b * b) / (2.0 * t)) *
           bessel_i_reduced(nu, z);
  }
  const double d = a - b;
  return s / (2.0 * t) * std::pow(std::abs(x * y), 0.5 * (s - 1.0)) *
         std::exp(-d * d / (2.0 * t)) * bessel_i_scaled(nu, z);
}

double TransitionDensity::support_bound(double t, double x) const {
  const double s = spec_.space_power();
  const double a = std::pow(std::abs(x), 0.5 * s);
  // (b - a)^2 / 2t > 41.5 covers the Gaussian-type factor down to ~1e-18.
  const double b = a + std::sqrt(83.0 * t);
  return std::pow(b, 2.0 / s);
}

namespace {

quad::Result integrate_half_line(const quad::Integrand& f, double upper) {
  // Fixed panels keep GK from missing the narrow peak at small times.
  constexpr int kPanels = 16;
  std::vector<double> breaks(kPanels + 1);
  for (int i = 0; i <= kPanels; ++i) breaks[i] = upper * i / kPanels;
  return quad::integrate_panels(f, breaks, {1e-13, 15});
}

}  // namespace

ChapmanKolmogorovPoint chapman_kolmogorov(const TransitionDensity& td, double s, double t,
                                          double x, double z) {
  ChapmanKolmogorovPoint p{s, t, x, z};
  const double upper = std::max(td.support_bound(s, x), td.support_bound(t, z));
  const auto q = integrate_half_line([&](double u) { return td(s, x, u) * td(t, u, z); }, upper);
  p.composed = q.value;
  p.direct = td(s + t, x, z);
  p.relative_error = std::abs(p.composed - p.direct) / std::abs(p.direct);
  p.converged = q.converged;
  return p;
}

double transition_mass(const TransitionDensity& td, double t, double x) {
  return integrate_half_line([&](double y) { return td(t, x, y); }, td.support_bound(t, x)).value;
}

UpperBoundReport upper_bound_check(const TransitionDensity& td, std::size_t samples,
                                   double probe_x, double probe_t) {
  UpperBoundReport r;
  r.samples = samples;
  r.probe_x = probe_x;
  r.probe_t = probe_t;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> ut(0.01, 2.0), ux(-2.0, 2.0);
  r.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = ut(rng), x = ux(rng), y = ux(rng);
    r.min_value = std::min(r.min_value, td(t, x, y));
  }
  r.positive = samples == 0 || r.min_value >= 0.0;

  const double branch = density(td.spec(), probe_t, probe_x);
  for (int k = 1; k <= 8; ++k) {
    const double y = std::pow(10.0, -k);
    r.y_mesh.push_back(y);
    r.limit_gap.push_back(std::abs(td(probe_t, probe_x, y) - branch) / branch);
  }

  const auto ts = logspace(0.05, 20.0, 60);
  std::vector<double> v;
  for (double t : ts) v.push_back(td(t, 0.3, 0.7));
  std::size_t from = ts.size() - 1;
  while (from > 0 && v[from - 1] > v[from]) --from;
  r.decreasing_from = ts[from];
  return r;
}

void to_json(nlohmann::json& j, const ChapmanKolmogorovPoint& p) {
  j = {{"s", p.s},           {"t", p.t},         {"x", p.x},
       {"z", p.z},           {"composed", p.composed}, {"direct", p.direct},
       {"relative_error", p.relative_error}, {"converged", p.converged}};
}

void to_json(nlohmann::json& j, const UpperBoundReport& r) {
  j = {{"samples", r.samples},     {"min_value", r.min_value},
       {"positive", r.positive},   {"y_mesh", r.y_mesh},
       {"limit_gap", r.limit_gap}, {"probe_x", r.probe_x},
       {"probe_t", r.probe_t},     {"decreasing_from", r.decreasing_from}};
}

}  // namespace volterra
