#include "volterra/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "volterra/quadrature.hpp"
#include "volterra/stats.hpp"

namespace volterra {

KernelNormalization parse_normalization(const std::string& name) {
  if (name == "plain") return KernelNormalization::plain;
  if (name == "c_theta") return KernelNormalization::c_theta;
  throw std::invalid_argument("unknown kernel normalization '" + name + "'");
}

std::string to_string(KernelNormalization n) {
  return n == KernelNormalization::plain ? "plain" : "c_theta";
}

KernelSpec::KernelSpec(double alpha, double horizon) : alpha_(alpha), horizon_(horizon) {
  if (alpha_ > 0.0) {
    theta_ = 1.0 / alpha_ - 2.0;
    const double s = 2.0 + *theta_;
    c_theta_ = s * std::pow(2.0, -1.0 / s) / std::tgamma(1.0 / s);
  }
}

KernelSpec KernelSpec::make(double alpha, double horizon) {
  if (!std::isfinite(alpha) || alpha < 0.0 || alpha >= 0.5)
    throw std::domain_error("alpha must lie in [0, 1/2)");
  if (!std::isfinite(horizon) || horizon <= 0.0) throw std::domain_error("horizon must be positive");
  return KernelSpec(alpha, horizon);
}

double KernelSpec::space_power() const {
  if (!theta_) throw std::domain_error("density family is disabled for alpha = 0");
  return 2.0 + *theta_;
}

double KernelSpec::bessel_order() const {
  if (!theta_) throw std::domain_error("density family is disabled for alpha = 0");
  return 1.0 / (2.0 + *theta_) - 1.0;
}

double kernel_value(const KernelSpec& spec, double t, double s) {
  if (!(s >= 0.0) || !(s < t)) throw std::domain_error("kernel_value requires 0 <= s < t");
  if (spec.degenerate()) return 1.0;
  return std::pow(t - s, -spec.alpha());
}

namespace {

void require_density(const KernelSpec& spec, double t) {
  if (spec.degenerate()) throw std::domain_error("density family is disabled for alpha = 0");
  if (!(t > 0.0)) throw std::domain_error("density requires t > 0");
}

// p_{u+h}(x) - p_u(x) for u > 0, h >= 0.
double time_step_difference(const KernelSpec& spec, double u, double h, double x) {
  const double a = 0.5 * std::pow(std::abs(x), spec.space_power());
  const double arg = -spec.alpha() * std::log1p(h / u) + (a / u) * (h / (u + h));
  // Far from cancellation the product form can hit 0 * inf for small u.
  if (!(std::abs(arg) <= 1.0)) {
    const double c = spec.c_theta();
    return c * std::pow(u + h, -spec.alpha()) * std::exp(-a / (u + h)) - c * std::pow(u, -spec.alpha()) * std::exp(-a / u);
  }
  return spec.c_theta() * std::pow(u, -spec.alpha()) * std::exp(-a / u) * std::expm1(arg);
}

// (m^q - (m - 1)^q) / q for m >= 1, q = 1 - alpha.
double unit_step_weight(double q, std::size_t m) {
  if (m == 1) return 1.0 / q;
  const double lower = static_cast<double>(m - 1);
  return std::pow(lower, q) * std::expm1(q * std::log1p(1.0 / lower)) / q;
}

}  // namespace

double density(const KernelSpec& spec, double t, double x) {
  require_density(spec, t);
  return spec.c_theta() * std::pow(t, -spec.alpha()) *
         std::exp(-std::pow(std::abs(x), spec.space_power()) / (2.0 * t));
}

double density_time_difference(const KernelSpec& spec, double t1, double t0, double x) {
  require_density(spec, std::min(t0, t1));
  if (t1 >= t0) return time_step_difference(spec, t0, t1 - t0, x);
  return -time_step_difference(spec, t1, t0 - t1, x);
}

double density_space_difference(const KernelSpec& spec, double t, double x, double y) {
  require_density(spec, t);
  const double s = spec.space_power();
  const double a = std::pow(std::abs(x), s) / (2.0 * t);
  const double b = std::pow(std::abs(y), s) / (2.0 * t);
  const double scale = spec.c_theta() * std::pow(t, -spec.alpha());
  if (!(std::abs(a - b) <= 1.0)) return scale * (std::exp(-a) - std::exp(-b));
  return -scale * std::exp(-a) * std::expm1(a - b);
}

double drift_weight(const KernelSpec& spec, double t_k, double t_j, double t_j1) {
  if (!(t_j < t_j1) || !(t_j1 <= t_k)) throw std::domain_error("drift_weight requires t_j < t_j1 <= t_k");
  if (spec.degenerate()) return t_j1 - t_j;
  const double q = 1.0 - spec.alpha();
  const double lower = t_k - t_j1;
  if (lower == 0.0) return std::pow(t_k - t_j, q) / q;
  return std::pow(lower, q) * std::expm1(q * std::log1p((t_j1 - t_j) / lower)) / q;
}

std::vector<double> lag_weights(const KernelSpec& spec, double dt, std::size_t n, double x,
                                KernelNormalization normalization) {
  if (!(dt > 0.0)) throw std::domain_error("lag_weights requires dt > 0");
  std::vector<double> w(n);
  if (spec.degenerate()) {
    if (x != 0.0) throw std::domain_error("density family is disabled for alpha = 0");
    std::fill(w.begin(), w.end(), dt);
    return w;
  }
  if (x == 0.0) {
    const double q = 1.0 - spec.alpha();
    const double scale = std::pow(dt, q) *
                         (normalization == KernelNormalization::c_theta ? spec.c_theta() : 1.0);
    for (std::size_t m = 1; m <= n; ++m) w[m - 1] = scale * unit_step_weight(q, m);
    return w;
  }
  const quad::Tolerance tol{1e-12, 15};
  auto p = [&](double u) { return u > 0.0 ? density(spec, u, x) : 0.0; };
  for (std::size_t m = 1; m <= n; ++m) {
    const double lo = static_cast<double>(m - 1) * dt;
    const double hi = static_cast<double>(m) * dt;
    w[m - 1] = m == 1 ? quad::integrate_left_singular(p, lo, hi, spec.alpha(), tol).value
                      : quad::integrate(p, lo, hi, tol).value;
  }
  return w;
}

// ---------------------------------------------------------------------------

namespace {

struct SeriesOutcome {
  double min_slope = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  SweepPoint worst;
  bool quadrature_ok = true;
  std::string diagnostic;
};

// Folds one series (LHS against the small parameter) into the running outcome.
void absorb_series(SeriesOutcome& out, const std::vector<double>& small,
                   const std::vector<double>& lhs, const std::vector<double>& rhs,
                   const std::vector<SweepPoint>& points) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < small.size(); ++i) {
    if (lhs[i] > 0.0) {
      xs.push_back(small[i]);
      ys.push_back(lhs[i]);
    }
    if (rhs[i] > 0.0) {
      const double r = lhs[i] / rhs[i];
      if (r > out.max_ratio) {
        out.max_ratio = r;
        out.worst = points[i];
      }
    }
  }
  if (xs.size() >= 2) out.min_slope = std::min(out.min_slope, fit_loglog(xs, ys).slope);
}

LemmaReport finish(std::string name, double theoretical, const SeriesOutcome& out,
                   double slope_tol) {
  LemmaReport r;
  r.lemma = std::move(name);
  r.exponent_theoretical = theoretical;
  r.exponent_fitted = out.min_slope;
  r.constant_fitted = out.max_ratio;
  r.worst_point = out.worst;
  r.diagnostic = out.diagnostic;
  r.pass = out.quadrature_ok && std::isfinite(out.min_slope) && std::isfinite(out.max_ratio) &&
           out.min_slope >= theoretical - slope_tol;
  return r;
}

void require_sweep(const KernelSpec& spec, const LemmaSweep& sweep) {
  if (spec.degenerate()) throw std::domain_error("kernel estimates need alpha > 0");
  if (sweep.small_points < 2 || !(sweep.small_min > 0.0) || !(sweep.small_max > sweep.small_min))
    throw std::invalid_argument("lemma sweep needs >= 2 increasing small parameters");
}

// Geometric panel breaks on [0, end] refined towards zero, starting at `first`.
std::vector<double> geometric_breaks(double first, double end) {
  std::vector<double> b{0.0};
  double u = std::clamp(first, 1e-300, end);
  while (u < end) {
    b.push_back(u);
    u *= 4.0;
  }
  b.push_back(end);
  return b;
}

quad::Result integrate_from_zero(const quad::Integrand& f, double first, double end,
                                 double gamma, double tol) {
  const auto breaks = geometric_breaks(first, end);
  const quad::Tolerance qt{tol, 15};
  quad::Result total = quad::integrate_left_singular(f, 0.0, breaks[1], gamma, qt);
  const auto tail = quad::integrate_panels(f, std::span(breaks).subspan(1), qt);
  total.value += tail.value;
  total.error += tail.error;
  total.converged = total.converged && tail.converged;
  return total;
}

// The fits only need a few digits; demanding the full tolerance fails on
// integrands whose L1 norm sits near the underflow of the error estimate.
void record_quadrature(SeriesOutcome& out, const quad::Result& q, const SweepPoint& p) {
  if (std::isfinite(q.value) && q.error <= 1e-6 * std::abs(q.value)) return;
  out.quadrature_ok = false;
  std::ostringstream os;
  os << "quadrature did not converge at t=" << p.t << " t'=" << p.t_prime << " x=" << p.x
     << " y=" << p.y << " (error " << q.error << ")";
  out.diagnostic = os.str();
  out.worst = p;
}

}  // namespace

LemmaReport verify_density_difference(const KernelSpec& spec, const LemmaSweep& sweep) {
  require_sweep(spec, sweep);
  const auto small = logspace(sweep.small_min, sweep.small_max, sweep.small_points);
  const double a = spec.alpha();
  SeriesOutcome out;
  for (double t : sweep.times) {
    for (double x : sweep.anchors) {
      std::vector<double> lhs, rhs;
      std::vector<SweepPoint> pts;
      for (double d : small) {
        const double y = x + d;
        if (std::abs(y) > 1.0) continue;
        lhs.push_back(std::abs(density_space_difference(spec, t, x, y)));
        rhs.push_back(std::pow(t, -a) * std::pow(d / t, sweep.beta) *
                      std::pow(std::max(std::abs(x), std::abs(y)), (1.0 / a - 1.0) * sweep.beta));
        pts.push_back({t, t, x, y, sweep.beta});
      }
      std::vector<double> ds;
      for (const auto& p : pts) ds.push_back(p.y - p.x);
      absorb_series(out, ds, lhs, rhs, pts);
    }
  }
  return finish("density_difference", sweep.beta, out, sweep.slope_tol);
}

LemmaReport verify_time_increment(const KernelSpec& spec, const LemmaSweep& sweep) {
  require_sweep(spec, sweep);
  const auto small = logspace(sweep.small_min, sweep.small_max, sweep.small_points);
  const double a = spec.alpha();
  SeriesOutcome out;
  for (double t : sweep.times) {
    if (t + sweep.small_max > spec.horizon()) continue;
    for (double x : sweep.anchors) {
      std::vector<double> lhs, rhs;
      std::vector<SweepPoint> pts;
      for (double h : small) {
        const SweepPoint pt{t, t + h, x, x, 0.0};
        auto f = [&](double u) {
          if (u <= 0.0) return 0.0;
          const double d = time_step_difference(spec, u, h, x);
          return d * d;
        };
        const auto q = integrate_from_zero(f, h, t, 2.0 * a, sweep.quad_tol);
        record_quadrature(out, q, pt);
        lhs.push_back(q.value);
        rhs.push_back(std::pow(h, 1.0 - 2.0 * a));
        pts.push_back(pt);
      }
      absorb_series(out, small, lhs, rhs, pts);
    }
  }
  if (!std::isfinite(out.min_slope)) out.diagnostic = "no sweep time fits inside the horizon";
  return finish("time_increment", 1.0 - 2.0 * a, out, sweep.slope_tol);
}

LemmaReport verify_space_increment(const KernelSpec& spec, const LemmaSweep& sweep) {
  require_sweep(spec, sweep);
  const auto small = logspace(sweep.small_min, sweep.small_max, sweep.small_points);
  const double a = spec.alpha();
  const double s = spec.space_power();
  SeriesOutcome out;
  for (double t : sweep.times) {
    for (double x : sweep.anchors) {
      std::vector<double> lhs, rhs, ds;
      std::vector<SweepPoint> pts;
      for (double d : small) {
        const double y = x + d;
        if (std::abs(y) > 1.0) continue;
        const SweepPoint pt{t, t, x, y, sweep.beta};
        auto f = [&](double u) {
          if (u <= 0.0) return 0.0;
          const double diff = density_space_difference(spec, u, x, y);
          return diff * diff;
        };
        const double scale = 0.5 * std::pow(std::max(std::abs(x), std::abs(y)), s);
        const auto q = integrate_from_zero(f, std::min(scale, t), t, 2.0 * a, sweep.quad_tol);
        record_quadrature(out, q, pt);
        lhs.push_back(q.value);
        rhs.push_back(std::pow(std::max(std::abs(x), std::abs(y)), (1.0 / a - 1.0) * 2.0 * sweep.beta) *
                      std::pow(d, 1.0 - 2.0 * a));
        ds.push_back(d);
        pts.push_back(pt);
      }
      absorb_series(out, ds, lhs, rhs, pts);
    }
  }
  return finish("space_increment", 1.0 - 2.0 * a, out, sweep.slope_tol);
}

std::vector<LemmaReport> verify_kernel_lemmas(const KernelSpec& spec, const LemmaSweep& sweep) {
  return {verify_density_difference(spec, sweep), verify_time_increment(spec, sweep),
          verify_space_increment(spec, sweep)};
}

void to_json(nlohmann::json& j, const SweepPoint& p) {
  j = {{"t", p.t}, {"t_prime", p.t_prime}, {"x", p.x}, {"y", p.y}, {"beta", p.beta}};
}

void to_json(nlohmann::json& j, const LemmaReport& r) {
  j = {{"lemma", r.lemma},
       {"exponent_theoretical", r.exponent_theoretical},
       {"exponent_fitted", r.exponent_fitted},
       {"constant_fitted", r.constant_fitted},
       {"worst_point", r.worst_point},
       {"pass", r.pass}};
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
}

}  // namespace volterra
