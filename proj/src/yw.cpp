#include "volterra/yw.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "volterra/quadrature.hpp"
#include "volterra/stats.hpp"

namespace volterra {

namespace {

constexpr std::size_t kCdfIntervals = 4096;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// C-infinity step from 1 (at u <= 0) down to 0 (at u >= 1).
double smooth_cut(double u) {
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  const double f1 = std::exp(-1.0 / (1.0 - u));
  const double f0 = std::exp(-1.0 / u);
  return f1 / (f1 + f0);
}

}  // namespace

double yw_level(int n) {
  if (n < 0) throw std::invalid_argument("level index must be >= 0");
  return std::exp(-0.5 * n * (n + 1.0));
}

MollifierFamily::MollifierFamily(int n_max) : n_max_(n_max) {
  bump_mass_ = quad::integrate([this](double s) { return bump(s); }, 0.0, 1.0, {1e-15, 15}).value;
  cdf_.resize(kCdfIntervals + 1);
  const double h = 1.0 / kCdfIntervals;
  for (std::size_t i = 1; i <= kCdfIntervals; ++i) {
    const double lo = h * static_cast<double>(i - 1);
    cdf_[i] = cdf_[i - 1] +
              quad::integrate([this](double s) { return bump(s); }, lo, lo + h, {1e-15, 8}).value / bump_mass_;
  }
  cdf_.back() = 1.0;
}

MollifierFamily MollifierFamily::build(int n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  MollifierFamily f(n_max);
  for (int n = 1; n <= n_max; ++n) {
    if (f.cap_ratio(n) > 1.0)
      throw std::runtime_error("mollifier at level " + std::to_string(n) + " exceeds the 2/(n x) cap");
  }
  return f;
}

double MollifierFamily::bump(double s) const {
  const double u = 2.0 * s - 1.0;
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

double MollifierFamily::bump_cdf(double s) const {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double h = 1.0 / kCdfIntervals;
  const std::size_t i = std::min(static_cast<std::size_t>(s / h), kCdfIntervals - 1);
  const double s0 = h * static_cast<double>(i);
  const double u = (s - s0) / h;
  // Cubic Hermite with exact end slopes bump / mass.
  const double y0 = cdf_[i], y1 = cdf_[i + 1];
  const double d0 = bump(s0) / bump_mass_ * h, d1 = bump(s0 + h) / bump_mass_ * h;
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * d0 + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * d1;
}

double MollifierFamily::a(int n) const {
  if (n < 0 || n > n_max_) throw std::out_of_range("level outside the family");
  return yw_level(n);
}

double MollifierFamily::psi(int n, double x) const {
  if (n < 1 || n > n_max_) throw std::out_of_range("level outside the family");
  const double ax = std::abs(x);
  const double lo = yw_level(n), hi = yw_level(n - 1);
  if (ax <= lo || ax >= hi) return 0.0;
  const double s = std::log(ax / lo) / n;
  return bump(s) / (bump_mass_ * n * ax);
}

double MollifierFamily::phi_prime(int n, double x) const {
  if (n < 1 || n > n_max_) throw std::out_of_range("level outside the family");
  const double ax = std::abs(x);
  const double lo = yw_level(n), hi = yw_level(n - 1);
  double g;
  if (ax <= lo) g = 0.0;
  else if (ax >= hi) g = 1.0;
  else g = bump_cdf(std::log(ax / lo) / n);
  return x < 0.0 ? -g : g;
}

double MollifierFamily::phi(int n, double x) const {
  if (n < 1 || n > n_max_) throw std::out_of_range("level outside the family");
  const double ax = std::abs(x);
  const double lo = yw_level(n), hi = yw_level(n - 1);
  if (ax <= lo) return 0.0;
  // int_{a_n}^{y} phi_n' with y = a_n e^{n s}: n a_n int_0^s cdf(u) e^{n u} du.
  // Integrating by parts: a_n (cdf(s) e^{n s} - int_0^s bump(u) e^{n u} du / mass).
  auto tail = [&](double s_end) {
    auto f = [&](double u) { return bump(u) * std::exp(n * u); };
    return lo * quad::integrate(f, 0.0, s_end, {1e-14, 15}).value / bump_mass_;
  };
  if (ax < hi) {
    const double s = std::log(ax / lo) / n;
    return ax * bump_cdf(s) - tail(s);
  }
  return ax - tail(1.0);
}

double MollifierFamily::sup_gap(int n) const {
  const double hi = a(n - 1);
  return hi - phi(n, hi);
}

double MollifierFamily::psi_mass(int n) const {
  const double lo = a(n), hi = a(n - 1);
  std::vector<double> breaks;
  for (int i = 0; i <= 16; ++i) breaks.push_back(lo * std::exp(n * i / 16.0));
  breaks.back() = hi;
  return quad::integrate_panels([&](double x) { return psi(n, x); }, breaks, {1e-14, 15}).value;
}

double MollifierFamily::cap_ratio(int n) const {
  const double lo = a(n);
  double worst = 0.0;
  for (int i = 1; i < 2000; ++i) {
    const double x = lo * std::exp(n * i / 2000.0);
    worst = std::max(worst, psi(n, x) * n * x / 2.0);
  }
  return worst;
}

// ---------------------------------------------------------------------------

double eta_threshold(double xi) {
  if (!(xi > 0.5)) return std::numeric_limits<double>::infinity();
  return 1.0 / (2.0 * xi - 1.0);
}

bool zeta_window_ok(double zeta, double alpha, double xi) {
  if (!(zeta > 0.0 && zeta < 1.0) || !(alpha > 0.0)) return false;
  return zeta / alpha > eta_threshold(xi);
}

double BumpTest::operator()(double y) const {
  const double r = std::abs(y - x);
  const double cut = smooth_cut((r - 1.0 / m) / b_n);
  if (cut == 0.0) return 0.0;
  return cut * m * kInvSqrt2Pi * std::exp(-0.5 * m * m * r * r) / m_sigma;
}

double BumpTest::annulus_mass() const {
  auto g = [this](double r) { return m * kInvSqrt2Pi * std::exp(-0.5 * m * m * r * r); };
  return 2.0 * quad::integrate(g, 1.0 / m, radius(), {1e-14, 15}).value;
}

BumpTest build_bump(int n, double eta, double x, double xi) {
  if (n < 1) throw std::invalid_argument("bump level must be >= 1");
  if (!(eta > eta_threshold(xi))) throw std::domain_error("eta must exceed 1/(2 xi - 1)");
  BumpTest b;
  b.n = n;
  b.eta = eta;
  b.x = x;
  b.m = std::pow(yw_level(n - 1), -1.0 / eta);
  b.m_sigma = std::erf(1.0 / std::sqrt(2.0));
  // In units of the standard deviation: 2 int_1^{1+w} N(0,1) = a_n / 2.
  const double target = 0.5 * yw_level(n);
  const double r = 1.0 / std::sqrt(2.0);
  auto mass = [r](double w) { return std::erfc(r) - std::erfc((1.0 + w) * r); };
  auto f = [&](double w) { return mass(w) - target; };
  double lo = 0.0, hi = 12.0;
  if (!(f(lo) < 0.0 && f(hi) > 0.0)) throw std::runtime_error("annulus mass equation has no bracketed root");
  std::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(
      f, lo, hi, f(lo), f(hi), boost::math::tools::eps_tolerance<double>(50), iters);
  b.b_n = 0.5 * (root.first + root.second) / b.m;
  return b;
}

namespace {

double radial_bump_integral(int n, double eta, double xi, int power) {
  const BumpTest b = build_bump(n, eta, 0.0, xi);
  auto f = [&](double r) { return std::pow(b(r), power); };
  const std::vector<double> breaks{0.0, 1.0 / b.m, b.radius()};
  return 2.0 * quad::integrate_panels(f, breaks, {1e-13, 15}).value;
}

}  // namespace

double bump_mass_at_zero(int n, double eta, double xi) { return radial_bump_integral(n, eta, xi, 1); }
double bump_square_mass_at_zero(int n, double eta, double xi) { return radial_bump_integral(n, eta, xi, 2); }

// ---------------------------------------------------------------------------

SemigroupTest::SemigroupTest(int N, int M, double t, const KernelSpec& spec)
    : N_(N), M_(M), t_(t), spec_(spec), td_(spec) {
  if (N < 1 || M < 2 || !(t > 0.0)) throw std::invalid_argument("semigroup test needs N >= 1, M >= 2, t > 0");
}

double SemigroupTest::phi_M(double x) const {
  const double ax = std::abs(x);
  const double r1 = 1.0 / M_, r2 = 1.0 / (M_ - 1);
  if (ax >= r2) return 0.0;
  return M_ * std::exp(-double(M_) * M_ * ax * ax) * smooth_cut((ax - r1) / (r2 - r1));
}

double SemigroupTest::g(double x) const {
  const double u = std::abs(x) - N_;
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

double SemigroupTest::g_prime(double x) const {
  const double u = std::abs(x) - N_;
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double d = -30.0 * u * u * (1.0 - u) * (1.0 - u);
  return x < 0.0 ? -d : d;
}

double SemigroupTest::g_second(double x) const {
  const double u = std::abs(x) - N_;
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return -60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
}

double SemigroupTest::delta_theta_g(double x) const {
  const double ax = std::abs(x);
  if (ax <= N_ || ax >= N_ + 1) return 0.0;
  const double th = *spec_.theta();
  const double s = spec_.space_power();
  const double sgn = x < 0.0 ? -1.0 : 1.0;
  return 2.0 / (s * s) * (std::pow(ax, -th) * g_second(x) - th * std::pow(ax, -th - 1.0) * sgn * g_prime(x));
}

double SemigroupTest::S(double tau, double x) const {
  if (tau == 0.0) return phi_M(x);
  const double r1 = 1.0 / M_, r2 = 1.0 / (M_ - 1);
  const std::vector<double> breaks{0.0, 0.5 * r1, r1, r2};
  auto f = [&](double y) { return td_(tau, x, y) * phi_M(y); };
  return quad::integrate_panels(f, breaks, {1e-12, 15}).value;
}

double SemigroupTest::S_composed(double s, double tau, double x) const {
  const double r2 = 1.0 / (M_ - 1);
  const double upper = std::max(td_.support_bound(s, x), td_.support_bound(tau, r2));
  constexpr int kPanels = 16;
  std::vector<double> breaks(kPanels + 1);
  for (int i = 0; i <= kPanels; ++i) breaks[i] = upper * i / kPanels;
  auto f = [&](double y) { return td_(s, x, y) * S(tau, y); };
  return quad::integrate_panels(f, breaks, {1e-11, 15}).value;
}

double SemigroupTest::psi(double s, double x) const {
  const double gx = g(x);
  if (gx == 0.0) return 0.0;
  return S(t_ - s, x) * gx;
}

double SemigroupTest::psi_dx(double s, double x) const {
  const double h = 1e-3 * std::abs(x) + 1e-9;
  return (psi(s, x + h) - psi(s, x - h)) / (2.0 * h);
}

SemigroupReport validate_semigroup_test(const SemigroupTest& test, std::size_t s_points, int n_cutoffs) {
  SemigroupReport r;
  const KernelSpec& spec = test.transition().spec();
  const double t = test.t();
  const double th = *spec.theta();
  r.s_mesh = linspace(0.0, t, std::max<std::size_t>(s_points, 2));

  r.positive_at_zero = true;
  for (double s : r.s_mesh) {
    r.psi_at_zero.push_back(test.psi(s, 0.0));
    r.positive_at_zero = r.positive_at_zero && r.psi_at_zero.back() > 0.0;
  }

  r.support_radius = test.N() + 1.0;
  r.support_ok = true;
  for (double s : r.s_mesh)
    for (double x : {r.support_radius, r.support_radius + 0.5, r.support_radius + 3.0})
      r.support_ok = r.support_ok && test.psi(s, x) == 0.0 && test.psi(s, -x) == 0.0;

  // int_R |x|^-theta (d_x Psi_s)^2, from shrinking lower cutoffs; finite when
  // the increments contract.
  r.weighted_gradient_finite = true;
  for (double s : r.s_mesh) {
    auto f = [&](double x) {
      const double d = test.psi_dx(s, x);
      return std::pow(x, -th) * d * d;
    };
    std::vector<double> partial;
    const double upper = r.support_radius;
    double acc = 0.0;
    double prev_eps = upper;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
      acc += 2.0 * quad::integrate(f, eps, prev_eps, {1e-6, 8}).value;
      partial.push_back(acc);
      prev_eps = eps;
    }
    const std::size_t k = partial.size();
    const double last = partial[k - 1] - partial[k - 2];
    const double before = partial[k - 2] - partial[k - 3];
    r.weighted_gradient.push_back(acc);
    if (!(std::abs(last) <= 0.5 * std::abs(before) + 1e-14 * std::abs(acc))) r.weighted_gradient_finite = false;
  }

  // C_g and the exponential tail, per cutoff radius.
  r.C_g_bounded = true;
  r.tail_ok = true;
  for (int N = 1; N <= n_cutoffs; ++N) {
    const SemigroupTest gN(N, test.M(), t, spec);
    double cg = 0.0, tail = 0.0;
    for (int i = 1; i < 40; ++i) {
      const double x = N + i / 40.0;
      cg = std::max(cg, std::pow(x, -th) * std::abs(gN.g_prime(x)) + std::abs(gN.delta_theta_g(x)));
      const double h = 1e-5 * x;
      const double v = gN.S(t, x);
      const double dv = (gN.S(t, x + h) - gN.S(t, x - h)) / (2.0 * h);
      tail = std::max(tail, std::abs(v + dv) * std::exp(x));
    }
    r.C_g.push_back(cg);
    r.tail_constants.push_back(tail);
    if (!std::isfinite(cg) || cg > r.C_g.front() * (1.0 + 1e-12)) r.C_g_bounded = false;
    if (!std::isfinite(tail) || tail > r.tail_constants.front() * (1.0 + 1e-9)) r.tail_ok = false;
  }

  for (double x : linspace(-1.0, 1.0, 41))
    r.identity_gap = std::max(r.identity_gap, std::abs(test.psi(t, x) - test.phi_M(x) * test.g(x)));

  for (double x : {0.0, 0.1, 0.3, 0.6}) {
    const double direct = test.S(t, x);
    const double composed = test.S_composed(0.5 * t, 0.5 * t, x);
    r.semigroup_error = std::max(r.semigroup_error, std::abs(composed - direct) / std::abs(direct));
  }
  return r;
}

void to_json(nlohmann::json& j, const SemigroupReport& r) {
  j = {{"s_mesh", r.s_mesh},
       {"psi_at_zero", r.psi_at_zero},
       {"positive_at_zero", r.positive_at_zero},
       {"support_radius", r.support_radius},
       {"support_ok", r.support_ok},
       {"weighted_gradient", r.weighted_gradient},
       {"weighted_gradient_finite", r.weighted_gradient_finite},
       {"C_g", r.C_g},
       {"C_g_bounded", r.C_g_bounded},
       {"tail_constants", r.tail_constants},
       {"tail_ok", r.tail_ok},
       {"identity_gap", r.identity_gap},
       {"semigroup_error", r.semigroup_error}};
}

}  // namespace volterra
