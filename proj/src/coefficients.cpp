#include "volterra/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "volterra/stats.hpp"

namespace volterra {

CoefficientPair builtin_power_diffusion(double xi, double c, double drift_a, double drift_b) {
  if (!(xi >= 0.5 && xi <= 1.0)) throw std::domain_error("power diffusion needs xi in [1/2, 1]");
  if (!(c >= 0.0) || !std::isfinite(c)) throw std::domain_error("power diffusion needs c >= 0");
  if (!std::isfinite(drift_a) || !std::isfinite(drift_b)) throw std::domain_error("drift must be finite");
  CoefficientPair p;
  p.mu = [drift_a, drift_b](double, double x) { return drift_a + drift_b * x; };
  p.sigma = [xi, c](double, double x) {
    if (x == 0.0) return 0.0;
    return std::copysign(c * std::pow(std::abs(x), xi), x);
  };
  p.xi = xi;
  p.C_mu = std::abs(drift_b);
  p.C_sigma = c * std::pow(2.0, 1.0 - xi);
  p.C_growth = std::max(std::abs(drift_a), std::abs(drift_b)) + c;
  if (c > 0.0) {
    // Mean value bound on same-sign pairs; opposite-sign pairs are no worse.
    const double b = std::abs(drift_b);
    p.ratio_bound = [b, c, xi](double K) { return b * std::pow(K, 1.0 - xi) / (c * xi); };
  }
  std::ostringstream os;
  os << "power(xi=" << xi << ", c=" << c << ", mu=" << drift_a << "+" << drift_b << "x)";
  p.description = os.str();
  return p;
}

namespace {

struct Table {
  std::vector<double> x, y;

  double operator()(double v) const {
    if (v <= x.front()) return y.front();
    if (v >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), v);
    const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    const double w = (v - x[i]) / (x[i + 1] - x[i]);
    return y[i] + w * (y[i + 1] - y[i]);
  }
  double lipschitz() const {
    double L = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
      L = std::max(L, std::abs(y[i + 1] - y[i]) / (x[i + 1] - x[i]));
    return L;
  }
  double max_abs() const { return volterra::max_abs(y); }
  double oscillation() const {
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    return *hi - *lo;
  }
};

}  // namespace

CoefficientPair builtin_lipschitz_table(std::vector<double> x, std::vector<double> mu,
                                        std::vector<double> sigma, double xi) {
  if (x.size() < 2 || mu.size() != x.size() || sigma.size() != x.size())
    throw std::invalid_argument("lipschitz_table needs >= 2 nodes and matching columns");
  if (!(xi >= 0.5 && xi <= 1.0)) throw std::domain_error("lipschitz_table needs xi in [1/2, 1]");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(mu[i]) || !std::isfinite(sigma[i]))
      throw std::invalid_argument("lipschitz_table entries must be finite");
    if (i > 0 && !(x[i] > x[i - 1])) throw std::invalid_argument("lipschitz_table nodes must increase");
  }
  Table m{x, std::move(mu)}, s{std::move(x), std::move(sigma)};
  CoefficientPair p;
  p.xi = xi;
  p.C_mu = m.lipschitz();
  p.C_sigma = std::pow(s.lipschitz(), xi) * std::pow(s.oscillation(), 1.0 - xi);
  p.C_growth = m.max_abs() + s.max_abs();
  p.mu = [m](double, double v) { return m(v); };
  p.sigma = [s](double, double v) { return s(v); };
  p.description = "lipschitz_table(" + std::to_string(s.x.size()) + " nodes)";
  return p;
}

CoefficientPair constant_pair(double m, double s) {
  CoefficientPair p;
  p.mu = [m](double, double) { return m; };
  p.sigma = [s](double, double) { return s; };
  p.C_growth = std::abs(m) + std::abs(s);
  p.xi = 1.0;
  p.description = "constant(mu=" + std::to_string(m) + ", sigma=" + std::to_string(s) + ")";
  return p;
}

CoefficientPair coefficients_from_json(const nlohmann::json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "power") {
      double a = 0.0, b = 0.0;
      if (j.contains("drift")) {
        a = j["drift"].value("a", 0.0);
        b = j["drift"].value("b", 0.0);
      }
      return builtin_power_diffusion(j.at("xi").get<double>(), j.value("c", 1.0), a, b);
    }
    if (type == "lipschitz_table") {
      return builtin_lipschitz_table(j.at("x").get<std::vector<double>>(),
                                     j.at("mu").get<std::vector<double>>(),
                                     j.at("sigma").get<std::vector<double>>(),
                                     j.at("xi").get<double>());
    }
    throw std::invalid_argument("unknown coefficient type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("coefficient config: ") + e.what());
  } catch (const std::domain_error& e) {
    throw std::invalid_argument(std::string("coefficient config: ") + e.what());
  }
}

double xi_threshold(double alpha) { return 1.0 / (2.0 * (1.0 - alpha)); }

bool xi_admissible(double alpha, double xi) {
  if (!(xi >= 0.5 && xi <= 1.0)) return false;
  const double thr = xi_threshold(alpha);
  return alpha == 0.0 ? xi >= thr : xi > thr;
}

InitialCondition constant_initial(double value) {
  return {[value](double) { return value; }, "constant(" + std::to_string(value) + ")"};
}

double holder_quotient(const InitialCondition& ic, double beta, double T, std::size_t points) {
  const auto ts = linspace(0.0, T, points);
  std::vector<double> v(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) v[i] = ic.x0(ts[i]);
  double q = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = i + 1; j < ts.size(); ++j)
      q = std::max(q, std::abs(v[j] - v[i]) / std::pow(ts[j] - ts[i], beta));
  return q;
}

AssumptionReport validate_assumptions(const CoefficientPair& pair, double alpha, double K,
                                      const AssumptionMesh& mesh) {
  if (!(K > 0.0)) throw std::invalid_argument("K must be positive");
  if (mesh.t_points < 1 || mesh.x_points < 2) throw std::invalid_argument("mesh too coarse");
  AssumptionReport r;
  r.K = K;
  r.alpha = alpha;
  r.xi_threshold = xi_threshold(alpha);
  r.xi_admissible = xi_admissible(alpha, pair.xi);
  if (pair.ratio_bound) r.ratio_declared = pair.ratio_bound(K);

  const auto ts = mesh.t_points == 1 ? std::vector<double>{0.0} : linspace(0.0, mesh.T, mesh.t_points);
  const auto xs = linspace(-K, K, mesh.x_points);
  const std::size_t n = xs.size();
  std::vector<double> mu(n), sg(n);
  for (double t : ts) {
    for (std::size_t i = 0; i < n; ++i) {
      mu[i] = pair.mu(t, xs[i]);
      sg[i] = pair.sigma(t, xs[i]);
      if (!std::isfinite(mu[i]) || !std::isfinite(sg[i])) {
        std::ostringstream os;
        os << "coefficient not finite at t=" << t << ", x=" << xs[i];
        throw std::runtime_error(os.str());
      }
      r.growth_estimate = std::max(r.growth_estimate, (std::abs(mu[i]) + std::abs(sg[i])) / (1.0 + std::abs(xs[i])));
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = xs[j] - xs[i];
        const double dm = std::abs(mu[j] - mu[i]);
        const double ds = std::abs(sg[j] - sg[i]);
        r.mu_lipschitz_estimate = std::max(r.mu_lipschitz_estimate, dm / d);
        r.sigma_holder_estimate = std::max(r.sigma_holder_estimate, ds / std::pow(d, pair.xi));
        if (ds == 0.0) {
          if (dm == 0.0) {
            ++r.convention_pairs;
            r.ratio_estimate = std::max(r.ratio_estimate, 1.0);
          } else {
            ++r.violation_pairs;
          }
        } else {
          r.ratio_estimate = std::max(r.ratio_estimate, dm / ds);
        }
      }
    }
  }
  if (r.violation_pairs > 0) {
    r.ratio_estimate = std::numeric_limits<double>::infinity();
    r.warnings.push_back("sigma difference vanishes where mu difference does not (" +
                         std::to_string(r.violation_pairs) + " pairs); ratio bound fails");
  }
  if (!r.xi_admissible) {
    std::ostringstream os;
    os << "xi = " << pair.xi << " is not admissible for alpha = " << alpha << " (threshold "
       << r.xi_threshold << ")";
    r.warnings.push_back(os.str());
  }
  auto within = [](double est, double declared) { return est <= declared * 1.05 + 1e-12; };
  r.within_declared = within(r.growth_estimate, pair.C_growth) &&
                      within(r.mu_lipschitz_estimate, pair.C_mu) &&
                      within(r.sigma_holder_estimate, pair.C_sigma) &&
                      (!r.ratio_declared || within(r.ratio_estimate, *r.ratio_declared));
  return r;
}

void to_json(nlohmann::json& j, const AssumptionReport& r) {
  j = {{"K", r.K},
       {"alpha", r.alpha},
       {"growth_estimate", r.growth_estimate},
       {"mu_lipschitz_estimate", r.mu_lipschitz_estimate},
       {"sigma_holder_estimate", r.sigma_holder_estimate},
       {"ratio_estimate", r.ratio_estimate},
       {"convention_pairs", r.convention_pairs},
       {"violation_pairs", r.violation_pairs},
       {"xi_threshold", r.xi_threshold},
       {"xi_admissible", r.xi_admissible},
       {"within_declared", r.within_declared},
       {"warnings", r.warnings}};
  if (r.ratio_declared) j["ratio_declared"] = *r.ratio_declared;
}

}  // namespace volterra
