#include "volterra/driver.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace volterra {

namespace {

constexpr std::uint64_t kLevelZeroStream = 0;
constexpr std::uint64_t kBridgeStream = 0x627269646765ULL;  // "bridge"

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double poly(const std::array<double, 8>& c, double r) {
  double v = c[7];
  for (int i = 6; i >= 0; --i) v = v * r + c[i];
  return v;
}

// Wichura (1988), algorithm AS241, PPND16.
constexpr std::array<double, 8> kA{3.3871328727963666080e0, 1.3314166789178437745e+2,
                                   1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                   4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                   3.3430575583588128105e+4, 2.5090809287301226727e+3};
constexpr std::array<double, 8> kB{1.0,
                                   4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                   5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                   3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                   5.2264952788528545610e+3};
constexpr std::array<double, 8> kC{1.42343711074968357734e0, 4.63033784615654529590e0,
                                   5.76949722146069140550e0, 3.64784832476320460504e0,
                                   1.27045825245236838258e0, 2.41780725177450611770e-1,
                                   2.27238449892691845833e-2, 7.74545014278341407640e-4};
constexpr std::array<double, 8> kD{1.0,
                                   2.05319162663775882187e0, 1.67638483018380384940e0,
                                   6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                   1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                   1.05075007164441684324e-9};
constexpr std::array<double, 8> kE{6.65790464350110377720e0, 5.46378491116411436990e0,
                                   1.78482653991729133580e0, 2.96560571828504891230e-1,
                                   2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                   2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr std::array<double, 8> kF{1.0,
                                   5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                   1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                   1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                   2.04426310338993978564e-15};

void check_grid_args(int level, std::size_t base_steps, double T) {
  if (base_steps < 2) throw std::domain_error("base_steps must be >= 2");
  if (level < 0 || level > 30) throw std::domain_error("level must lie in [0, 30]");
  if (!(T > 0.0) || !std::isfinite(T)) throw std::domain_error("horizon must be positive");
}

void fill_increments(BrownianGrid& g) {
  g.increments.resize(g.nodes.size() - 1);
  for (std::size_t k = 0; k + 1 < g.nodes.size(); ++k)
    g.increments[k] = static_cast<double>(g.nodes[k + 1] - g.nodes[k]) * g.quantum;
}

}  // namespace

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse_normal_cdf needs p in (0, 1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly(kA, r) / poly(kB, r);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double v;
  if (r <= 5.0) {
    r -= 1.6;
    v = poly(kC, r) / poly(kD, r);
  } else {
    r -= 5.0;
    v = poly(kE, r) / poly(kF, r);
  }
  return q < 0.0 ? -v : v;
}

double keyed_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t level,
                    std::uint64_t index) {
  const std::uint64_t h = mix(seed ^ mix(stream ^ mix(level ^ mix(index))));
  const double u = (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
  return inverse_normal_cdf(u);
}

BrownianGrid sample_path(std::uint64_t seed, int level, std::size_t base_steps, double T) {
  check_grid_args(level, base_steps, T);
  BrownianGrid g;
  g.seed = seed;
  g.level = level;
  g.base_steps = base_steps;
  g.T = T;
  g.quantum = std::ldexp(1.0, -44 + static_cast<int>(std::ceil(0.5 * std::log2(T))));

  // Level 0: independent N(0, dt0) steps.
  const double dt0 = T / static_cast<double>(base_steps);
  std::vector<std::int64_t> w(base_steps + 1, 0);
  for (std::size_t k = 0; k < base_steps; ++k) {
    const double step = std::sqrt(dt0) * keyed_normal(seed, kLevelZeroStream, 0, k);
    w[k + 1] = w[k] + std::llround(step / g.quantum);
  }
  // Each finer level inserts midpoints: mean of the endpoints plus N(0, h/4).
  double h = dt0;
  for (int l = 1; l <= level; ++l) {
    std::vector<std::int64_t> finer(2 * (w.size() - 1) + 1);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      const double z = keyed_normal(seed, kBridgeStream, static_cast<std::uint64_t>(l), i);
      const double offset = 0.5 * static_cast<double>(w[i + 1] - w[i]) + 0.5 * std::sqrt(h) * z / g.quantum;
      finer[2 * i] = w[i];
      finer[2 * i + 1] = w[i] + std::llround(offset);
    }
    finer.back() = w.back();
    w = std::move(finer);
    h *= 0.5;
  }
  g.nodes = std::move(w);
  g.dt = T / static_cast<double>(g.nodes.size() - 1);
  fill_increments(g);
  return g;
}

BrownianGrid coarsen(const BrownianGrid& path, int to_level) {
  if (to_level < 0 || to_level > path.level) throw std::domain_error("coarsen target must lie in [0, level]");
  BrownianGrid g = path;
  const std::size_t stride = std::size_t{1} << (path.level - to_level);
  g.level = to_level;
  g.nodes.clear();
  for (std::size_t k = 0; k < path.nodes.size(); k += stride) g.nodes.push_back(path.nodes[k]);
  g.dt = g.T / static_cast<double>(g.nodes.size() - 1);
  fill_increments(g);
  return g;
}

void write_increments(std::ostream& out, const BrownianGrid& path) {
  if (path.n_steps() > 0xffffffffULL) throw std::runtime_error("too many steps for the dump header");
  auto put = [&out](std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put(kIncrementMagic, 2);
  put(static_cast<std::uint64_t>(path.level), 2);
  put(path.n_steps(), 4);
  for (double d : path.increments) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    put(bits, 8);
  }
}

IncrementDump read_increments(std::istream& in) {
  auto get = [&in](int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      const int c = in.get();
      if (c == std::char_traits<char>::eof()) throw std::runtime_error("truncated increment dump");
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
  };
  if (get(2) != kIncrementMagic) throw std::runtime_error("not an increment dump (bad magic)");
  IncrementDump d;
  d.level = static_cast<int>(get(2));
  const std::uint64_t n = get(4);
  d.increments.resize(n);
  for (auto& x : d.increments) {
    const std::uint64_t bits = get(8);
    std::memcpy(&x, &bits, sizeof x);
  }
  return d;
}

}  // namespace volterra
