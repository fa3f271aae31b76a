#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace volterra {

/// Brownian path on the uniform grid t_k = k T / n, n = base_steps 2^level.
///
/// Node values are stored as integer multiples of a power-of-two quantum, so
/// increments are exact differences and sums of adjacent increments are exact
/// in double precision. Level 0 draws N(0, dt) steps; each finer level inserts
/// Brownian-bridge midpoints. Every normal variate comes from a counter-based
/// generator keyed by (seed, stream, level, index), hence a given (seed, level)
/// yields the same increments on every machine and schedule, and the level
/// l + 1 path restricted to level-l nodes is the level-l path.
struct BrownianGrid {
  std::uint64_t seed = 0;
  int level = 0;
  std::size_t base_steps = 0;
  double T = 0.0;
  double dt = 0.0;
  double quantum = 0.0;
  std::vector<std::int64_t> nodes;  // W(t_k) / quantum, nodes[0] = 0
  std::vector<double> increments;   // W(t_{k+1}) - W(t_k)

  std::size_t n_steps() const { return increments.size(); }
  double time(std::size_t k) const { return T * static_cast<double>(k) / static_cast<double>(n_steps()); }
  double value(std::size_t k) const { return static_cast<double>(nodes[k]) * quantum; }
  double endpoint() const { return value(n_steps()); }
};

/// Requires base_steps >= 2, 0 <= level <= 30 and T > 0 (std::domain_error).
BrownianGrid sample_path(std::uint64_t seed, int level, std::size_t base_steps, double T = 1.0);

/// The same path on level `to_level` <= path.level (adjacent increments summed).
BrownianGrid coarsen(const BrownianGrid& path, int to_level);

/// Standard normal variate for the given key: SplitMix64-style mixing to a
/// 53-bit uniform in (0, 1), then the AS241 (PPND16) inverse normal CDF.
double keyed_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t level,
                    std::uint64_t index);

/// AS241 inverse standard normal CDF, p in (0, 1).
double inverse_normal_cdf(double p);

/// Binary dump: 8-byte header {uint16 magic 0x5642, uint16 level, uint32 n_steps}
/// followed by little-endian float64 increments.
constexpr std::uint16_t kIncrementMagic = 0x5642;

struct IncrementDump {
  int level = 0;
  std::vector<double> increments;
};

void write_increments(std::ostream& out, const BrownianGrid& path);
/// Throws std::runtime_error on a bad magic number or truncated data.
IncrementDump read_increments(std::istream& in);

}  // namespace volterra
