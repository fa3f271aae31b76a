#include <doctest.h>

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <sstream>

#include "volterra/driver.hpp"
#include "volterra/stats.hpp"

using namespace volterra;

TEST_CASE("paths are deterministic per (seed, level)") {
  const auto a = sample_path(42, 0, 4);
  const auto b = sample_path(42, 0, 4);
  CHECK(a.increments == b.increments);
  CHECK(a.nodes == b.nodes);
  const auto c = sample_path(43, 0, 4);
  CHECK(a.increments != c.increments);
  const auto d = sample_path(42, 6, 2, 2.0);
  CHECK(d.n_steps() == 128);
  CHECK(d.dt == doctest::Approx(2.0 / 128));
  CHECK(d.time(128) == 2.0);
  CHECK(d.nodes.front() == 0);
}

TEST_CASE("refinement restricts to the coarse path exactly") {
  const auto fine = sample_path(42, 1, 4);
  const auto coarse = sample_path(42, 0, 4);
  for (std::size_t k = 0; k < coarse.n_steps(); ++k)
    CHECK(fine.increments[2 * k] + fine.increments[2 * k + 1] == coarse.increments[k]);
  const auto deep = sample_path(7, 9, 2);
  for (int l = 0; l <= 9; ++l) {
    const auto c = coarsen(deep, l);
    const auto direct = sample_path(7, l, 2);
    CHECK(c.increments == direct.increments);
    CHECK(c.nodes == direct.nodes);
    CHECK(c.endpoint() == deep.endpoint());
  }
  CHECK(coarsen(deep, 9).increments == deep.increments);
  CHECK_THROWS_AS(coarsen(coarse, 1), std::domain_error);
}

TEST_CASE("argument checks") {
  CHECK_THROWS_AS(sample_path(1, 0, 1), std::domain_error);
  CHECK_THROWS_AS(sample_path(1, -1, 2), std::domain_error);
  CHECK_THROWS_AS(sample_path(1, 31, 2), std::domain_error);
  CHECK_THROWS_AS(sample_path(1, 0, 2, 0.0), std::domain_error);
}

TEST_CASE("inverse normal CDF against Boost") {
  boost::math::normal_distribution<double> n;
  for (double p : {1e-300, 1e-12, 1e-4, 0.02, 0.3, 0.5, 0.7, 0.975, 1.0 - 1e-10}) {
    const double q = boost::math::quantile(n, p);
    CHECK(std::abs(inverse_normal_cdf(p) - q) <= 1e-13 * std::max(1.0, std::abs(q)) * 100);
  }
}

TEST_CASE("terminal variance over 10^4 seeds") {
  const double T = 1.5;
  std::vector<double> ends(10000);
  parallel_for(ends.size(), [&](std::size_t i) { ends[i] = sample_path(i + 1, 4, 2, T).endpoint(); });
  const double var = sample_variance(ends);
  // Standard error of the sample variance of a normal: T sqrt(2 / (n - 1)).
  const double se = T * std::sqrt(2.0 / (ends.size() - 1.0));
  CHECK(std::abs(var - T) < 3.0 * se);
  CHECK(std::abs(mean(ends)) < 3.0 * std::sqrt(T / ends.size()));
}

TEST_CASE("bridge midpoints: conditional mean and variance") {
  // Level-1 midpoint minus the average of its level-0 endpoints is N(0, dt0 / 4).
  const double T = 1.0;
  const std::size_t base = 2;
  const double dt0 = T / base;
  std::vector<double> dev(10000);
  parallel_for(dev.size(), [&](std::size_t i) {
    const auto p = sample_path(1000 + i, 1, base, T);
    dev[i] = p.value(1) - 0.5 * (p.value(0) + p.value(2));
  });
  const double v = sample_variance(dev);
  const double target = dt0 / 4.0;
  CHECK(std::abs(v - target) < 3.0 * target * std::sqrt(2.0 / (dev.size() - 1.0)));
  CHECK(std::abs(mean(dev)) < 3.0 * std::sqrt(target / dev.size()));
}

TEST_CASE("increment dump round trip") {
  const auto p = sample_path(5, 3, 2);
  std::stringstream io(std::ios::in | std::ios::out | std::ios::binary);
  write_increments(io, p);
  const std::string bytes = io.str();
  REQUIRE(bytes.size() == 8 + 8 * p.n_steps());
  CHECK(static_cast<unsigned char>(bytes[0]) == 0x42);
  CHECK(static_cast<unsigned char>(bytes[1]) == 0x56);
  const auto back = read_increments(io);
  CHECK(back.level == 3);
  CHECK(back.increments == p.increments);

  std::stringstream bad(std::string("\x00\x00\x03\x00\x10\x00\x00\x00", 8));
  CHECK_THROWS_AS(read_increments(bad), std::runtime_error);
  std::stringstream cut(bytes.substr(0, 20));
  CHECK_THROWS_AS(read_increments(cut), std::runtime_error);
}
