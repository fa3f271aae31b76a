#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace volterra {

double mean(std::span<const double> v);
// Unbiased sample variance; 0 for fewer than two samples.
double sample_variance(std::span<const double> v);
double median(std::vector<double> v);
double max_abs(std::span<const double> v);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares of y on x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);
// Least squares of log(y) on log(x); non-positive entries are rejected.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

std::vector<double> linspace(double a, double b, std::size_t n);
std::vector<double> logspace(double a, double b, std::size_t n);

// Worker count from VOLTERRA_LAB_THREADS, else hardware concurrency (>= 1).
unsigned worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads. Callers write
// into index-addressed storage so the result does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace volterra
