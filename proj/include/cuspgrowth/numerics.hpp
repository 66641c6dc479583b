#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace cuspgrowth {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ln(e^a + e^b), exact for infinite arguments.
double log_add(double a, double b);

// ln(sum_i e^{x_i}); -inf for an empty span.
double log_sum_exp(std::span<const double> xs);

// Neumaier compensated summation; order-dependent only through the input order.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod (7/15) on [a,b]. Thin wrapper over Boost.Math.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol, unsigned max_depth = 30);

// Integrates over consecutive breakpoints so kinks never sit inside a panel.
// `breaks` must be sorted; entries outside (a,b) are ignored.
QuadratureResult integrate_piecewise(const std::function<double(double)>& f, double a,
                                     double b, std::span<const double> breaks,
                                     double rel_tol, unsigned max_depth = 30);

// Runs fn(i) for i in [0,n) on up to `threads` workers. Each index is handled by exactly
// one worker; callers write results into index-addressed slots, so output is independent
// of the thread count. The first exception thrown by fn is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace cuspgrowth
