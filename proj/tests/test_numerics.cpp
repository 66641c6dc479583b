#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cuspgrowth/numerics.hpp"

using namespace cuspgrowth;

TEST_CASE("log_add handles infinities and large gaps") {
  CHECK(log_add(kNegInf, 3.0) == 3.0);
  CHECK(log_add(2.0, kNegInf) == 2.0);
  CHECK(log_add(0.0, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(log_add(1000.0, 0.0) == doctest::Approx(1000.0));
}

TEST_CASE("log_sum_exp matches direct summation") {
  std::vector<double> xs{0.1, -2.0, 1.5, 0.0};
  double direct = 0.0;
  for (double x : xs) direct += std::exp(x);
  CHECK(log_sum_exp(xs) == doctest::Approx(std::log(direct)).epsilon(1e-14));
  CHECK(log_sum_exp(std::vector<double>{}) == kNegInf);
  std::vector<double> huge{800.0, 800.0};
  CHECK(log_sum_exp(huge) == doctest::Approx(800.0 + std::log(2.0)));
}

TEST_CASE("compensated sum recovers cancelled terms") {
  CompensatedSum s;
  s.add(1.0);
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  CHECK(s.value() == 2.0);
}

TEST_CASE("quadrature on polynomials and kinks") {
  auto r = integrate([](double x) { return x * x; }, 0.0, 1.0, 1e-12);
  CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  std::vector<double> breaks{0.3};
  auto k = integrate_piecewise([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, breaks,
                               1e-12);
  CHECK(k.value == doctest::Approx(0.5 * 0.09 + 0.5 * 0.49).epsilon(1e-13));
  CHECK(integrate([](double) { return 1.0; }, 1.0, 1.0, 1e-9).value == 0.0);
}

TEST_CASE("parallel_for fills every slot once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(100, 4,
                               [](std::size_t i) {
                                 if (i == 37) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}
