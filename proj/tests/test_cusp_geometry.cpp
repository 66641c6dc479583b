#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cuspgrowth/cusp_geometry.hpp"
#include "cuspgrowth/growth.hpp"
#include "cuspgrowth/numerics.hpp"
#include "fixtures.hpp"

using namespace cuspgrowth;

namespace {

// Upper half-plane with y = e^{alpha t}, scaled by 1/alpha.
double hyperbolic(double alpha, HoroPoint p, HoroPoint q) {
  const double y1 = std::exp(alpha * p.t), y2 = std::exp(alpha * q.t);
  const double dx = alpha * (p.x - q.x);
  return std::acosh(1.0 + (dx * dx + (y1 - y2) * (y1 - y2)) / (2.0 * y1 * y2)) / alpha;
}

const CuspModel& unit() {
  static const auto m = CuspModel::constant(1.0);
  return m;
}

}  // namespace

TEST_CASE("horocyclic distance and meeting height") {
  CHECK(horo_distance(unit(), 0.0, 0.0, 3.0) == doctest::Approx(3.0));
  CHECK(meeting_height(unit(), 0.0, std::exp(10.0)) == doctest::Approx(10.0));
  CHECK(meeting_height(unit(), 0.0, 0.7) == 0.0);
  const auto& m = fixtures::desk_model();
  const auto& s = *m.profile().schedule();
  const double p = s.p[0];
  CHECK(meeting_height(m, 0.0, std::exp(p)) == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("quasigeodesic distance") {
  CHECK(quasigeodesic_distance(unit(), {0, 3}, {0, 7}) == doctest::Approx(4.0));
  CHECK(quasigeodesic_distance(unit(), {0, 0}, {std::exp(6.0), 0}) ==
        doctest::Approx(12.0));
  const double q = quasigeodesic_distance(unit(), {0, 0}, {100, 0});
  CHECK(std::abs(q - 2.0 * std::asinh(50.0)) <= 2.0);
}

TEST_CASE("exact distance against the hyperbolic closed form") {
  CHECK(exact_distance(unit(), {0, 0}, {5, 0}) ==
        doctest::Approx(2.0 * std::asinh(2.5)).epsilon(1e-12));
  CHECK(exact_distance(unit(), {2, 1}, {2, 6}) == doctest::Approx(5.0));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> h(0.0, 8.0), lx(-3.0, 9.0);
  for (double alpha : {1.0, 0.6, 2.5}) {
    const auto m = CuspModel::constant(alpha);
    for (int k = 0; k < 200; ++k) {
      HoroPoint p{0.0, h(rng)}, q{std::exp(lx(rng)), h(rng)};
      const double ref = hyperbolic(alpha, p, q);
      CHECK(exact_distance(m, p, q) == doctest::Approx(ref).epsilon(1e-9));
    }
  }
}

TEST_CASE("constant curvature: boundary chord obeys the sinh law") {
  for (double a : {0.5, 1.0, 2.0}) {
    const auto m = CuspModel::constant(a);
    for (double dx : {0.1, 1.0, 10.0, 1e4}) {
      const double d = exact_distance(m, {0, 0}, {dx, 0});
      CHECK(horo_distance(m, 0.0, 0.0, dx) == doctest::Approx(2.0 / a * std::sinh(a * d / 2)));
    }
  }
}

TEST_CASE("exact distance is monotone, symmetric and a metric on the built model") {
  const auto& m = fixtures::desk_model();
  double prev = 0.0;
  for (double dx = 0.01; dx < 1e300; dx *= 3.0) {
    const double d = exact_distance(m, {0, 0}, {dx, 0});
    CHECK(d > prev);
    prev = d;
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> h(0.0, 40.0), lx(-2.0, 60.0);
  auto point = [&] { return HoroPoint{std::exp(lx(rng)), h(rng)}; };
  for (int k = 0; k < 200; ++k) {
    const auto p = point(), q = point(), r = point();
    const double pq = exact_distance(m, p, q);
    CHECK(pq == doctest::Approx(exact_distance(m, q, p)).epsilon(1e-10));
    const double pr = exact_distance(m, p, r), rq = exact_distance(m, r, q);
    CHECK(pq <= pr + rq + 1e-6);
  }
}

TEST_CASE("boundary pairs stay within a constant of twice the meeting height") {
  const auto& m = fixtures::desk_model();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lx(0.0, 700.0);
  // The gap saturates once the meeting height clears the first plateau scale.
  double low = 0.0, high = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double l = lx(rng);
    const double dx = std::exp(l);
    const double d = exact_distance(m, {0, 0}, {dx, 0});
    const double gap = std::abs(d - 2.0 * meeting_height(m, 0.0, dx));
    if (l > 20.0) (l < 350.0 ? low : high) = std::max(l < 350.0 ? low : high, gap);
    const double qd = quasigeodesic_distance(m, {0, 0}, {dx, 0});
    CHECK(std::abs(d - qd) < 3.0);
  }
  CHECK(low < 3.0);
  CHECK(high < 3.0);
  CHECK(std::abs(high - low) < 0.5);
}

TEST_CASE("flow contraction lies between the curvature bounds") {
  CHECK(flow_contraction(unit(), 4.0, 0.0) == 1.0);
  CHECK(flow_contraction(CuspModel::constant(1.5), 4.0, 2.0) ==
        doctest::Approx(std::exp(-3.0)));
  const auto& m = fixtures::desk_model();
  const double top = 2.0 * m.profile().schedule()->delta_pow(2);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> t(0.0, top), s(0.0, 50.0);
  for (int k = 0; k < 1000; ++k) {
    const double tt = t(rng), ss = s(rng);
    const double ln = std::log(flow_contraction(m, tt, ss));
    CHECK(ln >= -m.b() * ss - 1e-9);
    CHECK(ln <= -m.a() * ss + 1e-9);
  }
}

TEST_CASE("reach slices agree with the distance") {
  const auto& m = fixtures::desk_model();
  for (double t : {0.0, 2.0, 7.5}) {
    const double x = reach_at_height(m, 0.0, t, 12.0);
    CHECK(exact_distance(m, {0, 0}, {x, t}) == doctest::Approx(12.0).epsilon(1e-9));
    CHECK(log_reach_at_height(m, 0.0, t, 12.0) == doctest::Approx(std::log(x)).epsilon(1e-10));
  }
  CHECK(reach_at_height(m, 0.0, 13.0, 12.0) < 0.0);
  CHECK(log_reach_at_height(m, 0.0, 13.0, 12.0) == kNegInf);
}

TEST_CASE("small balls are flat, interior balls are hyperbolic") {
  const double R = 0.01;
  const double pi = std::numbers::pi;
  CHECK(ball_horoball_volume(unit(), R, 1.0).volume == doctest::Approx(pi * R * R).epsilon(0.01));
  CHECK(ball_horoball_volume(unit(), R, 0.0).volume ==
        doctest::Approx(0.5 * pi * R * R).epsilon(0.01));
  CHECK(ball_horoball_volume(unit(), 3.0, 5.0, 1e-6).volume ==
        doctest::Approx(2.0 * pi * (std::cosh(3.0) - 1.0)).epsilon(1e-5));
}

TEST_CASE("volume tracks the cuspidal function in constant curvature") {
  double lo = 1e300, hi = 0.0;
  for (double R : {4.0, 8.0, 12.0, 16.0}) {
    const double ratio = ball_horoball_volume(unit(), R).volume / (2.0 * (std::exp(R / 2) - 1.0));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(lo > 0.25);
  CHECK(hi < 4.0);
  CHECK(hi / lo < 1.5);
}

TEST_CASE("ball is covered by the flowed half ball") {
  const auto& m = fixtures::desk_model();
  std::mt19937_64 rng(21);
  std::vector<double> excess;
  for (double R : {4.0, 8.0, 12.0}) {
    double worst = kNegInf;
    std::uniform_real_distribution<double> ht(0.0, R), frac(-1.0, 1.0);
    for (int k = 0; k < 200; ++k) {
      const double t = ht(rng);
      const double x = reach_at_height(m, 0.0, t, R);
      if (x < 0.0) continue;
      const HoroPoint p{x * frac(rng), t};
      worst = std::max(worst, exact_distance(m, {0, R / 2}, p) - R / 2);
    }
    excess.push_back(worst);
  }
  for (double e : excess) CHECK(e < 2.0);
  CHECK(*std::max_element(excess.begin(), excess.end()) -
            *std::min_element(excess.begin(), excess.end()) <
        0.5);
  const double band = ball_horoball_volume(m, 8.0).volume;
  const double cover = ball_horoball_volume(m, 4.0 + 2.0, 4.0).volume;
  CHECK(band <= cover);
}

TEST_CASE("csv tables") {
  const auto d = distance_table_csv(unit(), {1.0, 10.0});
  CHECK(d.rfind("dx,exact,quasi,gap\n", 0) == 0);
  const auto v = volume_table_csv(unit(), {4.0});
  CHECK(v.rfind("R,volume,F,ratio\n", 0) == 0);
}
