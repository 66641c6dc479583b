#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "cuspgrowth/errors.hpp"
#include "cuspgrowth/growth.hpp"
#include "cuspgrowth/numerics.hpp"
#include "fixtures.hpp"

using namespace cuspgrowth;

namespace {

CountingTable table(const std::vector<double>& grid, const std::function<double(double)>& lnf) {
  CountingTable t;
  t.grid = grid;
  for (double R : grid) t.log_values.push_back(lnf(R));
  return t;
}

std::vector<double> integers(int hi) {
  std::vector<double> g;
  for (int i = 0; i <= hi; ++i) g.push_back(i);
  return g;
}

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> g;
  for (int i = 0; lo + i * step <= hi + 1e-9; ++i) g.push_back(lo + i * step);
  return g;
}

}  // namespace

TEST_CASE("parabolic counting in constant curvature") {
  const auto m = CuspModel::constant(1.0);
  std::vector<double> grid{0.0, 0.7, 1.3, 2.9, 5.5, 11.1, 17.3, 26.9, 38.2};
  const auto t = parabolic_counting(m, grid, 2);
  CHECK(t.log_values[0] == 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double n = 2.0 * std::floor(2.0 * std::sinh(grid[i] / 2)) + 1.0;
    CHECK(t.log_values[i] == doctest::Approx(std::log(n)).epsilon(1e-12));
  }
  const auto band = parabolic_counting(m, range(10, 40, 1));
  for (std::size_t i = 0; i < band.grid.size(); ++i) {
    const double prod = std::exp(band.log_values[i] - band.grid[i] / 2);
    CHECK(prod > 1.9);
    CHECK(prod < 2.1);
  }
}

TEST_CASE("built profile: counting tracks the inverse area at half radius") {
  const auto& m = fixtures::desk_model();
  const auto grid = aligned_grid(*m.profile().schedule(), false);
  const auto t = parabolic_counting(m, grid, 4);
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double c = t.log_values[i] - m.u(grid[i] / 2);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  CHECK(hi - lo < std::log(100.0));
  double top = 0.0, bottom = 1e300;
  for (double R : grid) {
    top = std::max(top, m.u(R / 2) / R);
    bottom = std::min(bottom, m.u(R / 2) / R);
  }
  CHECK(top >= 2.5 / 2 - 0.02);
  CHECK(bottom <= 1.0 / 2 + 0.02);
}

TEST_CASE("horospherical area") {
  const auto& m = fixtures::desk_model();
  CHECK(horospherical_area(m, 0.0) == 1.0);
  const auto& s = *m.profile().schedule();
  const double tb = 0.5 * (s.r[0] + s.s[0]);
  CHECK(log_horospherical_area(m, tb) == doctest::Approx(-2.5 * tb).epsilon(1e-15));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> t(0.0, 3e6), h(0.0, 100.0);
  for (int k = 0; k < 1000; ++k) {
    const double t0 = t(rng), dt = h(rng);
    const double ln = log_horospherical_area(m, t0 + dt) - log_horospherical_area(m, t0);
    CHECK(ln <= -m.a() * dt + 1e-6);
    CHECK(ln >= -m.b() * dt - 1e-6);
  }
}

TEST_CASE("cuspidal function closed form") {
  for (double a : {0.5, 1.0, 2.0}) {
    const auto m = CuspModel::constant(a);
    for (double R : {0.1, 3.0, 20.0, 400.0}) {
      const double ref = std::log(2.0 / a) + a * R / 2 + std::log(-std::expm1(-a * R / 2));
      CHECK(cuspidal_F(m, R) == doctest::Approx(ref).epsilon(1e-6));
    }
  }
  const auto m = CuspModel::constant(1.0);
  CHECK(std::exp(cuspidal_F(m, 1e-6)) < 1e-5);
}

TEST_CASE("cuspidal function beats beta/2 at the schedule scale") {
  const auto& m = fixtures::desk_model();
  const double R = m.profile().schedule()->delta_pow(1);
  CHECK(cuspidal_F(m, R) / R > 2.5 / 2);
  const auto gap = measure_cuspidal_gap(m, *m.profile().schedule());
  CHECK(gap.eps_hat > 0.0);
}

TEST_CASE("exponent estimates on synthetic tables") {
  auto g = range(0, 60, 0.5);
  auto a = growth_exponents(table(g, [](double R) { return 0.5 * R + std::log(2 + std::sin(R)); }),
                            21, 60);
  CHECK(a.omega_plus >= 0.45);
  CHECK(a.omega_plus <= 0.55);
  CHECK(a.omega_minus >= 0.45);
  CHECK(a.omega_minus <= 0.55);

  auto osc = growth_exponents(
      table(range(3, 3000, 1), [](double R) { return R * (0.5 + 0.2 * std::sin(std::log(R))); }),
      3, 3000);
  CHECK(osc.omega_plus >= 0.65);
  CHECK(osc.omega_minus <= 0.35);

  auto flat = growth_exponents(table(range(1, 10, 1), [](double) { return 0.0; }), 1, 10);
  CHECK(flat.omega_plus == 0.0);
  CHECK(flat.omega_minus == 0.0);

  CHECK_THROWS_AS(growth_exponents(table(g, [](double R) { return R; }), 10, 70), ConstraintError);
  auto down = table(g, [](double R) { return -R; });
  CHECK_NOTHROW(down.validate());
  down.kind = CountingKind::LatticeOrbit;
  CHECK_THROWS_AS(down.validate(), ConstraintError);
}

TEST_CASE("convolution") {
  const auto g = integers(200);
  const auto f = table(g, [](double R) { return 0.7 * R + std::log(1 + R); });
  const auto delta = table(g, [](double R) { return R == 0 ? 0.0 : kNegInf; });
  const auto id = convolve(f, delta);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(id.log_values[i] == doctest::Approx(f.log_values[i]).epsilon(1e-14));

  const auto h = table(g, [](double R) { return 0.3 * R; });
  const auto fh = convolve(f, h), hf = convolve(h, f);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(fh.log_values[i] == doctest::Approx(hf.log_values[i]).epsilon(1e-14));

  const auto ea = table(g, [](double R) { return 0.9 * R; });
  const auto eb = table(g, [](double R) { return 0.4 * R; });
  const auto w = growth_exponents(convolve(ea, eb), 100, 200);
  CHECK(w.omega_plus == doctest::Approx(0.9).epsilon(0.02));
  CHECK(w.omega_minus == doctest::Approx(0.9).epsilon(0.02));
  // closed form: sum_n e^{0.9 n} e^{0.4 (R-n)} = e^{0.4 R} (e^{0.5 (R+1)} - 1) / (e^{0.5} - 1)
  const auto ab = convolve(ea, eb);
  for (double R : {0.0, 7.0, 150.0}) {
    const double ref = 0.4 * R + std::log(std::expm1(0.5 * (R + 1)) / std::expm1(0.5));
    CHECK(ab.log_values[static_cast<std::size_t>(R)] == doctest::Approx(ref).epsilon(1e-12));
  }
  auto shifted = h;
  shifted.grid = range(0, 100, 0.5);
  shifted.log_values.resize(shifted.grid.size());
  CHECK_THROWS_AS(convolve(f, shifted), ConstraintError);
}

TEST_CASE("volume sandwich and max formula") {
  const auto g = integers(120);
  const auto vG = table(g, [](double R) { return R; });
  auto single = volume_sandwich(vG, {});
  CHECK(single.lower.log_values == vG.log_values);
  CHECK(single.upper.log_values == vG.log_values);
  const auto zero = table(g, [](double) { return kNegInf; });
  auto z = volume_sandwich(vG, {zero});
  CHECK(z.lower.log_values == vG.log_values);

  const auto F = table(g, [](double R) {
    return R == 0 ? kNegInf : std::log(2.0) + R / 2 + std::log(-std::expm1(-R / 2));
  });
  auto s = volume_sandwich(vG, {F});
  const auto lo = growth_exponents(s.lower, 60, 120), hi = growth_exponents(s.upper, 60, 120);
  CHECK(lo.omega_plus == doctest::Approx(1.0).epsilon(0.02));
  CHECK(hi.omega_plus == doctest::Approx(1.0).epsilon(0.02));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(s.lower.log_values[i] <= s.upper.log_values[i]);

  auto r = max_formula({1.0, 1.0}, {{0.5, 0.5}});
  CHECK(r.plus == 1.0);
  CHECK(r.minus == 1.0);
  const double eps_hat = 1e-3;
  r = max_formula({1.25 + eps_hat / 2, 0.5}, {{1.25 + eps_hat, 1.25}});
  CHECK(r.plus > 1.25 + eps_hat / 2);
  r = max_formula({0.7, 0.7}, {{0.7, 0.7}, {0.7, 0.7}});
  CHECK(r.plus == 0.7);
  CHECK(r.minus == 0.7);
}

TEST_CASE("pinch predicates") {
  auto c = pinch_predicates(0.5, 0.5, 0.01);
  CHECK(c.half_pinched);
  CHECK(c.volume_lower == doctest::Approx(0.49));
  CHECK(c.volume_upper == doctest::Approx(1.02));
  auto w = pinch_predicates(1.25, 0.5, 0.01);
  CHECK_FALSE(w.half_pinched);
  CHECK(w.case_i);
  auto edge = pinch_predicates(1.0, 0.5, 0.01);
  CHECK(edge.half_pinched);
  CHECK(edge.ratio == 2.0);
}

TEST_CASE("csv shapes") {
  const auto m = CuspModel::constant(1.0);
  const auto csv = growth_table_csv(m, {4.0, 8.0});
  CHECK(csv.rfind("R,ln_vP,ln_F,ln_vP_plus_u_half,ln_vP_over_R,ln_F_over_R\n", 0) == 0);
  CHECK(counting_table_csv(parabolic_counting(m, {1.0})).rfind("R,ln_f\n", 0) == 0);
}
