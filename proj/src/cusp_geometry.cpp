#include "cuspgrowth/cusp_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "cuspgrowth/errors.hpp"
#include "cuspgrowth/growth.hpp"
#include "cuspgrowth/numerics.hpp"

namespace cuspgrowth {

CuspModel CuspModel::constant(double alpha) { return CuspModel(LogAreaProfile::constant(alpha)); }

CuspModel::CuspModel(LogAreaProfile profile)
    : profile_(std::make_shared<const LogAreaProfile>(std::move(profile))) {}

double CuspModel::a() const { return profile_->a(); }
double CuspModel::b() const { return profile_->b(); }
double CuspModel::area(double t) const { return std::exp(-u(t)); }
double CuspModel::drop(double t, double h) const { return profile_->drop(t, h); }

double horo_distance(const CuspModel& model, double t, double x1, double x2) {
  return model.area(t) * std::abs(x1 - x2);
}

double meeting_height(const CuspModel& model, double x1, double x2) {
  const double v = std::log(std::abs(x1 - x2));
  if (v <= model.u(0.0)) return 0.0;
  return model.inverse_log_area(v);
}

double quasigeodesic_distance(const CuspModel& model, const HoroPoint& p, const HoroPoint& q) {
  if (p.x == q.x) return std::abs(p.t - q.t);
  const double txy = meeting_height(model, p.x, q.x);
  if (p.t <= txy && q.t <= txy) return 2.0 * txy - p.t - q.t;
  return std::abs(p.t - q.t);
}

namespace {

// Panel recursion cap: the integrands are smooth between knots, so deeper recursion only
// chases rounding noise when the tolerance sits near machine precision.
constexpr unsigned kDepth = 8;

// Integrals along a geodesic with apex t_star over heights [ta, tb], tb <= t_star, in the
// variable t = t_star - w^2. `log_dx` is ln of the horizontal displacement.
struct Branch {
  double log_dx = kNegInf;
  double length = 0.0;
};

class Shooter {
 public:
  Shooter(const CuspModel& model, double tol) : model_(model), tol_(tol) {}

  Branch segment(double t_star, double ta, double tb) const {
    Branch out;
    if (!(tb > ta)) return out;
    const double u_star = model_.u(t_star);
    const double du_star = model_.jet(t_star).du;
    const double w_lo = std::sqrt(std::max(0.0, t_star - tb));
    const double w_hi = std::sqrt(t_star - ta);
    std::vector<double> breaks;
    for (double k : model_.knots(ta, tb)) breaks.push_back(std::sqrt(t_star - k));
    // e^{-2D} decays on the scale w ~ 1, so long ranges get geometric panels near the apex.
    for (double w = 0.25; w < w_hi; w *= 2.0) breaks.push_back(w);
    std::sort(breaks.begin(), breaks.end());

    // 1/sqrt(1 - e^{-2D}) * 2w, with the w -> 0 limit 2/sqrt(2 u'(t_star)).
    auto kernel = [&](double w, double& D) {
      D = model_.drop(t_star, w * w);
      if (!(D > 0.0)) {
        D = 0.0;
        return 2.0 / std::sqrt(2.0 * du_star);
      }
      return 2.0 * w / std::sqrt(-std::expm1(-2.0 * D));
    };
    auto fx = [&](double w) {
      double D;
      const double k = kernel(w, D);
      return k * std::exp(-2.0 * D);
    };
    auto fl = [&](double w) {
      double D;
      return kernel(w, D);
    };
    const auto rx = integrate_piecewise(fx, w_lo, w_hi, breaks, tol_, kDepth);
    const auto rl = integrate_piecewise(fl, w_lo, w_hi, breaks, tol_, kDepth);
    if (!std::isfinite(rx.value) || !std::isfinite(rl.value))
      throw NumericalError("exact_distance: quadrature produced a non-finite value");
    out.log_dx = u_star + std::log(rx.value);
    out.length = rl.value;
    return out;
  }

  Branch monotone(double t_star, double t_lo, double t_hi) const {
    return segment(t_star, t_lo, t_hi);
  }

  Branch turning(double t_star, double t_lo, double t_hi) const {
    const Branch a = segment(t_star, t_lo, t_star);
    const Branch b = segment(t_star, t_hi, t_star);
    return {log_add(a.log_dx, b.log_dx), a.length + b.length};
  }

 private:
  const CuspModel& model_;
  double tol_;
};

// Finds t_star in (t_hi, inf) where `above(t_star)` switches from false to true.
template <class Pred>
double bisect_apex(double t_hi, Pred above, int max_iterations, int& iterations) {
  double lo = t_hi;
  double step = 1.0;
  double hi = t_hi + step;
  while (!above(hi)) {
    lo = hi;
    step *= 2.0;
    hi = t_hi + step;
    if (++iterations > max_iterations || step > 1e12)
      throw NumericalError("exact_distance: could not bracket the turning height");
  }
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (above(mid) ? hi : lo) = mid;
    if (++iterations > max_iterations)
      throw NumericalError("exact_distance: bisection did not converge; loosen the quadrature tolerance");
  }
  return 0.5 * (lo + hi);
}

void check_point(const HoroPoint& p) {
  if (!(p.t >= 0.0) || !std::isfinite(p.x) || !std::isfinite(p.t))
    throw ConstraintError("exact_distance: point outside the horoball (need t >= 0)");
}

}  // namespace

GeodesicSolution solve_geodesic(const CuspModel& model, const HoroPoint& p, const HoroPoint& q,
                                const GeodesicOptions& options) {
  check_point(p);
  check_point(q);
  GeodesicSolution sol;
  const double dx = std::abs(p.x - q.x);
  const double t_lo = std::min(p.t, q.t);
  const double t_hi = std::max(p.t, q.t);
  if (dx == 0.0) {
    sol.length = t_hi - t_lo;
    sol.t_star = t_hi;
    sol.vertical = true;
    return sol;
  }
  const Shooter shoot(model, options.rel_tol);
  const double target = std::log(dx);
  const Branch edge = shoot.monotone(t_hi, t_lo, t_hi);
  sol.turns = !(target <= edge.log_dx);
  int it = 0;
  if (sol.turns) {
    sol.t_star = bisect_apex(
        t_hi, [&](double ts) { return shoot.turning(ts, t_lo, t_hi).log_dx >= target; },
        options.max_iterations, it);
    const Branch b = shoot.turning(sol.t_star, t_lo, t_hi);
    sol.length = b.length;
    sol.dx = std::exp(b.log_dx);
  } else {
    sol.t_star = bisect_apex(
        t_hi, [&](double ts) { return shoot.monotone(ts, t_lo, t_hi).log_dx <= target; },
        options.max_iterations, it);
    const Branch b = shoot.monotone(sol.t_star, t_lo, t_hi);
    sol.length = b.length;
    sol.dx = std::exp(b.log_dx);
  }
  sol.iterations = it;
  return sol;
}

double exact_distance(const CuspModel& model, const HoroPoint& p, const HoroPoint& q,
                      const GeodesicOptions& options) {
  return solve_geodesic(model, p, q, options).length;
}

double log_reach_at_height(const CuspModel& model, double t0, double t, double R,
                           const GeodesicOptions& options) {
  if (!(t0 >= 0.0 && t >= 0.0)) throw ConstraintError("reach_at_height: heights must be >= 0");
  const double t_lo = std::min(t0, t);
  const double t_hi = std::max(t0, t);
  if (!(R > t_hi - t_lo)) return kNegInf;
  const Shooter shoot(model, options.rel_tol);
  const Branch edge = shoot.monotone(t_hi, t_lo, t_hi);
  int it = 0;
  if (R >= edge.length) {
    const double ts = bisect_apex(
        t_hi, [&](double s) { return shoot.turning(s, t_lo, t_hi).length >= R; },
        options.max_iterations, it);
    return shoot.turning(ts, t_lo, t_hi).log_dx;
  }
  const double ts = bisect_apex(
      t_hi, [&](double s) { return shoot.monotone(s, t_lo, t_hi).length <= R; },
      options.max_iterations, it);
  return shoot.monotone(ts, t_lo, t_hi).log_dx;
}

double reach_at_height(const CuspModel& model, double t0, double t, double R,
                       const GeodesicOptions& options) {
  if (R < std::abs(t - t0)) return -1.0;
  return std::exp(log_reach_at_height(model, t0, t, R, options));
}

VolumeResult ball_horoball_volume(const CuspModel& model, double R, double center_height,
                                  double rel_tol) {
  if (!(R > 0.0)) throw ConstraintError("ball_horoball_volume: R must be positive");
  if (!(center_height >= 0.0)) throw ConstraintError("ball_horoball_volume: center below the horoball");
  const GeodesicOptions inner{1e-11, 400};
  const double t0 = center_height;

  // Each slice at height t contributes 2 A(t) X(t); substitutions t = t0 + R - w^2 and
  // t = t0 - R + w^2 absorb the square-root vanishing of X at the top and bottom.
  auto slice = [&](double t) {
    const double x = reach_at_height(model, t0, t, R, inner);
    return x > 0.0 ? 2.0 * model.area(t) * x : 0.0;
  };
  CompensatedSum vol;
  double err = 0.0;
  const double root = std::sqrt(R);
  auto top = [&](double w) { return 2.0 * w * slice(t0 + R - w * w); };
  auto top_part = integrate(top, 0.0, root, rel_tol, 15);
  vol.add(top_part.value);
  err += top_part.error;
  if (t0 > 0.0) {
    if (t0 >= R) {
      auto bottom = [&](double w) { return 2.0 * w * slice(t0 - R + w * w); };
      auto part = integrate(bottom, 0.0, root, rel_tol, 15);
      vol.add(part.value);
      err += part.error;
    } else {
      auto part = integrate(slice, 0.0, t0, rel_tol, 15);
      vol.add(part.value);
      err += part.error;
    }
  }
  VolumeResult out{vol.value(), err};
  if (!std::isfinite(out.volume))
    throw NumericalError("ball_horoball_volume: quadrature budget exceeded");
  return out;
}

double flow_contraction(const CuspModel& model, double t, double s) {
  if (!(t >= 0.0 && s >= 0.0)) throw ConstraintError("flow_contraction: need t, s >= 0");
  if (s == 0.0) return 1.0;
  return std::exp(-model.drop(t + s, s));
}

std::string distance_table_csv(const CuspModel& model, const std::vector<double>& dxs) {
  std::ostringstream os;
  os << std::setprecision(17) << "dx,exact,quasi,gap\n";
  for (double dx : dxs) {
    const HoroPoint o{0.0, 0.0};
    const HoroPoint p{dx, 0.0};
    const double e = exact_distance(model, o, p);
    const double qd = quasigeodesic_distance(model, o, p);
    os << dx << ',' << e << ',' << qd << ',' << e - qd << '\n';
  }
  return os.str();
}

std::string volume_table_csv(const CuspModel& model, const std::vector<double>& radii) {
  std::ostringstream os;
  os << std::setprecision(17) << "R,volume,F,ratio\n";
  for (double R : radii) {
    const double v = ball_horoball_volume(model, R).volume;
    const double F = std::exp(cuspidal_F(model, R));
    os << R << ',' << v << ',' << F << ',' << v / F << '\n';
  }
  return os.str();
}

}  // namespace cuspgrowth
