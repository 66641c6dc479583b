#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cuspgrowth/area_profile.hpp"

namespace cuspgrowth {

// The horoball R x [0,inf) with metric A(t)^2 dx^2 + dt^2, A = e^{-u}. The parabolic
// generator acts by x -> x + 1. Below the profile's t_start the pure alpha exponential
// continues down to t = 0.
class CuspModel {
 public:
  static CuspModel constant(double alpha);
  explicit CuspModel(LogAreaProfile profile);

  const LogAreaProfile& profile() const { return *profile_; }
  double translation_width() const { return 1.0; }
  double alpha() const { return profile_->alpha(); }
  double beta() const { return profile_->beta(); }
  // Curvature bounds -b^2 <= K <= -a^2.
  double a() const;
  double b() const;

  double u(double t) const { return profile_->eval_extended(t).u; }
  LogJet jet(double t) const { return profile_->eval_extended(t); }
  double area(double t) const;
  // u(t) - u(t - h), exact on plateaus.
  double drop(double t, double h) const;
  double inverse_log_area(double v) const { return profile_->inverse_extended(v); }
  std::vector<double> knots(double lo, double hi) const { return profile_->knots(lo, hi); }

 private:
  std::shared_ptr<const LogAreaProfile> profile_;
};

struct HoroPoint {
  double x = 0.0;
  double t = 0.0;
};

// Busemann function of the cusp point: height difference.
inline double busemann(const HoroPoint& p, const HoroPoint& q) { return q.t - p.t; }

double horo_distance(const CuspModel& model, double t, double x1, double x2);
double meeting_height(const CuspModel& model, double x1, double x2);
// 2 t_xy - s - t when both heights are below the meeting height, |s - t| otherwise.
// Agrees with exact_distance up to an additive constant depending on (a, b).
double quasigeodesic_distance(const CuspModel& model, const HoroPoint& p, const HoroPoint& q);

struct GeodesicOptions {
  double rel_tol = 1e-14;
  int max_iterations = 200;
};

// Geodesic between heights t_lo <= t_hi with turning height t_star >= t_hi. The
// conserved quantity is c = A(t_star); `turns` is false when the apex lies beyond t_hi.
struct GeodesicSolution {
  double length = 0.0;
  double dx = 0.0;
  double t_star = 0.0;
  bool turns = false;
  bool vertical = false;
  int iterations = 0;
};

GeodesicSolution solve_geodesic(const CuspModel& model, const HoroPoint& p, const HoroPoint& q,
                                const GeodesicOptions& options = {});
double exact_distance(const CuspModel& model, const HoroPoint& p, const HoroPoint& q,
                      const GeodesicOptions& options = {});

// Largest |dx| with exact_distance((0,t0), (dx,t)) <= R; negative when |t - t0| > R.
double reach_at_height(const CuspModel& model, double t0, double t, double R,
                       const GeodesicOptions& options = {});
// ln of the same reach; -inf when the slice at height t is empty or a single point.
double log_reach_at_height(const CuspModel& model, double t0, double t, double R,
                           const GeodesicOptions& options = {});

struct VolumeResult {
  double volume = 0.0;
  double error = 0.0;
};

// Area of {p in horoball : exact_distance((0,center_height), p) <= R}.
VolumeResult ball_horoball_volume(const CuspModel& model, double R, double center_height = 0.0,
                                  double rel_tol = 1e-3);

// A(t+s)/A(t).
double flow_contraction(const CuspModel& model, double t, double s);

// Boundary pairs (0,0),(dx,0): header "dx,exact,quasi,gap".
std::string distance_table_csv(const CuspModel& model, const std::vector<double>& dxs);
// Header "R,volume,F,ratio" with F the cuspidal function of the model.
std::string volume_table_csv(const CuspModel& model, const std::vector<double>& radii);

}  // namespace cuspgrowth
