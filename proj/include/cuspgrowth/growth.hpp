#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cuspgrowth/cusp_geometry.hpp"

namespace cuspgrowth {

enum class CountingKind { ParabolicOrbit, LatticeOrbit, Volume, Cuspidal };

const char* kind_name(CountingKind kind);

// ln f(R) on an increasing grid. -inf encodes f(R) = 0.
struct CountingTable {
  std::vector<double> grid;
  std::vector<double> log_values;
  CountingKind kind = CountingKind::Volume;

  // Throws ConstraintError on size mismatch, non-increasing grid, or a decreasing
  // counting function.
  void validate() const;
};

// Finite-window surrogates for the upper and lower exponential growth rates.
struct GrowthEstimate {
  double omega_plus = 0.0;
  double omega_minus = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::vector<double> grid;
  std::vector<double> ratios;  // ln f(R) / R at each grid point in the window
  double argmax = 0.0;
  double argmin = 0.0;
};

// #{k : exact_distance((0,0),(k,0)) <= R}. The largest admissible |k| is the floor of the
// boundary reach at radius R. Counts above 2^52 are reported as 2 X + 1 without rounding.
CountingTable parabolic_counting(const CuspModel& model, const std::vector<double>& R_grid,
                                 unsigned threads = 1);

double horospherical_area(const CuspModel& model, double t);
double log_horospherical_area(const CuspModel& model, double t);

// ln of F(R) = integral over [0,R] of A(t)/A((t+R)/2).
double cuspidal_F(const CuspModel& model, double R, double rel_tol = 1e-6);
CountingTable cuspidal_table(const CuspModel& model, const std::vector<double>& R_grid,
                             unsigned threads = 1);

// Max / min of ln f(R)/R over grid points with R in [lo, hi], R > 0.
GrowthEstimate growth_exponents(const CountingTable& table, double lo, double hi);

// (f*g)(R) = sum_{n=0}^{[R]} f(n) g(R-n). Both tables must share one grid of consecutive
// integers; values below the first grid point count as zero.
CountingTable convolve(const CountingTable& f, const CountingTable& g);

struct Sandwich {
  CountingTable lower;
  CountingTable upper;
};
// lower = vGamma + sum F_i, upper = vGamma + sum vGamma * F_i.
Sandwich volume_sandwich(const CountingTable& vGamma, const std::vector<CountingTable>& F_list);

struct OmegaPair {
  double plus = 0.0;
  double minus = 0.0;
};
OmegaPair max_formula(const OmegaPair& delta_gamma, const std::vector<OmegaPair>& F_estimates);

struct PinchPredicates {
  double ratio = 0.0;         // deltaP / deltaP_minus
  bool half_pinched = false;  // ratio <= 2
  bool case_i = false;        // deltaP >= 2 deltaP_minus
  double volume_lower = 0.0;  // exponent bounds for vol(B(x,R) in the horoball)
  double volume_upper = 0.0;
};
PinchPredicates pinch_predicates(double deltaP, double deltaP_minus, double eps);

// Header "R,ln_vP,ln_F,ln_vP_plus_u_half,ln_vP_over_R,ln_F_over_R".
std::string growth_table_csv(const CuspModel& model, const std::vector<double>& R_grid,
                             unsigned threads = 1);
std::string counting_table_csv(const CountingTable& table);

nlohmann::json to_json(const GrowthEstimate& estimate);
nlohmann::json to_json(const CountingTable& table);

}  // namespace cuspgrowth
