#pragma once

#include <array>
#include <vector>

namespace cuspgrowth {

// Which exponential sits on the left of the gap: e^{-alpha t} -> e^{-beta t} or back.
enum class BridgeDirection { AlphaToBeta, BetaToAlpha };

// Gap [t1,t2] between two exponential plateaus, inside the working range [t0,t3].
struct BridgeSpec {
  double t0 = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  BridgeDirection direction = BridgeDirection::AlphaToBeta;

  // Throws ConstraintError unless t0<t1<t2<t3, 0<alpha<=beta and 0<eta<alpha^2.
  // alpha == beta is accepted as the degenerate constant-curvature bridge.
  void validate() const;

  double left_rate() const { return direction == BridgeDirection::AlphaToBeta ? alpha : beta; }
  double right_rate() const { return direction == BridgeDirection::AlphaToBeta ? beta : alpha; }
};

// Tangent-line conditions for a convex decreasing C^2 junction of e^{-a t} (left) and
// e^{-b t} (right). Margins are natural logs of RHS/LHS after normalisation, so they
// stay finite for heights where the exponentials themselves underflow.
struct FeasibilityReport {
  bool ineq_a_holds = false;
  bool ineq_b_holds = false;
  double margin_a = 0.0;
  double margin_b = 0.0;
  bool sufficient_condition_holds = false;

  bool feasible() const { return ineq_a_holds && ineq_b_holds; }
};

FeasibilityReport check_epigraph_feasibility(const BridgeSpec& spec);

// Worst-case separation constants (A, B) such that t2 > A t1 and t0 > B guarantee a
// pinched bridge. M1, M2 bound |v'|, |v''| of the slope profile used by build_bridge in
// the wide-gap limit; C = 1 / (8 (beta+1) (M1 + M2 + beta)).
struct SeparationRequirement {
  double A_required = 0.0;
  double B_required = 0.0;
  double C = 0.0;
  double M1 = 0.0;
  double M2 = 0.0;
};

SeparationRequirement required_separation(double alpha, double beta, double eta);

// Smallest ratio t2/t1 for which build_bridge keeps the slope overshoot inside its
// budget with half of that budget left for the corner ramps. This is the practical
// separation used by desk-scale schedules; verify_pinching certifies the result.
double sharp_separation(double alpha, double beta, double eta, BridgeDirection direction);

// Slope budget: how far the bridge slope may leave [alpha, beta] on the overshoot side.
double slope_budget(double alpha, double beta, double eta, BridgeDirection direction);

// C^1 slope profile on s in [0,1]:
//   start on [0, e/2], smoothstep to middle on [e/2, e], middle on [e, 1-e],
//   smoothstep to end on [1-e, 1-e/2], end on [1-e/2, 1]   (e = eps1).
class SlopeProfile {
 public:
  SlopeProfile() = default;
  SlopeProfile(double start, double middle, double end, double eps1);

  double value(double s) const;
  double derivative(double s) const;
  double second_derivative(double s) const;
  // Integral of value() over [0,s].
  double integral(double s) const;

  double start() const { return start_; }
  double middle() const { return middle_; }
  double end() const { return end_; }
  double eps1() const { return eps1_; }
  // Segment boundaries 0, e/2, e, 1-e, 1-e/2, 1.
  std::array<double, 6> knots() const;

  // Middle slope that makes the total integral equal `total`.
  static double middle_for_total(double start, double end, double eps1, double total);

 private:
  int segment(double s) const;

  double start_ = 0.0;
  double middle_ = 0.0;
  double end_ = 0.0;
  double eps1_ = 0.0;
  std::array<double, 6> knots_{};
  std::array<double, 6> cumulative_{};
};

// u = -ln psi and its first two derivatives.
struct LogJet {
  double u = 0.0;
  double du = 0.0;
  double d2u = 0.0;

  // psi''/psi, i.e. minus the curvature of the warped metric psi^2 dx^2 + dt^2.
  double pinch() const { return du * du - d2u; }
};

// A single C^2 junction. On [t1,t2], u'(t) = v(s) with s = lambda (t - t1), anchored to
// u(t1) = a t1 on the left half and u(t2) = b t2 on the right half; outside the gap the
// pure exponentials continue.
class BridgeProfile {
 public:
  BridgeProfile(const BridgeSpec& spec, double lambda, SlopeProfile slope);

  const BridgeSpec& spec() const { return spec_; }
  double lambda() const { return lambda_; }
  double eps1() const { return slope_.eps1(); }
  const SlopeProfile& slope() const { return slope_; }

  LogJet eval(double t) const;
  // Knots of the piecewise definition mapped to t (t1, ramp ends, t2).
  std::vector<double> knots() const;

 private:
  BridgeSpec spec_;
  double lambda_;
  SlopeProfile slope_;
  double total_;
};

struct BridgeOptions {
  // Skip the worst-case separation test and rely on verify_pinching afterwards.
  bool aggressive = true;
};

BridgeProfile build_bridge(const BridgeSpec& spec, const BridgeOptions& options = {});

struct PinchReport {
  std::size_t n_samples = 0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  bool within_bounds = false;
  double fd_step = 0.0;
  double max_fd_abs_error = 0.0;
  double max_fd_rel_error = 0.0;
};

// Samples psi''/psi = (u')^2 - u'' on a uniform grid in each segment of [t0,t3] and
// cross-checks it against central differences of u. The step is 1e-4 of a corner ramp
// width, the shortest scale on which u'' varies.
PinchReport verify_pinching(const BridgeProfile& profile, std::size_t n_samples);

}  // namespace cuspgrowth
