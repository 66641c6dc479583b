#include "cuspgrowth/convex_bridge.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cuspgrowth/errors.hpp"
#include "cuspgrowth/numerics.hpp"

namespace cuspgrowth {

namespace {

// Cubic smoothstep S(x) = 3x^2 - 2x^3 and its antiderivative / derivatives.
double smoothstep(double x) { return x * x * (3.0 - 2.0 * x); }
double smoothstep_d1(double x) { return 6.0 * x * (1.0 - x); }
double smoothstep_d2(double x) { return 6.0 - 12.0 * x; }
double smoothstep_int(double x) { return x * x * x * (1.0 - 0.5 * x); }

// Corner width in s for a given overshoot excess above the pure slopes.
double corner_width(double rate_gap, double excess, double slack) {
  return (excess - slack) / (0.75 * rate_gap + 1.5 * excess);
}

}  // namespace

void BridgeSpec::validate() const {
  std::ostringstream why;
  if (!(t0 < t1 && t1 < t2 && t2 < t3)) why << "heights must satisfy t0 < t1 < t2 < t3; ";
  if (!(alpha > 0.0)) why << "alpha must be positive; ";
  if (!(beta >= alpha)) why << "beta must be >= alpha; ";
  if (!(eta > 0.0 && eta < alpha * alpha)) why << "eta must lie in (0, alpha^2); ";
  if (!std::isfinite(t0) || !std::isfinite(t3)) why << "heights must be finite; ";
  const std::string msg = why.str();
  if (!msg.empty()) throw ConstraintError("BridgeSpec: " + msg.substr(0, msg.size() - 2));
}

FeasibilityReport check_epigraph_feasibility(const BridgeSpec& spec) {
  spec.validate();
  const double a = spec.left_rate();
  const double b = spec.right_rate();
  const double gap = spec.t2 - spec.t1;
  // X = ln(phi1(t1) / phi2(t2)).
  const double x = b * spec.t2 - a * spec.t1;

  FeasibilityReport r;
  // (a) phi1'(t1) gap < phi2(t2) - phi1(t1)   <=>   e^{-X} + a gap > 1
  r.margin_a = log_add(-x, std::log(a * gap));
  // (b) phi2(t2) - phi1(t1) < phi2'(t2) gap   <=>   e^{X} > 1 + b gap
  r.margin_b = x - std::log1p(b * gap);
  r.ineq_a_holds = r.margin_a > 0.0;
  r.ineq_b_holds = r.margin_b > 0.0;
  if (spec.direction == BridgeDirection::AlphaToBeta)
    r.sufficient_condition_holds = gap > 1.0 / spec.alpha;
  else
    r.sufficient_condition_holds = r.ineq_b_holds && gap > 1.0 / spec.beta;
  return r;
}

double slope_budget(double alpha, double beta, double eta, BridgeDirection direction) {
  return direction == BridgeDirection::AlphaToBeta ? eta / (4.0 * (beta + 1.0))
                                                   : eta / (4.0 * (alpha + 1.0));
}

double sharp_separation(double alpha, double beta, double eta, BridgeDirection direction) {
  if (!(alpha > 0.0 && beta >= alpha && eta > 0.0 && eta < alpha * alpha))
    throw ConstraintError("sharp_separation: need 0 < alpha <= beta and 0 < eta < alpha^2");
  return 1.0 + 2.0 * (beta - alpha) / slope_budget(alpha, beta, eta, direction);
}

SeparationRequirement required_separation(double alpha, double beta, double eta) {
  if (!(alpha > 0.0 && beta > alpha))
    throw ConstraintError("required_separation: need 0 < alpha < beta");
  if (!(eta > 0.0 && eta < alpha * alpha))
    throw ConstraintError("required_separation: need 0 < eta < alpha^2");

  SeparationRequirement r;
  for (auto dir : {BridgeDirection::AlphaToBeta, BridgeDirection::BetaToAlpha}) {
    const double budget = slope_budget(alpha, beta, eta, dir);
    const double excess = 0.5 * budget;
    const double e = std::min(0.5, corner_width(beta - alpha, excess, 0.0));
    // Largest ramp jump: from the plateau slope to the overshooting middle slope.
    const double jump = (beta - alpha) + excess;
    r.M1 = std::max(r.M1, 1.5 * jump / (0.5 * e));
    r.M2 = std::max(r.M2, 6.0 * jump / (0.25 * e * e));
  }
  r.C = 1.0 / (8.0 * (beta + 1.0) * (r.M1 + r.M2 + beta));
  r.A_required = std::max(beta / alpha, 1.0 + 1.0 / (r.C * eta));
  r.B_required = 1.0 / (beta - alpha);
  return r;
}

// --- SlopeProfile ----------------------------------------------------------------------

SlopeProfile::SlopeProfile(double start, double middle, double end, double eps1)
    : start_(start), middle_(middle), end_(end), eps1_(eps1) {
  if (!(eps1 >= 0.0 && eps1 <= 0.5)) throw ConstraintError("SlopeProfile: eps1 must be in [0, 1/2]");
  knots_ = {0.0, 0.5 * eps1, eps1, 1.0 - eps1, 1.0 - 0.5 * eps1, 1.0};
  cumulative_[0] = 0.0;
  const double w = 0.5 * eps1;
  cumulative_[1] = start * w;
  cumulative_[2] = cumulative_[1] + 0.5 * (start + middle) * w;
  cumulative_[3] = cumulative_[2] + middle * (1.0 - 2.0 * eps1);
  cumulative_[4] = cumulative_[3] + 0.5 * (middle + end) * w;
  cumulative_[5] = cumulative_[4] + end * w;
}

double SlopeProfile::middle_for_total(double start, double end, double eps1, double total) {
  return (total - 0.75 * eps1 * (start + end)) / (1.0 - 1.5 * eps1);
}

std::array<double, 6> SlopeProfile::knots() const { return knots_; }

int SlopeProfile::segment(double s) const {
  if (eps1_ == 0.0) return 2;
  if (s < knots_[1]) return 0;
  if (s < knots_[2]) return 1;
  if (s < knots_[3]) return 2;
  if (s < knots_[4]) return 3;
  return 4;
}

double SlopeProfile::value(double s) const {
  const double w = 0.5 * eps1_;
  switch (segment(s)) {
    case 0: return start_;
    case 1: return start_ + (middle_ - start_) * smoothstep((s - knots_[1]) / w);
    case 2: return middle_;
    case 3: return middle_ + (end_ - middle_) * smoothstep((s - knots_[3]) / w);
    default: return end_;
  }
}

double SlopeProfile::derivative(double s) const {
  const double w = 0.5 * eps1_;
  switch (segment(s)) {
    case 1: return (middle_ - start_) * smoothstep_d1((s - knots_[1]) / w) / w;
    case 3: return (end_ - middle_) * smoothstep_d1((s - knots_[3]) / w) / w;
    default: return 0.0;
  }
}

double SlopeProfile::second_derivative(double s) const {
  const double w = 0.5 * eps1_;
  switch (segment(s)) {
    case 1: return (middle_ - start_) * smoothstep_d2((s - knots_[1]) / w) / (w * w);
    case 3: return (end_ - middle_) * smoothstep_d2((s - knots_[3]) / w) / (w * w);
    default: return 0.0;
  }
}

double SlopeProfile::integral(double s) const {
  if (eps1_ == 0.0) return middle_ * s;
  const double w = 0.5 * eps1_;
  const int k = segment(s);
  const double ds = s - knots_[k];
  switch (k) {
    case 0: return start_ * ds;
    case 1: return cumulative_[1] + start_ * ds + (middle_ - start_) * w * smoothstep_int(ds / w);
    case 2: return cumulative_[2] + middle_ * ds;
    case 3: return cumulative_[3] + middle_ * ds + (end_ - middle_) * w * smoothstep_int(ds / w);
    default: return cumulative_[4] + end_ * ds;
  }
}

// --- BridgeProfile ---------------------------------------------------------------------

BridgeProfile::BridgeProfile(const BridgeSpec& spec, double lambda, SlopeProfile slope)
    : spec_(spec), lambda_(lambda), slope_(slope), total_(slope.integral(1.0)) {}

LogJet BridgeProfile::eval(double t) const {
  const double a = spec_.left_rate();
  const double b = spec_.right_rate();
  if (t <= spec_.t1) return {a * t, a, 0.0};
  if (t >= spec_.t2) return {b * t, b, 0.0};
  const double s = lambda_ * (t - spec_.t1);
  LogJet j;
  if (s <= 0.5)
    j.u = a * spec_.t1 + slope_.integral(s) / lambda_;
  else
    j.u = b * spec_.t2 - (total_ - slope_.integral(s)) / lambda_;
  j.du = slope_.value(s);
  j.d2u = lambda_ * slope_.derivative(s);
  return j;
}

std::vector<double> BridgeProfile::knots() const {
  std::vector<double> out;
  for (double s : slope_.knots()) out.push_back(spec_.t1 + s / lambda_);
  out.front() = spec_.t1;
  out.back() = spec_.t2;
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

BridgeProfile build_bridge(const BridgeSpec& spec, const BridgeOptions& options) {
  spec.validate();
  const auto feas = check_epigraph_feasibility(spec);
  if (!feas.feasible()) {
    std::ostringstream msg;
    msg << "build_bridge: infeasible gap [" << spec.t1 << ", " << spec.t2
        << "] (margin_a=" << feas.margin_a << ", margin_b=" << feas.margin_b << ")";
    throw ConstraintError(msg.str());
  }
  const double a = spec.left_rate();
  const double b = spec.right_rate();
  const double lambda = 1.0 / (spec.t2 - spec.t1);

  if (spec.alpha == spec.beta) return BridgeProfile(spec, lambda, SlopeProfile(a, a, a, 0.0));

  if (!options.aggressive) {
    const auto req = required_separation(spec.alpha, spec.beta, spec.eta);
    if (!(spec.t2 > req.A_required * spec.t1 && spec.t0 > req.B_required)) {
      std::ostringstream msg;
      msg << "build_bridge: separation t2 > " << req.A_required << " t1 and t0 > "
          << req.B_required << " not met (enable aggressive mode to rely on verification)";
      throw ConstraintError(msg.str());
    }
  }

  // The mean slope over the gap must be (b t2 - a t1)/(t2 - t1); it exceeds the right
  // slope by `slack` in units of (beta - alpha), which the middle slope has to absorb.
  const double gap_rate = spec.beta - spec.alpha;
  const double slack = gap_rate * lambda * spec.t1;
  const double budget = slope_budget(spec.alpha, spec.beta, spec.eta, spec.direction);
  if (!(slack < budget)) {
    std::ostringstream msg;
    msg << "build_bridge: gap [" << spec.t1 << ", " << spec.t2
        << "] too narrow for the slope box (needs t2/t1 > "
        << 1.0 + gap_rate / budget << ")";
    throw ConstraintError(msg.str());
  }
  const double excess = 0.5 * (slack + budget);
  const double eps1 = std::min(0.5, corner_width(gap_rate, excess, slack));
  const double total = lambda * (b * spec.t2 - a * spec.t1);
  const double middle = SlopeProfile::middle_for_total(a, b, eps1, total);
  return BridgeProfile(spec, lambda, SlopeProfile(a, middle, b, eps1));
}

// --- verification ----------------------------------------------------------------------

PinchReport verify_pinching(const BridgeProfile& profile, std::size_t n_samples) {
  const auto& spec = profile.spec();
  PinchReport r;
  r.lower_bound = spec.alpha * spec.alpha - spec.eta;
  r.upper_bound = spec.beta * spec.beta + spec.eta;
  r.fd_step = 1e-4 * (0.5 * profile.eps1()) / profile.lambda();
  r.min_ratio = std::numeric_limits<double>::infinity();
  r.max_ratio = -std::numeric_limits<double>::infinity();

  std::vector<double> edges{spec.t0};
  for (double k : profile.knots()) edges.push_back(k);
  edges.push_back(spec.t3);
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  const std::size_t segments = edges.size() - 1;
  const std::size_t per = std::max<std::size_t>(2, n_samples / segments);

  const double h = r.fd_step;
  for (std::size_t seg = 0; seg < segments; ++seg) {
    const double lo = edges[seg];
    const double hi = edges[seg + 1];
    for (std::size_t i = 0; i < per; ++i) {
      const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(per - 1);
      const LogJet j = profile.eval(t);
      const double ratio = j.pinch();
      r.min_ratio = std::min(r.min_ratio, ratio);
      r.max_ratio = std::max(r.max_ratio, ratio);

      const double up = profile.eval(t + h).u;
      const double um = profile.eval(t - h).u;
      const double d1 = (up - um) / (2.0 * h);
      const double d2 = ((up - j.u) - (j.u - um)) / (h * h);
      const double err = std::abs((d1 * d1 - d2) - ratio);
      r.max_fd_abs_error = std::max(r.max_fd_abs_error, err);
      r.max_fd_rel_error = std::max(r.max_fd_rel_error, err / std::abs(ratio));
      ++r.n_samples;
    }
  }
  r.within_bounds = r.min_ratio >= r.lower_bound && r.max_ratio <= r.upper_bound;
  return r;
}

}  // namespace cuspgrowth
