#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cuspgrowth/convex_bridge.hpp"
#include "cuspgrowth/errors.hpp"

namespace cuspgrowth {

struct ScheduleParams {
  double Delta = 0.0;
  double lambda0 = 0.0;
  double mu0 = 0.0;
  double A_sep = 0.0;
  int n_min = 1;
  int n_max = 1;
};

struct ScheduleViolation {
  std::string constraint;
  int n = 0;  // 0 for parameter-level constraints
};

class ScheduleError : public ConstraintError {
 public:
  explicit ScheduleError(std::vector<ScheduleViolation> violations);
  const std::vector<ScheduleViolation>& violations() const { return violations_; }

 private:
  std::vector<ScheduleViolation> violations_;
};

// Geometric interval families [p_n, q_n] (alpha plateaus) and [r_n, s_n] (beta plateaus)
// inside [Delta^{n-1}, Delta^n]. Index i of each array corresponds to n = n_min + i; the
// arrays carry one extra entry for n_max + 1 so the closing bridge has a target.
struct IntervalSchedule {
  ScheduleParams params;
  std::vector<double> p, q, r, s;

  int count() const { return params.n_max - params.n_min + 1; }
  std::size_t index(int n) const { return static_cast<std::size_t>(n - params.n_min); }
  double delta_pow(int n) const;
};

// p_n = (1-l) D^{n-1} + l D^n, q_n likewise with mu0, r_n = (p_n + D^n)/2, s_n = (q_n + D^n)/2.
// Throws ScheduleError listing every violated constraint and its index n.
IntervalSchedule make_schedule(double Delta, double lambda0, double mu0, double A_sep,
                               int n_min, int n_max);
IntervalSchedule make_schedule(const ScheduleParams& params);

// Smallest Delta (to a relative 1e-9) for which make_schedule accepts the remaining
// parameters.
double smallest_valid_delta(double lambda0, double mu0, double A_sep, int n_min, int n_max);

enum class PieceKind { PureAlpha, PureBeta, Bridge };

struct Piece {
  double lo = 0.0;
  double hi = 0.0;  // +inf for the closing plateau
  PieceKind kind = PieceKind::PureAlpha;
  int n = 0;
  std::optional<BridgeProfile> bridge;
};

// u(t) = -ln A(t) for the horospherical length A of a warped cusp A(t)^2 dx^2 + dt^2.
// The profile is defined on [t_start, inf); eval_extended() continues it below t_start by
// the pure alpha exponential, which is how the cusp model sees heights in [0, t_start).
class LogAreaProfile {
 public:
  // u(t) = alpha t everywhere.
  static LogAreaProfile constant(double alpha);

  LogAreaProfile(double alpha, double beta, double eta, std::vector<Piece> pieces,
                 std::optional<IntervalSchedule> schedule = std::nullopt);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double eta() const { return eta_; }
  // Curvature bounds -b^2 <= K <= -a^2 with a^2 = alpha^2 - eta, b^2 = beta^2 + eta.
  double a() const;
  double b() const;
  double t_start() const { return pieces_.front().lo; }
  bool is_constant() const { return pieces_.size() == 1; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const std::optional<IntervalSchedule>& schedule() const { return schedule_; }

  // Throws ConstraintError for t < t_start.
  LogJet eval(double t) const;
  LogJet eval_extended(double t) const;
  double u(double t) const { return eval_extended(t).u; }
  // u(t) - u(t - h) without cancellation when both ends share a pure piece.
  double drop(double t, double h) const;

  // Unique t >= t_start with u(t) = v. Throws ConstraintError for v < u(t_start).
  double inverse(double v) const;
  // Same on the extended domain t >= 0 (v >= 0).
  double inverse_extended(double v) const;

  // Every point where u''' may jump, within (lo, hi).
  std::vector<double> knots(double lo, double hi) const;

  // Largest |left - right| mismatch of (u, u', u'') over all piece boundaries.
  double junction_residual() const;

 private:
  const Piece& piece_at(double t) const;

  double alpha_;
  double beta_;
  double eta_;
  std::vector<Piece> pieces_;
  std::optional<IntervalSchedule> schedule_;
};

LogAreaProfile build_area(const IntervalSchedule& schedule, double alpha, double beta,
                          double eta, const BridgeOptions& options = {});

// Pinching check over the whole profile: each bridge is sampled segment by segment with
// n_samples split evenly across bridges; plateaus are checked at their endpoints.
PinchReport verify_profile_pinching(const LogAreaProfile& profile, std::size_t n_samples);

nlohmann::json profile_to_json(const LogAreaProfile& profile);
// Rebuilds the profile from its schedule parameters and checks the stored coefficients.
LogAreaProfile profile_from_json(const nlohmann::json& doc);

// Rows t, u, u', u'', K(t) on n uniform points of [lo, hi].
std::string sample_profile_csv(const LogAreaProfile& profile, double lo, double hi,
                               std::size_t n);

}  // namespace cuspgrowth
