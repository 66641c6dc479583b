#include "cuspgrowth/area_profile.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cuspgrowth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string describe(const std::vector<ScheduleViolation>& v) {
  std::ostringstream os;
  os << "schedule rejected:";
  for (const auto& x : v) {
    os << " [" << x.constraint;
    if (x.n != 0) os << " at n=" << x.n;
    os << "]";
  }
  return os.str();
}

double rate_of(const Piece& piece, double alpha, double beta) {
  return piece.kind == PieceKind::PureBeta ? beta : alpha;
}

LogJet eval_piece(const Piece& piece, double t, double alpha, double beta) {
  if (piece.kind == PieceKind::Bridge) return piece.bridge->eval(t);
  const double rate = rate_of(piece, alpha, beta);
  return {rate * t, rate, 0.0};
}

const char* kind_name(PieceKind k) {
  switch (k) {
    case PieceKind::PureAlpha: return "alpha";
    case PieceKind::PureBeta: return "beta";
    default: return "bridge";
  }
}

}  // namespace

ScheduleError::ScheduleError(std::vector<ScheduleViolation> violations)
    : ConstraintError(describe(violations)), violations_(std::move(violations)) {}

double IntervalSchedule::delta_pow(int n) const { return std::pow(params.Delta, n); }

IntervalSchedule make_schedule(const ScheduleParams& params) {
  std::vector<ScheduleViolation> bad;
  const double D = params.Delta;
  const double l0 = params.lambda0;
  const double m0 = params.mu0;
  const double A = params.A_sep;
  if (!(D > 1.0)) bad.push_back({"Delta > 1", 0});
  if (!(l0 > 0.0 && l0 < 1.0)) bad.push_back({"0 < lambda0 < 1", 0});
  if (!(m0 > 0.0 && m0 < 1.0)) bad.push_back({"0 < mu0 < 1", 0});
  if (!(m0 > l0)) bad.push_back({"mu0 > lambda0", 0});
  if (!(A > 1.0)) bad.push_back({"A_sep > 1", 0});
  if (!(1.0 + l0 - 2.0 * A * m0 > 0.0)) bad.push_back({"1 + lambda0 - 2 A_sep mu0 > 0", 0});
  if (params.n_min < 1) bad.push_back({"n_min >= 1", 0});
  if (params.n_max < params.n_min) bad.push_back({"n_max >= n_min", 0});
  if (!bad.empty()) throw ScheduleError(bad);

  IntervalSchedule sch;
  sch.params = params;
  for (int n = params.n_min; n <= params.n_max + 1; ++n) {
    const double lo = std::pow(D, n - 1);
    const double hi = std::pow(D, n);
    const double p = (1.0 - l0) * lo + l0 * hi;
    const double q = (1.0 - m0) * lo + m0 * hi;
    sch.p.push_back(p);
    sch.q.push_back(q);
    sch.r.push_back((p + hi) / 2.0);
    sch.s.push_back((q + hi) / 2.0);
  }
  for (int n = params.n_min; n <= params.n_max; ++n) {
    const auto i = sch.index(n);
    const double lo = std::pow(D, n - 1);
    const double hi = std::pow(D, n);
    if (!(sch.r[i] > A * sch.q[i])) bad.push_back({"r_n > A_sep q_n", n});
    if (!(sch.p[i + 1] > A * sch.s[i])) bad.push_back({"p_{n+1} > A_sep s_n", n});
    if (!(sch.q[i] >= sch.p[i] + 1.0)) bad.push_back({"q_n >= p_n + 1", n});
    if (!(sch.p[i] >= lo + 1.0)) bad.push_back({"p_n >= Delta^{n-1} + 1", n});
    if (!(sch.s[i] <= hi - 1.0)) bad.push_back({"s_n <= Delta^n - 1", n});
  }
  if (!bad.empty()) throw ScheduleError(bad);
  return sch;
}

IntervalSchedule make_schedule(double Delta, double lambda0, double mu0, double A_sep,
                               int n_min, int n_max) {
  return make_schedule(ScheduleParams{Delta, lambda0, mu0, A_sep, n_min, n_max});
}

double smallest_valid_delta(double lambda0, double mu0, double A_sep, int n_min, int n_max) {
  auto ok = [&](double D) {
    try {
      make_schedule(D, lambda0, mu0, A_sep, n_min, n_max);
      return true;
    } catch (const ScheduleError&) {
      return false;
    }
  };
  // Parameter-level violations do not depend on Delta; surface them directly.
  make_schedule(1e300, lambda0, mu0, A_sep, n_min, std::max(n_min, std::min(n_max, 1)));
  double hi = 2.0;
  while (!ok(hi)) {
    hi *= 2.0;
    if (hi > 1e150) throw ConstraintError("smallest_valid_delta: no valid Delta found");
  }
  double lo = hi / 2.0;
  if (ok(lo)) lo = 1.0;
  while ((hi - lo) > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

// --- LogAreaProfile --------------------------------------------------------------------

LogAreaProfile LogAreaProfile::constant(double alpha) {
  if (!(alpha > 0.0)) throw ConstraintError("LogAreaProfile::constant: alpha must be positive");
  Piece piece{0.0, kInf, PieceKind::PureAlpha, 0, std::nullopt};
  return LogAreaProfile(alpha, alpha, 0.0, {piece});
}

LogAreaProfile::LogAreaProfile(double alpha, double beta, double eta, std::vector<Piece> pieces,
                               std::optional<IntervalSchedule> schedule)
    : alpha_(alpha), beta_(beta), eta_(eta), pieces_(std::move(pieces)),
      schedule_(std::move(schedule)) {
  if (pieces_.empty()) throw ConstraintError("LogAreaProfile: no pieces");
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i)
    if (pieces_[i].hi != pieces_[i + 1].lo)
      throw ConstraintError("LogAreaProfile: pieces must be contiguous");
}

double LogAreaProfile::a() const { return std::sqrt(alpha_ * alpha_ - eta_); }
double LogAreaProfile::b() const { return std::sqrt(beta_ * beta_ + eta_); }

const Piece& LogAreaProfile::piece_at(double t) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double x, const Piece& p) { return x < p.hi; });
  if (it == pieces_.end()) return pieces_.back();
  return *it;
}

LogJet LogAreaProfile::eval(double t) const {
  if (!(t >= t_start())) {
    std::ostringstream os;
    os << "LogAreaProfile::eval: t=" << t << " below domain start " << t_start();
    throw ConstraintError(os.str());
  }
  return eval_extended(t);
}

LogJet LogAreaProfile::eval_extended(double t) const {
  if (t < t_start()) return {alpha_ * t, alpha_, 0.0};
  return eval_piece(piece_at(t), t, alpha_, beta_);
}

double LogAreaProfile::drop(double t, double h) const {
  const double lo = t - h;
  const Piece& pt = piece_at(t);
  if (pt.kind != PieceKind::Bridge) {
    const bool same = lo >= pt.lo || (pt.kind == PieceKind::PureAlpha && &pt == &pieces_.front());
    if (same) return rate_of(pt, alpha_, beta_) * h;
  }
  if (t <= t_start()) return alpha_ * h;
  return u(t) - u(lo);
}

double LogAreaProfile::inverse(double v) const {
  const double u0 = eval(t_start()).u;
  if (!(v >= u0)) {
    std::ostringstream os;
    os << "inverse_area: v=" << v << " below range start u(t_start)=" << u0;
    throw ConstraintError(os.str());
  }
  return inverse_extended(v);
}

double LogAreaProfile::inverse_extended(double v) const {
  if (!(v >= 0.0)) throw ConstraintError("inverse_area: v must be >= 0");
  if (v <= alpha_ * t_start()) return v / alpha_;
  for (const auto& piece : pieces_) {
    const double uhi = std::isinf(piece.hi) ? kInf : eval_piece(piece, piece.hi, alpha_, beta_).u;
    if (v > uhi) continue;
    if (piece.kind != PieceKind::Bridge) return v / rate_of(piece, alpha_, beta_);
    double lo = piece.lo;
    double hi = piece.hi;
    for (int it = 0; it < 400 && hi - lo > 1e-10; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (piece.bridge->eval(mid).u < v ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  return v / alpha_;  // unreachable: the last piece is unbounded
}

std::vector<double> LogAreaProfile::knots(double lo, double hi) const {
  std::vector<double> out;
  for (const auto& piece : pieces_) {
    if (piece.lo > lo && piece.lo < hi) out.push_back(piece.lo);
    if (piece.bridge)
      for (double k : piece.bridge->knots())
        if (k > lo && k < hi) out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double LogAreaProfile::junction_residual() const {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
    const double x = pieces_[i].hi;
    const LogJet l = eval_piece(pieces_[i], x, alpha_, beta_);
    const LogJet r = eval_piece(pieces_[i + 1], x, alpha_, beta_);
    worst = std::max({worst, std::abs(l.u - r.u), std::abs(l.du - r.du), std::abs(l.d2u - r.d2u)});
  }
  return worst;
}

LogAreaProfile build_area(const IntervalSchedule& schedule, double alpha, double beta,
                          double eta, const BridgeOptions& options) {
  if (!(alpha > 0.0 && beta >= alpha)) throw ConstraintError("build_area: need 0 < alpha <= beta");
  if (!(eta > 0.0 && eta < alpha * alpha)) throw ConstraintError("build_area: need 0 < eta < alpha^2");

  std::vector<Piece> pieces;
  auto add_bridge = [&](int n, const char* which, BridgeSpec spec) {
    try {
      pieces.push_back({spec.t1, spec.t2, PieceKind::Bridge, n, build_bridge(spec, options)});
    } catch (const ConstraintError& e) {
      std::ostringstream os;
      os << "build_area: gap " << which << " at n=" << n << " [" << spec.t1 << ", " << spec.t2
         << "]: " << e.what();
      throw ConstraintError(os.str());
    }
  };

  const auto& P = schedule.params;
  for (int n = P.n_min; n <= P.n_max; ++n) {
    const auto i = schedule.index(n);
    const double p = schedule.p[i], q = schedule.q[i], r = schedule.r[i], s = schedule.s[i];
    pieces.push_back({p, q, PieceKind::PureAlpha, n, std::nullopt});
    add_bridge(n, "q_n->r_n", {p, q, r, s, alpha, beta, eta, BridgeDirection::AlphaToBeta});
    pieces.push_back({r, s, PieceKind::PureBeta, n, std::nullopt});
    add_bridge(n, "s_n->p_{n+1}",
               {r, s, schedule.p[i + 1], schedule.q[i + 1], alpha, beta, eta,
                BridgeDirection::BetaToAlpha});
  }
  pieces.push_back({schedule.p.back(), kInf, PieceKind::PureAlpha, P.n_max + 1, std::nullopt});
  return LogAreaProfile(alpha, beta, eta, std::move(pieces), schedule);
}

PinchReport verify_profile_pinching(const LogAreaProfile& profile, std::size_t n_samples) {
  PinchReport total;
  total.lower_bound = profile.alpha() * profile.alpha() - profile.eta();
  total.upper_bound = profile.beta() * profile.beta() + profile.eta();
  total.min_ratio = profile.alpha() * profile.alpha();
  total.max_ratio = total.min_ratio;
  std::size_t bridges = 0;
  for (const auto& piece : profile.pieces()) bridges += piece.bridge ? 1 : 0;
  for (const auto& piece : profile.pieces()) {
    if (piece.kind == PieceKind::PureBeta) {
      total.max_ratio = std::max(total.max_ratio, profile.beta() * profile.beta());
      total.min_ratio = std::min(total.min_ratio, profile.beta() * profile.beta());
      total.n_samples += 2;
    } else if (piece.kind == PieceKind::PureAlpha) {
      total.n_samples += 2;
    }
    if (!piece.bridge) continue;
    const auto r = verify_pinching(*piece.bridge, std::max<std::size_t>(7, n_samples / bridges));
    total.n_samples += r.n_samples;
    total.min_ratio = std::min(total.min_ratio, r.min_ratio);
    total.max_ratio = std::max(total.max_ratio, r.max_ratio);
    total.fd_step = std::max(total.fd_step, r.fd_step);
    total.max_fd_abs_error = std::max(total.max_fd_abs_error, r.max_fd_abs_error);
    total.max_fd_rel_error = std::max(total.max_fd_rel_error, r.max_fd_rel_error);
  }
  total.within_bounds =
      total.min_ratio >= total.lower_bound && total.max_ratio <= total.upper_bound;
  return total;
}

// --- serialisation ---------------------------------------------------------------------

nlohmann::json profile_to_json(const LogAreaProfile& profile) {
  using nlohmann::json;
  json doc;
  doc["alpha"] = profile.alpha();
  doc["beta"] = profile.beta();
  doc["eta"] = profile.eta();
  if (const auto& sch = profile.schedule()) {
    const auto& P = sch->params;
    doc["schedule"] = {{"Delta", P.Delta}, {"lambda0", P.lambda0}, {"mu0", P.mu0},
                       {"A_sep", P.A_sep}, {"n_min", P.n_min},     {"n_max", P.n_max}};
  } else {
    doc["schedule"] = nullptr;
  }
  json pieces = json::array();
  for (const auto& piece : profile.pieces()) {
    json jp{{"kind", kind_name(piece.kind)}, {"n", piece.n}, {"lo", piece.lo}};
    jp["hi"] = std::isinf(piece.hi) ? json(nullptr) : json(piece.hi);
    if (piece.bridge) {
      const auto& b = *piece.bridge;
      const auto& sp = b.spec();
      jp["bridge"] = {
          {"direction", sp.direction == BridgeDirection::AlphaToBeta ? "alpha_to_beta" : "beta_to_alpha"},
          {"t0", sp.t0}, {"t1", sp.t1}, {"t2", sp.t2}, {"t3", sp.t3},
          {"lambda", b.lambda()}, {"eps1", b.eps1()},
          {"slope_start", b.slope().start()}, {"slope_middle", b.slope().middle()},
          {"slope_end", b.slope().end()}};
    }
    pieces.push_back(std::move(jp));
  }
  doc["pieces"] = std::move(pieces);
  return doc;
}

LogAreaProfile profile_from_json(const nlohmann::json& doc) {
  try {
    const double alpha = doc.at("alpha").get<double>();
    const double beta = doc.at("beta").get<double>();
    const double eta = doc.at("eta").get<double>();
    if (doc.at("schedule").is_null()) return LogAreaProfile::constant(alpha);
    const auto& js = doc.at("schedule");
    ScheduleParams P{js.at("Delta").get<double>(), js.at("lambda0").get<double>(),
                     js.at("mu0").get<double>(),   js.at("A_sep").get<double>(),
                     js.at("n_min").get<int>(),     js.at("n_max").get<int>()};
    LogAreaProfile profile = build_area(make_schedule(P), alpha, beta, eta);
    if (profile_to_json(profile)["pieces"] != doc.at("pieces"))
      throw ConstraintError("profile_from_json: stored coefficients do not match the rebuild");
    return profile;
  } catch (const nlohmann::json::exception& e) {
    throw ConstraintError(std::string("profile_from_json: malformed document: ") + e.what());
  }
}

std::string sample_profile_csv(const LogAreaProfile& profile, double lo, double hi,
                               std::size_t n) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "t,u,du,d2u,K\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    const LogJet j = profile.eval_extended(t);
    os << t << ',' << j.u << ',' << j.du << ',' << j.d2u << ',' << -j.pinch() << '\n';
  }
  return os.str();
}

}  // namespace cuspgrowth
