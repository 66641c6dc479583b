#include "cuspgrowth/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "cuspgrowth/errors.hpp"

namespace cuspgrowth {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!known.count(key)) throw ConstraintError("config: unknown key '" + where + key + "'");
}

template <class T>
void read(const json& obj, const char* key, T& into) {
  if (obj.contains(key)) into = obj.at(key).get<T>();
}

// Number or the given keyword (stored as nullopt).
void read_auto(const json& obj, const char* key, const char* keyword, std::optional<double>& into) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (v.is_string()) {
    if (v.get<std::string>() != keyword)
      throw ConstraintError(std::string("config: '") + key + "' must be a number or \"" + keyword + "\"");
    into.reset();
  } else {
    into = v.get<double>();
  }
}

json auto_value(const std::optional<double>& v, const char* keyword) {
  return v ? json(*v) : json(keyword);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  ExperimentConfig c;
  try {
    reject_unknown(doc, {"alpha", "beta", "eta", "model", "schedule", "grids", "tolerances",
                         "certificate", "lattice", "seed", "threads"}, "");
    read(doc, "alpha", c.alpha);
    read(doc, "beta", c.beta);
    read(doc, "eta", c.eta);
    read(doc, "model", c.model);
    read(doc, "seed", c.seed);
    read(doc, "threads", c.threads);
    if (doc.contains("schedule")) {
      const auto& s = doc.at("schedule");
      reject_unknown(s, {"Delta", "lambda0", "mu0", "A_sep", "margin", "n_min", "n_max"}, "schedule.");
      read_auto(s, "Delta", "auto", c.Delta);
      read_auto(s, "lambda0", "auto", c.lambda0);
      read_auto(s, "mu0", "auto", c.mu0);
      read_auto(s, "A_sep", "aggressive", c.A_sep);
      read(s, "margin", c.separation_margin);
      read(s, "n_min", c.n_min);
      read(s, "n_max", c.n_max);
    }
    if (doc.contains("grids")) {
      const auto& g = doc.at("grids");
      reject_unknown(g, {"distance_dx", "volume_R", "count_R", "exponent_R", "pinch_samples",
                         "curvature_samples", "random_pairs"}, "grids.");
      read(g, "distance_dx", c.distance_dx);
      read(g, "volume_R", c.volume_R);
      if (g.contains("count_R")) {
        const auto& r = g.at("count_R");
        reject_unknown(r, {"lo", "hi", "step"}, "grids.count_R.");
        read(r, "lo", c.count_lo);
        read(r, "hi", c.count_hi);
        read(r, "step", c.count_step);
      }
      if (g.contains("exponent_R")) {
        const auto& r = g.at("exponent_R");
        reject_unknown(r, {"lo", "hi", "step"}, "grids.exponent_R.");
        read(r, "lo", c.exponent_lo);
        read(r, "hi", c.exponent_hi);
        read(r, "step", c.exponent_step);
      }
      read(g, "pinch_samples", c.pinch_samples);
      read(g, "curvature_samples", c.curvature_samples);
      read(g, "random_pairs", c.random_pairs);
    }
    if (doc.contains("tolerances")) {
      const auto& t = doc.at("tolerances");
      reject_unknown(t, {"geodesic_rel", "volume_rel", "cuspidal_rel"}, "tolerances.");
      read(t, "geodesic_rel", c.geodesic_rel_tol);
      read(t, "volume_rel", c.volume_rel_tol);
      read(t, "cuspidal_rel", c.cuspidal_rel_tol);
    }
    if (doc.contains("certificate")) {
      const auto& t = doc.at("certificate");
      reject_unknown(t, {"s", "N_max", "d_const", "A_bound_factor", "L", "head_terms"}, "certificate.");
      read_auto(t, "s", "auto", c.cert_s);
      read(t, "N_max", c.cert_N_max);
      read(t, "d_const", c.d_const);
      read(t, "A_bound_factor", c.A_bound_factor);
      read(t, "L", c.cert_L);
      read(t, "head_terms", c.head_terms);
    }
    if (doc.contains("lattice")) {
      const auto& t = doc.at("lattice");
      reject_unknown(t, {"L_max", "window", "s"}, "lattice.");
      read(t, "L_max", c.lattice_L_max);
      read(t, "s", c.lattice_s);
      if (t.contains("window")) {
        const auto w = t.at("window").get<std::vector<double>>();
        if (w.size() != 2) throw ConstraintError("config: lattice.window must be [lo, hi]");
        c.lattice_window_lo = w[0];
        c.lattice_window_hi = w[1];
      }
    }
  } catch (const json::exception& e) {
    throw ConstraintError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  return {
      {"alpha", alpha}, {"beta", beta}, {"eta", eta}, {"model", model},
      {"schedule", {{"Delta", auto_value(Delta, "auto")}, {"lambda0", auto_value(lambda0, "auto")},
                    {"mu0", auto_value(mu0, "auto")}, {"A_sep", auto_value(A_sep, "aggressive")},
                    {"margin", separation_margin}, {"n_min", n_min}, {"n_max", n_max}}},
      {"grids", {{"distance_dx", distance_dx}, {"volume_R", volume_R},
                 {"count_R", {{"lo", count_lo}, {"hi", count_hi}, {"step", count_step}}},
                 {"exponent_R", {{"lo", exponent_lo}, {"hi", exponent_hi}, {"step", exponent_step}}},
                 {"pinch_samples", pinch_samples}, {"curvature_samples", curvature_samples},
                 {"random_pairs", random_pairs}}},
      {"tolerances", {{"geodesic_rel", geodesic_rel_tol}, {"volume_rel", volume_rel_tol},
                      {"cuspidal_rel", cuspidal_rel_tol}}},
      {"certificate", {{"s", auto_value(cert_s, "auto")}, {"N_max", cert_N_max}, {"d_const", d_const},
                       {"A_bound_factor", A_bound_factor}, {"L", cert_L}, {"head_terms", head_terms}}},
      {"lattice", {{"L_max", lattice_L_max}, {"s", lattice_s},
                   {"window", {lattice_window_lo, lattice_window_hi}}}},
      {"seed", seed}, {"threads", threads},
  };
}

void ExperimentConfig::validate() const {
  if (!(alpha > 0.0)) throw ConstraintError("config: alpha must be positive");
  if (!(beta >= alpha)) throw ConstraintError("config: need beta >= alpha");
  if (!(eta > 0.0 && eta < alpha * alpha)) throw ConstraintError("config: need 0 < eta < alpha^2");
  if (model != "built" && model != "constant")
    throw ConstraintError("config: model must be \"built\" or \"constant\"");
  if (!(geodesic_rel_tol > 0.0 && volume_rel_tol > 0.0 && cuspidal_rel_tol > 0.0))
    throw ConstraintError("config: tolerances must be positive");
  if (!(count_step > 0.0 && count_hi >= count_lo && count_lo >= 0.0))
    throw ConstraintError("config: count_R needs 0 <= lo <= hi and step > 0");
  if (!(exponent_step > 0.0 && exponent_hi >= exponent_lo && exponent_lo > 0.0))
    throw ConstraintError("config: exponent_R needs 0 < lo <= hi and step > 0");
  if (!(lattice_s > 0.0)) throw ConstraintError("config: lattice.s must be positive");
  if (!(separation_margin >= 0.0)) throw ConstraintError("config: schedule.margin must be >= 0");
  if (!(d_const > 0.0)) throw ConstraintError("config: certificate.d_const must be positive");
  if (!(A_bound_factor >= 1.0)) throw ConstraintError("config: certificate.A_bound_factor must be >= 1");
  if (cert_N_max < 1 || head_terms < cert_N_max)
    throw ConstraintError("config: need 1 <= certificate.N_max <= certificate.head_terms");
  if (lattice_L_max < 6) throw ConstraintError("config: lattice.L_max must be >= 6");
  if (cert_L < 0) throw ConstraintError("config: certificate.L must be >= 0");
  if (threads < 1) throw ConstraintError("config: threads must be >= 1");
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = config.to_json().dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

IntervalSchedule resolve_schedule(const ExperimentConfig& c) {
  if (c.model != "built") throw ConstraintError("schedule: model is not \"built\"");
  if (!(c.beta > c.alpha)) throw ConstraintError("schedule: need beta > alpha for a built profile");
  const double A = c.A_sep.value_or(
      (1.0 + c.separation_margin) *
      std::max(sharp_separation(c.alpha, c.beta, c.eta, BridgeDirection::AlphaToBeta),
               sharp_separation(c.alpha, c.beta, c.eta, BridgeDirection::BetaToAlpha)));
  const double mu0 = c.mu0.value_or(0.95 / (2.0 * A));
  const double lambda0 = c.lambda0.value_or(0.5 * mu0);
  const double Delta = c.Delta ? *c.Delta
                               : (1.0 + c.separation_margin) *
                                     smallest_valid_delta(lambda0, mu0, A, c.n_min, c.n_max);
  return make_schedule(Delta, lambda0, mu0, A, c.n_min, c.n_max);
}

CuspModel build_model(const ExperimentConfig& c) {
  if (c.model == "constant" || c.beta == c.alpha) return CuspModel::constant(c.alpha);
  return CuspModel(build_area(resolve_schedule(c), c.alpha, c.beta, c.eta));
}

std::vector<double> aligned_grid(const IntervalSchedule& sch, bool alpha_only) {
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(sch.count());
  for (std::size_t i = 0; i <= n; ++i) {
    out.push_back(sch.p[i] + sch.q[i]);
    out.push_back(2.0 * sch.q[i]);
    if (alpha_only || i == n) continue;
    out.push_back(2.0 * sch.r[i]);
    out.push_back(sch.r[i] + sch.s[i]);
    out.push_back(2.0 * sch.s[i]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace cuspgrowth
