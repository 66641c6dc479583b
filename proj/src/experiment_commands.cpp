#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "cuspgrowth/errors.hpp"
#include "cuspgrowth/experiment.hpp"
#include "cuspgrowth/growth.hpp"

namespace cuspgrowth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json header(const char* verb, const ExperimentConfig& c) {
  return {{"command", verb}, {"config_hash", config_hash(c)}, {"config", c.to_json()}};
}

void write_text(const fs::path& out, const std::string& name, const std::string& text) {
  fs::create_directories(out);
  std::ofstream f(out / name, std::ios::binary);
  if (!f) throw ConstraintError("cannot write " + (out / name).string());
  f << text;
}

void write_json(const fs::path& out, const std::string& name, const json& doc) {
  write_text(out, name, doc.dump(2) + "\n");
}

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> g;
  for (long i = 0;; ++i) {
    const double R = lo + static_cast<double>(i) * step;
    if (R > hi + 1e-9 * step) break;
    g.push_back(R);
  }
  return g;
}

bool is_built(const ExperimentConfig& c) { return c.model == "built" && c.beta > c.alpha; }

json pinch_json(const PinchReport& r) {
  return {{"n_samples", r.n_samples},   {"min_ratio", r.min_ratio},
          {"max_ratio", r.max_ratio},   {"lower_bound", r.lower_bound},
          {"upper_bound", r.upper_bound}, {"within_bounds", r.within_bounds},
          {"fd_step", r.fd_step},       {"max_fd_abs_error", r.max_fd_abs_error},
          {"max_fd_rel_error", r.max_fd_rel_error}};
}

// Runs a stage, prefixing failures with its name while keeping the error category.
template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("stage ") + name + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConstraintError(std::string("stage ") + name + ": " + e.what());
  }
}

struct ExponentSummary {
  json report;
  double delta_P = 0.0;
  double delta_P_minus = 0.0;
  double omega_F_plus = 0.0;
  double eps_hat = 0.0;
};

ExponentSummary exponents(const ExperimentConfig& c, const CuspModel& model, const fs::path& out) {
  ExponentSummary s;
  std::vector<double> grid;
  std::optional<IntervalSchedule> sch;
  if (is_built(c)) {
    sch = resolve_schedule(c);
    grid = aligned_grid(*sch, false);
  } else {
    grid = range(c.exponent_lo, c.exponent_hi, c.exponent_step);
  }
  const CountingTable vp = parabolic_counting(model, grid, c.threads);
  const CountingTable F = cuspidal_table(model, grid, c.threads);
  const GrowthEstimate gp = growth_exponents(vp, grid.front(), grid.back());
  const GrowthEstimate gf = growth_exponents(F, grid.front(), grid.back());
  s.delta_P = gp.omega_plus;
  s.delta_P_minus = gp.omega_minus;
  s.omega_F_plus = gf.omega_plus;

  json per_R = json::array();
  double u_max = -1e300, u_min = 1e300;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double uh = model.u(0.5 * grid[i]) / grid[i];
    u_max = std::max(u_max, uh);
    u_min = std::min(u_min, uh);
    per_R.push_back({{"R", grid[i]}, {"ln_vP_over_R", vp.log_values[i] / grid[i]},
                     {"ln_F_over_R", F.log_values[i] / grid[i]}, {"u_half_over_R", uh}});
  }
  if (sch) {
    const GapMeasurement gap = measure_cuspidal_gap(model, *sch, c.cuspidal_rel_tol);
    s.eps_hat = gap.eps_hat;
    s.report["cuspidal_gap"] = {{"eps_hat", gap.eps_hat}, {"n", gap.n}, {"per_n", gap.per_n}};
  } else {
    s.eps_hat = s.omega_F_plus - s.delta_P;
  }
  const PinchPredicates pp = pinch_predicates(s.delta_P, s.delta_P_minus, 0.02);
  s.report["delta_P"] = gp.omega_plus;
  s.report["delta_P_minus"] = gp.omega_minus;
  s.report["omega_F"] = {{"plus", gf.omega_plus}, {"minus", gf.omega_minus}};
  s.report["omega_F_minus_delta_P"] = gf.omega_plus - gp.omega_plus;
  s.report["eps_hat"] = s.eps_hat;
  s.report["u_half_over_R"] = {{"max", u_max}, {"min", u_min}};
  s.report["pinch_predicates"] = {{"ratio", pp.ratio}, {"half_pinched", pp.half_pinched},
                                  {"case_i", pp.case_i}, {"volume_exponent_lower", pp.volume_lower},
                                  {"volume_exponent_upper", pp.volume_upper}, {"eps", 0.02}};
  s.report["grid"] = is_built(c) ? "aligned: R = 2t at plateau ends and midpoints" : "exponent_R";
  s.report["per_R"] = per_R;
  s.report["caveat"] = "finite-window estimates: max/min of ln f(R)/R over the grid, not limits";
  write_text(out, "exponents.csv", growth_table_csv(model, grid, c.threads));
  return s;
}

json certificate_stage(const ExperimentConfig& c, const CuspModel& model, double s,
                       const fs::path& out) {
  const PoincareSeries P = partial_poincare(s, c.cert_L, c.alpha, c.threads);
  CertificateOptions o;
  o.d_const = c.d_const;
  o.A_floor = P.value;
  o.A_bound = c.A_bound_factor * P.value;
  o.head_terms = c.head_terms;
  o.perturbation_depth = c.n_max;
  o.threads = c.threads;
  const ParabolicTail tail(model, s, c.head_terms, c.threads);
  const CertificateReport r = search_certificate(tail, c.cert_N_max, o);
  json doc = to_json(r);
  doc["N_max"] = c.cert_N_max;
  doc["A_bound_factor"] = c.A_bound_factor;
  doc["partial_poincare_L"] = c.cert_L;
  doc["partial_poincare_value"] = P.value;
  doc["rho_at_N_max"] = certificate(tail, c.cert_N_max, o).rho;
  std::ostringstream csv;
  csv.precision(17);
  csv << "N,T,rho\n";
  for (long N = 1; N <= c.cert_N_max; ++N) {
    const auto rn = certificate(tail, N, o);
    csv << N << ',' << rn.T << ',' << rn.rho << '\n';
  }
  write_text(out, "certificate.csv", csv.str());
  return doc;
}

}  // namespace

GapMeasurement measure_cuspidal_gap(const CuspModel& model, const IntervalSchedule& sch,
                                    double rel_tol) {
  GapMeasurement g;
  g.eps_hat = -std::numeric_limits<double>::infinity();
  for (int n = sch.params.n_min; n <= sch.params.n_max; ++n) {
    const double R = sch.delta_pow(n);
    const double e = cuspidal_F(model, R, rel_tol) / R - 0.5 * model.beta();
    g.per_n.push_back(e);
    if (e > g.eps_hat) {
      g.eps_hat = e;
      g.n = n;
    }
  }
  return g;
}

CommandResult cmd_build_metric(const ExperimentConfig& c, const fs::path& out) {
  CommandResult res{header("build-metric", c)};
  const CuspModel model = build_model(c);
  const auto& profile = model.profile();
  const PinchReport pinch = verify_profile_pinching(profile, c.pinch_samples);
  const double hi = profile.is_constant() ? 10.0 : 1.01 * profile.pieces().back().lo;
  write_json(out, "profile.json", profile_to_json(profile));
  write_text(out, "curvature.csv", sample_profile_csv(profile, 0.0, hi, c.curvature_samples));
  json pj = pinch_json(pinch);
  pj["junction_residual"] = profile.junction_residual();
  pj["verified"] = pinch.within_bounds && pinch.max_fd_rel_error <= 1e-4 &&
                   profile.junction_residual() <= 1e-10;
  write_json(out, "pinch.json", pj);
  res.report["pinch"] = pj;
  res.report["pieces"] = profile.pieces().size();
  res.exit_code = pj["verified"].get<bool>() ? 0 : 1;
  return res;
}

CommandResult cmd_feasibility(const ExperimentConfig& c, const fs::path& out) {
  CommandResult res{header("feasibility", c)};
  const CuspModel model = build_model(c);
  const auto req = required_separation(c.alpha, c.beta, c.eta);
  json bridges = json::array();
  bool all = true;
  for (const auto& piece : model.profile().pieces()) {
    if (!piece.bridge) continue;
    const auto& sp = piece.bridge->spec();
    const auto f = check_epigraph_feasibility(sp);
    all = all && f.feasible();
    bridges.push_back({{"n", piece.n},
                       {"direction", sp.direction == BridgeDirection::AlphaToBeta ? "alpha_to_beta" : "beta_to_alpha"},
                       {"t1", sp.t1}, {"t2", sp.t2}, {"ratio", sp.t2 / sp.t1},
                       {"sharp_separation", sharp_separation(c.alpha, c.beta, c.eta, sp.direction)},
                       {"ineq_a", f.ineq_a_holds}, {"ineq_b", f.ineq_b_holds},
                       {"margin_a", f.margin_a}, {"margin_b", f.margin_b},
                       {"sufficient_condition", f.sufficient_condition_holds},
                       {"eps1", piece.bridge->eps1()}});
  }
  res.report["bridges"] = bridges;
  res.report["worst_case_separation"] = {{"A", req.A_required}, {"B", req.B_required}, {"C", req.C},
                                         {"M1", req.M1}, {"M2", req.M2}};
  res.report["all_feasible"] = all;
  write_json(out, "feasibility.json", res.report);
  res.exit_code = all ? 0 : 1;
  return res;
}

CommandResult cmd_distance(const ExperimentConfig& c, const fs::path& out) {
  CommandResult res{header("distance", c)};
  const CuspModel model = build_model(c);
  write_text(out, "distances.csv", distance_table_csv(model, c.distance_dx));
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> ux(-50.0, 50.0), ut(0.0, 5.0);
  double c_emp = 0.0, boundary_gap = 0.0;
  for (std::size_t i = 0; i < c.random_pairs; ++i) {
    const HoroPoint p{ux(rng), ut(rng)};
    const HoroPoint q{ux(rng), ut(rng)};
    c_emp = std::max(c_emp, std::abs(exact_distance(model, p, q) - quasigeodesic_distance(model, p, q)));
    const HoroPoint a{p.x, 0.0}, b{q.x, 0.0};
    if (a.x != b.x)
      boundary_gap = std::max(boundary_gap, std::abs(exact_distance(model, a, b) -
                                                     2.0 * meeting_height(model, a.x, b.x)));
  }
  res.report["random_pairs"] = c.random_pairs;
  res.report["quasigeodesic_constant"] = c_emp;
  res.report["boundary_meeting_height_gap"] = boundary_gap;
  json rows = json::array();
  for (double dx : c.distance_dx)
    rows.push_back({{"dx", dx}, {"exact", exact_distance(model, {0, 0}, {dx, 0})}});
  res.report["boundary_pairs"] = rows;
  write_json(out, "distance.json", res.report);
  return res;
}

CommandResult cmd_volume(const ExperimentConfig& c, const fs::path& out) {
  CommandResult res{header("volume", c)};
  const CuspModel model = build_model(c);
  json rows = json::array();
  double band = 1.0;
  std::ostringstream csv;
  csv.precision(17);
  csv << "R,volume,F,ratio\n";
  for (double R : c.volume_R) {
    const auto v = ball_horoball_volume(model, R, 0.0, c.volume_rel_tol);
    const double F = std::exp(cuspidal_F(model, R, c.cuspidal_rel_tol));
    const double ratio = v.volume / F;
    band = std::max({band, ratio, 1.0 / ratio});
    csv << R << ',' << v.volume << ',' << F << ',' << ratio << '\n';
    rows.push_back({{"R", R}, {"volume", v.volume}, {"error", v.error}, {"F", F}, {"ratio", ratio}});
  }
  write_text(out, "volumes.csv", csv.str());
  res.report["rows"] = rows;
  res.report["band_constant"] = band;
  write_json(out, "volume.json", res.report);
  return res;
}

CommandResult cmd_count(const ExperimentConfig& c, const fs::path& out) {
  CommandResult res{header("count", c)};
  const CuspModel model = build_model(c);
  const auto grid = range(c.count_lo, c.count_hi, c.count_step);
  const CountingTable vp = parabolic_counting(model, grid, c.threads);
  write_text(out, "counting.csv", growth_table_csv(model, grid, c.threads));
  double lo = 1e300, hi = -1e300;
  json rows = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double band = vp.log_values[i] - model.u(0.5 * grid[i]);
    lo = std::min(lo, band);
    hi = std::max(hi, band);
    rows.push_back({{"R", grid[i]}, {"ln_vP", vp.log_values[i]}, {"ln_vP_times_area", band}});
  }
  res.report["rows"] = rows;
  res.report["vP_times_area_band"] = {std::exp(lo), std::exp(hi)};
  write_json(out, "count.json", res.report);
  return res;
}

CommandResult cmd_cuspidal(const ExperimentConfig& c, const fs::path& out) {
  CommandResult res{header("cuspidal", c)};
  const CuspModel model = build_model(c);
  std::vector<double> grid;
  if (is_built(c)) {
    const auto sch = resolve_schedule(c);
    grid = aligned_grid(sch, false);
    for (int n = c.n_min; n <= c.n_max; ++n) grid.push_back(sch.delta_pow(n));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const auto gap = measure_cuspidal_gap(model, sch, c.cuspidal_rel_tol);
    res.report["eps_hat"] = gap.eps_hat;
    res.report["eps_hat_n"] = gap.n;
  } else {
    grid = range(c.count_lo, c.count_hi, c.count_step);
  }
  const CountingTable F = cuspidal_table(model, grid, c.threads);
  std::ostringstream csv;
  csv.precision(17);
  csv << "R,ln_F,ln_F_over_R\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    csv << grid[i] << ',' << F.log_values[i] << ',' << F.log_values[i] / grid[i] << '\n';
  write_text(out, "cuspidal.csv", csv.str());
  res.report["table"] = to_json(F);
  write_json(out, "cuspidal.json", res.report);
  return res;
}

CommandResult cmd_exponents(const ExperimentConfig& c, const fs::path& out) {
  CommandResult res{header("exponents", c)};
  const CuspModel model = build_model(c);
  const ExponentSummary s = exponents(c, model, out);
  res.report.update(s.report);
  write_json(out, "exponents.json", res.report);
  return res;
}

CommandResult cmd_poincare(const ExperimentConfig& c, const fs::path& out) {
  CommandResult res{header("poincare", c)};
  const PoincareSeries P = partial_poincare(c.lattice_s, c.lattice_L_max, c.alpha, c.threads);
  write_text(out, "annulus.csv", annulus_csv(P));
  const DeltaEstimate d = estimate_delta(c.lattice_L_max, c.alpha, c.lattice_window_lo,
                                         c.lattice_window_hi, c.threads);
  write_text(out, "orbit_counting.csv", counting_table_csv(d.table));
  res.report["series"] = to_json(P);
  res.report["delta_estimate"] = to_json(d.growth);
  res.report["words_enumerated"] = d.words_enumerated;
  res.report["caveat"] = "words of bounded length only: the orbit count is truncated, so the "
                         "estimate underestimates the critical exponent";
  write_json(out, "poincare.json", res.report);
  return res;
}

CommandResult cmd_certificate(const ExperimentConfig& c, const fs::path& out) {
  CommandResult res{header("certificate", c)};
  const CuspModel model = build_model(c);
  double s;
  if (c.cert_s) {
    s = *c.cert_s;
  } else {
    if (!is_built(c)) throw ConstraintError("certificate: s = \"auto\" needs a built profile");
    const auto gap = measure_cuspidal_gap(model, resolve_schedule(c), c.cuspidal_rel_tol);
    s = 0.5 * c.beta + 0.5 * gap.eps_hat;
    res.report["eps_hat"] = gap.eps_hat;
  }
  res.report["certificate"] = certificate_stage(c, model, s, out);
  write_json(out, "certificate.json", res.report);
  return res;
}

CommandResult cmd_counterexample(const ExperimentConfig& c, const fs::path& out) {
  CommandResult res{header("counterexample", c)};
  if (!(c.beta > 2.0 * c.alpha))
    throw ConstraintError("counterexample: hypothesis beta > 2 alpha violated");
  if (c.model != "built") throw ConstraintError("counterexample: model must be \"built\"");

  const CuspModel model = stage("build", [&] { return build_model(c); });
  const PinchReport pinch =
      stage("build", [&] { return verify_profile_pinching(model.profile(), c.pinch_samples); });
  if (!pinch.within_bounds) throw NumericalError("stage build: pinching not verified");
  write_json(out, "profile.json", profile_to_json(model.profile()));

  const ExponentSummary ex = stage("exponents", [&] { return exponents(c, model, out); });
  if (!(ex.eps_hat > 0.0))
    throw ConstraintError("stage exponents: measured cuspidal gap is not positive");
  const double s = c.cert_s.value_or(0.5 * c.beta + 0.5 * ex.eps_hat);
  const json cert = stage("certificate", [&] { return certificate_stage(c, model, s, out); });

  const bool certified = cert["verdict"].get<bool>();
  const OmegaPair omega_X = max_formula({s, s}, {{ex.omega_F_plus, ex.omega_F_plus}});
  const bool verdict = certified && ex.omega_F_plus > s;
  res.report["pinch"] = pinch_json(pinch);
  res.report["exponents"] = ex.report;
  res.report["certificate"] = cert;
  res.report["delta_Gamma_upper_bound"] = certified ? json(s) : json(nullptr);
  res.report["omega_X_lower_bound"] = ex.omega_F_plus;
  res.report["omega_X_max_formula"] = omega_X.plus;
  res.report["verdict"] = verdict;
  res.report["conclusion"] =
      verdict ? "omega(X) >= omega(F) > s >= delta(Gamma) under the listed assumptions"
              : "not concluded: no N <= N_max gives rho < 1 under the supplied constants";
  write_json(out, "counterexample.json", res.report);

  std::ostringstream txt;
  txt.precision(6);
  txt << "config hash        " << res.report["config_hash"].get<std::string>() << "\n"
      << "pinching           " << (pinch.within_bounds ? "verified" : "FAILED") << " ["
      << pinch.min_ratio << ", " << pinch.max_ratio << "]\n"
      << "delta(P)           " << ex.delta_P << "  (beta/2 = " << 0.5 * c.beta << ")\n"
      << "delta^-(P)         " << ex.delta_P_minus << "  (alpha/2 = " << 0.5 * c.alpha << ")\n"
      << "omega(F)           " << ex.omega_F_plus << "\n"
      << "eps_hat            " << ex.eps_hat << "\n"
      << "s                  " << s << "\n"
      << "certificate N, rho " << cert["N"] << ", " << cert["rho"].get<double>() << "\n"
      << "verdict            " << (verdict ? "delta(Gamma) < omega(X)" : "not concluded") << "\n"
      << "assumptions:\n";
  for (const auto& a : cert["assumptions"]) txt << "  - " << a.get<std::string>() << "\n";
  write_text(out, "summary.txt", txt.str());
  return res;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{
      "build-metric", "feasibility", "distance", "volume",      "count",
      "cuspidal",     "exponents",   "poincare", "certificate", "counterexample"};
  return names;
}

CommandResult run_command(const std::string& verb, const ExperimentConfig& c, const fs::path& out) {
  if (verb == "build-metric") return cmd_build_metric(c, out);
  if (verb == "feasibility") return cmd_feasibility(c, out);
  if (verb == "distance") return cmd_distance(c, out);
  if (verb == "volume") return cmd_volume(c, out);
  if (verb == "count") return cmd_count(c, out);
  if (verb == "cuspidal") return cmd_cuspidal(c, out);
  if (verb == "exponents") return cmd_exponents(c, out);
  if (verb == "poincare") return cmd_poincare(c, out);
  if (verb == "certificate") return cmd_certificate(c, out);
  if (verb == "counterexample") return cmd_counterexample(c, out);
  throw ConstraintError("unknown command '" + verb + "'");
}

}  // namespace cuspgrowth
