#include "cuspgrowth/growth.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cuspgrowth/errors.hpp"
#include "cuspgrowth/numerics.hpp"

namespace cuspgrowth {

const char* kind_name(CountingKind kind) {
  switch (kind) {
    case CountingKind::ParabolicOrbit: return "parabolic_orbit";
    case CountingKind::LatticeOrbit: return "lattice_orbit";
    case CountingKind::Volume: return "volume";
    default: return "cuspidal";
  }
}

void CountingTable::validate() const {
  if (grid.size() != log_values.size())
    throw ConstraintError("CountingTable: grid and values differ in length");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ConstraintError("CountingTable: grid must be increasing");
    const bool counting = kind == CountingKind::ParabolicOrbit || kind == CountingKind::LatticeOrbit;
    if (counting && log_values[i] < log_values[i - 1])
      throw ConstraintError("CountingTable: counting function decreased");
  }
}

namespace {

void check_grid(const std::vector<double>& grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0)) throw ConstraintError("grid values must be >= 0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ConstraintError("grid must be increasing");
  }
}

// ln((e^z - 1)/z), the log of the mean of e^{zx} over [0,1].
double log_expm1_ratio(double z) {
  if (std::abs(z) < 1e-8) return 0.5 * z;
  if (z > 0.0) return z + std::log1p(-std::exp(-z)) - std::log(z);
  return std::log(-std::expm1(z)) - std::log(-z);
}

}  // namespace

CountingTable parabolic_counting(const CuspModel& model, const std::vector<double>& R_grid,
                                 unsigned threads) {
  check_grid(R_grid);
  CountingTable out;
  out.kind = CountingKind::ParabolicOrbit;
  out.grid = R_grid;
  out.log_values.assign(R_grid.size(), 0.0);
  parallel_for(R_grid.size(), threads, [&](std::size_t i) {
    const double R = R_grid[i];
    if (R <= 0.0) return;  // identity only
    const double lx = log_reach_at_height(model, 0.0, 0.0, R);
    if (lx < 52.0 * std::log(2.0)) {
      const double k = std::floor(std::exp(lx));
      out.log_values[i] = std::log1p(2.0 * k);
    } else {
      out.log_values[i] = std::log(2.0) + lx;
    }
  });
  return out;
}

double horospherical_area(const CuspModel& model, double t) {
  return std::exp(log_horospherical_area(model, t));
}

double log_horospherical_area(const CuspModel& model, double t) {
  if (!(t >= 0.0)) throw ConstraintError("horospherical_area: t must be >= 0");
  return -model.u(t);
}

double cuspidal_F(const CuspModel& model, double R, double rel_tol) {
  if (!(R > 0.0)) throw ConstraintError("cuspidal_F: R must be positive");
  auto g = [&](double t) { return model.u(0.5 * (t + R)) - model.u(t); };

  // Breakpoints where either u(t) or u((t+R)/2) changes definition. Between them g is
  // linear unless one argument sits on a curved stretch of a bridge.
  std::vector<double> cuts{0.0, R};
  for (double k : model.knots(0.0, R)) {
    cuts.push_back(k);
    if (k > 0.5 * R) cuts.push_back(2.0 * k - R);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  struct Cell {
    double lo, hi, glo, ghi;
    bool linear;
  };
  std::vector<Cell> cells;
  const double chunk = std::min(1.0, R);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    const double mid = 0.5 * (lo + hi);
    const bool linear = model.jet(mid).d2u == 0.0 && model.jet(0.5 * (mid + R)).d2u == 0.0;
    if (linear) {
      cells.push_back({lo, hi, g(lo), g(hi), true});
      continue;
    }
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / chunk));
    double a = lo;
    double ga = g(lo);
    for (std::size_t j = 1; j <= n; ++j) {
      const double b = j == n ? hi : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n);
      const double gb = g(b);
      cells.push_back({a, b, ga, gb, false});
      a = b;
      ga = gb;
    }
  }

  double M = kNegInf;
  for (const auto& c : cells) M = std::max({M, c.glo, c.ghi});
  // |g'| <= b on every cell, so a cell cannot rise more than b (hi - lo) above its ends.
  const double slope_cap = model.b();
  std::vector<double> logs;
  for (const auto& c : cells) {
    const double len = c.hi - c.lo;
    if (c.linear) {
      logs.push_back(c.glo + std::log(len) + log_expm1_ratio(c.ghi - c.glo));
      continue;
    }
    if (std::max(c.glo, c.ghi) + slope_cap * len < M - 60.0) continue;
    const auto r = integrate([&](double t) { return std::exp(g(t) - M); }, c.lo, c.hi,
                             rel_tol * 1e-3, 20);
    if (r.value > 0.0) logs.push_back(M + std::log(r.value));
  }
  const double out = log_sum_exp(logs);
  if (!std::isfinite(out)) throw NumericalError("cuspidal_F: non-finite result");
  return out;
}

CountingTable cuspidal_table(const CuspModel& model, const std::vector<double>& R_grid,
                             unsigned threads) {
  check_grid(R_grid);
  CountingTable out;
  out.kind = CountingKind::Cuspidal;
  out.grid = R_grid;
  out.log_values.assign(R_grid.size(), kNegInf);
  parallel_for(R_grid.size(), threads, [&](std::size_t i) {
    if (R_grid[i] > 0.0) out.log_values[i] = cuspidal_F(model, R_grid[i]);
  });
  return out;
}

GrowthEstimate growth_exponents(const CountingTable& table, double lo, double hi) {
  table.validate();
  if (table.grid.empty() || !(lo <= hi) || lo < table.grid.front() || hi > table.grid.back())
    throw ConstraintError("growth_exponents: window must lie within the grid");
  GrowthEstimate est;
  est.window_lo = lo;
  est.window_hi = hi;
  est.omega_plus = -std::numeric_limits<double>::infinity();
  est.omega_minus = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table.grid.size(); ++i) {
    const double R = table.grid[i];
    if (R < lo || R > hi || R <= 0.0) continue;
    const double ratio = table.log_values[i] / R;
    est.grid.push_back(R);
    est.ratios.push_back(ratio);
    if (ratio > est.omega_plus) {
      est.omega_plus = ratio;
      est.argmax = R;
    }
    if (ratio < est.omega_minus) {
      est.omega_minus = ratio;
      est.argmin = R;
    }
  }
  if (est.grid.empty()) throw ConstraintError("growth_exponents: empty window");
  return est;
}

namespace {

// Index offset of an integer grid of consecutive values; throws if not of that form.
long integer_origin(const CountingTable& t) {
  if (t.grid.empty()) throw ConstraintError("convolve: empty table");
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    const double expect = t.grid.front() + static_cast<double>(i);
    if (t.grid[i] != expect || t.grid[i] != std::floor(t.grid[i]))
      throw ConstraintError("convolve: grid must be consecutive integers");
  }
  return static_cast<long>(t.grid.front());
}

void require_aligned(const CountingTable& f, const CountingTable& g, const char* who) {
  if (f.grid != g.grid) throw ConstraintError(std::string(who) + ": grids are not aligned");
}

}  // namespace

CountingTable convolve(const CountingTable& f, const CountingTable& g) {
  f.validate();
  g.validate();
  require_aligned(f, g, "convolve");
  const long k0 = integer_origin(f);
  if (k0 < 0) throw ConstraintError("convolve: grid must start at a nonnegative integer");
  CountingTable out;
  out.kind = CountingKind::Volume;
  out.grid = f.grid;
  out.log_values.assign(f.grid.size(), kNegInf);
  std::vector<double> terms;
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    const long R = k0 + static_cast<long>(i);
    terms.clear();
    for (long n = k0; n <= R - k0; ++n)
      terms.push_back(f.log_values[n - k0] + g.log_values[R - n - k0]);
    out.log_values[i] = log_sum_exp(terms);
  }
  return out;
}

Sandwich volume_sandwich(const CountingTable& vGamma, const std::vector<CountingTable>& F_list) {
  vGamma.validate();
  Sandwich s;
  s.lower = vGamma;
  s.upper = vGamma;
  s.lower.kind = s.upper.kind = CountingKind::Volume;
  for (const auto& F : F_list) {
    require_aligned(vGamma, F, "volume_sandwich");
    const CountingTable conv = convolve(vGamma, F);
    for (std::size_t i = 0; i < vGamma.grid.size(); ++i) {
      s.lower.log_values[i] = log_add(s.lower.log_values[i], F.log_values[i]);
      s.upper.log_values[i] = log_add(s.upper.log_values[i], conv.log_values[i]);
    }
  }
  return s;
}

OmegaPair max_formula(const OmegaPair& delta_gamma, const std::vector<OmegaPair>& F_estimates) {
  auto finite = [](const OmegaPair& p) { return std::isfinite(p.plus) && std::isfinite(p.minus); };
  if (!finite(delta_gamma)) throw ConstraintError("max_formula: inputs must be finite");
  OmegaPair out = delta_gamma;
  for (const auto& f : F_estimates) {
    if (!finite(f)) throw ConstraintError("max_formula: inputs must be finite");
    out.plus = std::max(out.plus, f.plus);
    out.minus = std::max(out.minus, f.minus);
  }
  return out;
}

PinchPredicates pinch_predicates(double deltaP, double deltaP_minus, double eps) {
  if (!(deltaP_minus > 0.0 && deltaP_minus <= deltaP))
    throw ConstraintError("pinch_predicates: need 0 < deltaP_minus <= deltaP");
  PinchPredicates r;
  r.ratio = deltaP / deltaP_minus;
  r.half_pinched = deltaP <= 2.0 * deltaP_minus;
  r.case_i = deltaP >= 2.0 * deltaP_minus;
  r.volume_lower = deltaP_minus - eps;
  r.volume_upper = r.case_i ? 2.0 * (deltaP - deltaP_minus + eps) : 2.0 * (deltaP + eps);
  return r;
}

std::string growth_table_csv(const CuspModel& model, const std::vector<double>& R_grid,
                             unsigned threads) {
  const CountingTable vp = parabolic_counting(model, R_grid, threads);
  const CountingTable F = cuspidal_table(model, R_grid, threads);
  std::ostringstream os;
  os << std::setprecision(17) << "R,ln_vP,ln_F,ln_vP_plus_u_half,ln_vP_over_R,ln_F_over_R\n";
  for (std::size_t i = 0; i < R_grid.size(); ++i) {
    const double R = R_grid[i];
    os << R << ',' << vp.log_values[i] << ',' << F.log_values[i] << ','
       << vp.log_values[i] + model.u(0.5 * R) - model.u(0.0) << ',';
    if (R > 0.0)
      os << vp.log_values[i] / R << ',' << F.log_values[i] / R;
    else
      os << ',';
    os << '\n';
  }
  return os.str();
}

std::string counting_table_csv(const CountingTable& table) {
  std::ostringstream os;
  os << std::setprecision(17) << "R,ln_f\n";
  for (std::size_t i = 0; i < table.grid.size(); ++i)
    os << table.grid[i] << ',' << table.log_values[i] << '\n';
  return os.str();
}

namespace {
nlohmann::json finite_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}
}  // namespace

nlohmann::json to_json(const GrowthEstimate& e) {
  nlohmann::json ratios = nlohmann::json::array();
  for (std::size_t i = 0; i < e.grid.size(); ++i)
    ratios.push_back({{"R", e.grid[i]}, {"ratio", finite_or_null(e.ratios[i])}});
  return {{"omega_plus", finite_or_null(e.omega_plus)},
          {"omega_minus", finite_or_null(e.omega_minus)},
          {"window", {e.window_lo, e.window_hi}},
          {"argmax", e.argmax},
          {"argmin", e.argmin},
          {"ratios", ratios},
          {"caveat", "finite-window estimate: max/min of ln f(R)/R over the window, not a limit"}};
}

nlohmann::json to_json(const CountingTable& t) {
  nlohmann::json values = nlohmann::json::array();
  for (double v : t.log_values) values.push_back(finite_or_null(v));
  return {{"kind", kind_name(t.kind)}, {"grid", t.grid}, {"log_values", values}};
}

}  // namespace cuspgrowth
