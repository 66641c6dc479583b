#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuspgrowth/cusp_geometry.hpp"
#include "cuspgrowth/lattice_poincare.hpp"

namespace cuspgrowth {

// Numeric fields that accept "auto" / "aggressive" are stored as nullopt until resolved.
struct ExperimentConfig {
  double alpha = 1.0;
  double beta = 2.5;
  double eta = 0.05;
  std::string model = "built";  // "built" or "constant"

  std::optional<double> Delta;     // "auto": smallest valid
  std::optional<double> lambda0;   // "auto": mu0 / 2
  std::optional<double> mu0;       // "auto": 0.95 / (2 A_sep)
  std::optional<double> A_sep;     // "aggressive": sharp separation
  double separation_margin = 0.01;
  int n_min = 1;
  int n_max = 1;

  std::vector<double> distance_dx{0.5, 5.0, 50.0, 5000.0};
  std::vector<double> volume_R{4.0, 8.0, 12.0, 16.0};
  double count_lo = 10.0, count_hi = 40.0, count_step = 1.0;
  // Exponent window for the constant model; built profiles use the aligned grid.
  double exponent_lo = 40.0, exponent_hi = 400.0, exponent_step = 10.0;
  std::size_t pinch_samples = 10000;
  std::size_t curvature_samples = 2000;
  std::size_t random_pairs = 1000;

  double geodesic_rel_tol = 1e-14;
  double volume_rel_tol = 1e-3;
  double cuspidal_rel_tol = 1e-6;

  std::optional<double> cert_s;  // "auto": beta/2 + eps_hat/2
  long cert_N_max = 1000;
  double d_const = 4.0;
  double A_bound_factor = 1.1;
  int cert_L = 14;
  long head_terms = 4096;

  int lattice_L_max = 14;
  double lattice_s = 1.05;
  double lattice_window_lo = 8.0;
  double lattice_window_hi = 12.0;

  std::uint64_t seed = 12345;
  unsigned threads = 1;

  // Throws ConstraintError on unknown keys or invalid values.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
  void validate() const;
};

// FNV-1a of the canonical (sorted-key) JSON dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

// Schedule with every "auto" field filled in. Requires model == "built" and beta > alpha.
IntervalSchedule resolve_schedule(const ExperimentConfig& config);
CuspModel build_model(const ExperimentConfig& config);

// Grid R = 2 t at plateau midpoints and ends; `alpha_only` keeps only alpha plateaus.
std::vector<double> aligned_grid(const IntervalSchedule& schedule, bool alpha_only);

// max over reachable n of ln F(Delta^n) / Delta^n - beta/2.
struct GapMeasurement {
  double eps_hat = 0.0;
  int n = 0;
  std::vector<double> per_n;
};
GapMeasurement measure_cuspidal_gap(const CuspModel& model, const IntervalSchedule& schedule,
                                    double rel_tol = 1e-6);

struct CommandResult {
  nlohmann::json report;
  int exit_code = 0;
};

CommandResult cmd_build_metric(const ExperimentConfig& c, const std::filesystem::path& out);
CommandResult cmd_feasibility(const ExperimentConfig& c, const std::filesystem::path& out);
CommandResult cmd_distance(const ExperimentConfig& c, const std::filesystem::path& out);
CommandResult cmd_volume(const ExperimentConfig& c, const std::filesystem::path& out);
CommandResult cmd_count(const ExperimentConfig& c, const std::filesystem::path& out);
CommandResult cmd_cuspidal(const ExperimentConfig& c, const std::filesystem::path& out);
CommandResult cmd_exponents(const ExperimentConfig& c, const std::filesystem::path& out);
CommandResult cmd_poincare(const ExperimentConfig& c, const std::filesystem::path& out);
CommandResult cmd_certificate(const ExperimentConfig& c, const std::filesystem::path& out);
CommandResult cmd_counterexample(const ExperimentConfig& c, const std::filesystem::path& out);

// Dispatches by verb name; throws ConstraintError for an unknown verb.
CommandResult run_command(const std::string& verb, const ExperimentConfig& c,
                          const std::filesystem::path& out);
const std::vector<std::string>& command_names();

}  // namespace cuspgrowth
