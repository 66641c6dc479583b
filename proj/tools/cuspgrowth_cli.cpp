// Command-line driver: cuspgrowth <verb> [--config PATH] [--out DIR] [--threads N] [--seed S]
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cuspgrowth/errors.hpp"
#include "cuspgrowth/experiment.hpp"

int main(int argc, char** argv) {
  using namespace cuspgrowth;
  CLI::App app{"Warped cusp geometry and critical exponent experiments"};
  std::string verb, config_path, out_dir = "out";
  unsigned threads = 0;
  long long seed = -1;
  app.add_option("verb", verb, "Command to run")->required()->check(CLI::IsMember(command_names()));
  app.add_option("--config", config_path, "JSON config; omitted keys take defaults");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (overrides the config)");
  app.add_option("--seed", seed, "Random seed (overrides the config)");
  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json doc = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ConstraintError("cannot read config " + config_path);
      try {
        doc = nlohmann::json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        throw ConstraintError(std::string("config: ") + e.what());
      }
    }
    if (threads > 0) doc["threads"] = threads;
    if (seed >= 0) doc["seed"] = static_cast<unsigned long long>(seed);
    const ExperimentConfig config = ExperimentConfig::from_json(doc);
    const CommandResult result = run_command(verb, config, out_dir);
    std::cout << result.report.dump(2) << "\n";
    return result.exit_code;
  } catch (const ConstraintError& e) {
    std::cerr << "constraint violation: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
