// Command-line front end: evsi --config run.json [overrides]
#include "evsi/error.hpp"
#include "evsi/run_config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

int main(int argc, char** argv) {
  CLI::App app{"Estimate expected value of sample information over a sample-size grid"};
  std::string config_path;
  std::vector<std::string> methods;
  std::optional<long> n_min, n_max, n_step;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool plot = false;
  bool no_adjust = false;
  app.add_option("--config", config_path, "Run configuration (JSON)")->required();
  app.add_option("--method", methods, "Estimator to run (repeatable)");
  app.add_option("--n-min", n_min, "Smallest study size");
  app.add_option("--n-max", n_max, "Largest study size");
  app.add_option("--n-step", n_step, "Grid step");
  app.add_option("--seed", seed, "Simulation seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--plot", plot, "Write curves.svg");
  app.add_flag("--no-variance-adjustment", no_adjust, "Use raw inverse Fisher information");
  CLI11_PARSE(app, argc, argv);

  try {
    evsi::RunConfig config = evsi::load_config(config_path);
    if (!methods.empty()) {
      config.methods.clear();
      for (const auto& m : methods) config.methods.push_back(evsi::method_from_string(m));
    }
    if (n_min || n_max || n_step) {
      if (!(n_min && n_max && n_step) && !config.grid.empty()) {
        // Fill missing range ends from the configured grid.
        const long lo = config.grid.front();
        const long hi = config.grid.back();
        const long step = config.grid.size() > 1 ? config.grid[1] - config.grid[0] : 1;
        config.grid = evsi::make_grid(n_min.value_or(lo), n_max.value_or(hi), n_step.value_or(step));
      } else {
        config.grid = evsi::make_grid(*n_min, *n_max, *n_step);
      }
    }
    if (seed) config.seed = *seed;
    if (out_dir) config.output_dir = *out_dir;
    if (plot) config.plot = true;
    if (no_adjust) config.tga.variance.adjust = false;
    config.validate();

    const auto result =
        evsi::run_analysis(config, [](const std::string& line) { std::clog << line << '\n'; });
    evsi::emit_curves(result, config.output_dir, config.plot);
    std::clog << "wrote " << config.output_dir.string() << '\n';
  } catch (const evsi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
