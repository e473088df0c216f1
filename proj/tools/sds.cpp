#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sds/config.hpp"
#include "sds/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Batch runner for random Lipschitz map experiments", "sds"};
  app.set_version_flag("--version", sds::kVersion);
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "Run the experiment described by a TOML config");
  std::string config_path;
  unsigned workers = 1;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  run->add_option("config", config_path, "Experiment config file")->required();
  run->add_option("--workers", workers, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed-override", seed_override, "Replace every seed in the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    sds::ExperimentConfig config = sds::load_config(config_path);
    if (seed_override) sds::override_seed(config, *seed_override);
    const sds::RunResult res = sds::run_experiment(config, {workers, out_dir});
    std::cout << "wrote";
    for (const auto& f : res.files) std::cout << ' ' << f;
    std::cout << " to " << res.output_dir << '\n';
    return 0;
  } catch (const std::exception& e) {
    const int code = sds::exit_code_for(e);
    const char* kind = code == 2 ? "config error" : code == 3 ? "identity violated" : "error";
    std::cerr << "sds: " << kind << ": " << e.what() << '\n';
    return code;
  }
}
