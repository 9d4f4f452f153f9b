// Command-line driver: one subcommand per experiment, each reading a JSON
// config and writing plot-ready tables plus a metadata document.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "spinbus/cli_io.hpp"
#include "spinbus/error.hpp"
#include "spinbus/parallel.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int threads = 0;
};

int run(const std::string& experiment, const CommonOptions& opt) {
  using namespace spinbus;
  try {
    if (opt.threads > 0) {
      set_max_threads(opt.threads);
    } else if (const char* env = std::getenv("SPINBUS_THREADS")) {
      const int n = std::atoi(env);
      if (n > 0) set_max_threads(n);
    }

    const nlohmann::json config = cli::load_config(opt.config_path, experiment);
    const cli::ResultBundle bundle =
        cli::run_experiment(experiment, config, opt.seed);
    const auto paths = cli::serialize_bundle(bundle, opt.out_dir);
    for (const auto& p : paths) std::cout << p << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error (" << e.exit_code() << "): " << e.what() << "\n";
    cli::write_failure_marker(opt.out_dir, experiment, e.what(),
                              e.exit_code());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    cli::write_failure_marker(opt.out_dir, experiment, e.what(), 3);
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "spinbus: transverse-field Ising spin-bus simulator "
      "(spectra, flux propagation, susceptibility, effective couplings, "
      "flux-noise ensembles, hierarchical diagonalization)"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string chosen;
  for (const std::string& name : spinbus::cli::experiment_names) {
    CLI::App* sub = app.add_subcommand(name, name + " experiment");
    sub->add_option("--config", opt.config_path, "JSON configuration file")
        ->required();
    sub->add_option("--out", opt.out_dir, "output directory")->required();
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_option("--threads", opt.threads,
                    "worker threads (default: SPINBUS_THREADS or all cores)");
    sub->callback([&chosen, name]() { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return run(chosen, opt);
}
