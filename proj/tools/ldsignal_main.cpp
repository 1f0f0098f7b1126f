#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "ldsignal/errors.hpp"
#include "ldsignal/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ldsignal: minimax signal detection experiments"};
  app.require_subcommand(1);

  std::string config_path;
  ldsignal::RunOptions opt;
  std::string out_dir;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "experiment JSON")->required();
  auto* out_opt = run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--threads", opt.threads, "worker threads")->check(CLI::Range(1, 1024));
  auto* seed_opt = run->add_option("--seed", seed, "master seed (overrides LDSIGNAL_SEED and the config)");
  run->add_flag("--emit-gnuplot", opt.emit_gnuplot, "also write plot.gp");

  auto* validate = app.add_subcommand("validate", "parse a config and print the plan");
  validate->add_option("config", config_path, "experiment JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    ldsignal::ExperimentConfig cfg = ldsignal::load_config(config_path);
    if (*validate) {
      std::cout << ldsignal::describe_plan(cfg);
      return EXIT_SUCCESS;
    }
    if (*out_opt) opt.out_dir = out_dir;
    if (*seed_opt) opt.seed = seed;
    ldsignal::run_and_write(cfg, opt);
    std::cout << "wrote " << (opt.out_dir ? *opt.out_dir : cfg.output_dir) << "\n";
    return EXIT_SUCCESS;
  } catch (const ldsignal::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << config_path << ":0: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ldsignal::DegenerateSchemeError& e) {
    std::cerr << config_path << ":0: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ldsignal::NoGapError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ldsignal::NotACounterexampleError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ldsignal::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
