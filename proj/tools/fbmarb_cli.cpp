// Command-line driver: simulate, calculus, validate-config, version.

#include <iostream>

#include <CLI11.hpp>

#include "fbmarb/errors.hpp"
#include "fbmarb/experiment.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::size_t> seeds;
  std::optional<std::string> out;
  unsigned threads = 0;
};

fbmarb::ExperimentConfig load(const Overrides& o) {
  fbmarb::ExperimentConfig cfg = fbmarb::load_config(o.config_path);
  if (o.seeds) {
    if (*o.seeds == 0) throw fbmarb::ConfigError({"--seeds must be >= 1"});
    cfg.num_seeds = *o.seeds;
  }
  if (o.out) cfg.output_dir = *o.out;
  return cfg;
}

int finish(const fbmarb::RunReport& report) {
  fbmarb::write_report(report, report.config.output_dir);
  for (const auto& v : report.verdicts) {
    std::cout << (v.passed ? "PASS " : "FAIL ") << v.name << ": " << v.detail << "\n";
  }
  std::cout << "report written to " << report.config.output_dir << " ("
            << report.wall_seconds << " s)\n";
  return report.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractal-modulated market simulator and arbitrage verifier"};
  app.require_subcommand(1);

  Overrides o;
  const auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON experiment config")->required();
    sub->add_option("--seeds", o.seeds, "override num_seeds");
    sub->add_option("--out", o.out, "override output_dir");
    sub->add_option("--threads", o.threads, "worker threads (0 = auto)");
  };

  auto* simulate = app.add_subcommand("simulate", "run the arbitrage experiment");
  add_run_flags(simulate);
  auto* calculus = app.add_subcommand("calculus", "run the pathwise calculus verifiers");
  add_run_flags(calculus);
  auto* validate = app.add_subcommand("validate-config", "check a config file");
  validate->add_option("--config", o.config_path, "JSON experiment config")->required();
  app.add_subcommand("version", "print the library version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fbmarb::kExitConfigError;
  }

  try {
    if (app.got_subcommand("version")) {
      std::cout << "fbmarb " << fbmarb::kVersion << "\n";
      return 0;
    }
    if (app.got_subcommand("validate-config")) {
      const auto cfg = fbmarb::load_config(o.config_path);
      std::cout << fbmarb::to_json(cfg).dump(2) << "\n";
      return 0;
    }
    const fbmarb::RunOptions options{o.threads};
    if (app.got_subcommand("simulate")) {
      return finish(fbmarb::run_experiment(load(o), options));
    }
    return finish(fbmarb::run_calculus_suite(load(o), options));
  } catch (const fbmarb::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return fbmarb::kExitConfigError;
  } catch (const fbmarb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fbmarb::kExitConsistencyFailure;
  }
}
