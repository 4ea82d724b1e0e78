// stochrelax: run stochastic-relaxation experiments and print the
// verification tables for the closed-form examples.
//
//   stochrelax run <config> [--output <dir>]
//   stochrelax mgf <file> --t <real> [--n <int>]
//   stochrelax binomial-demo --n <int>
//   stochrelax orlicz-demo --a <real>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "stochrelax/config.hpp"
#include "stochrelax/demos.hpp"
#include "stochrelax/runner.hpp"
#include "stochrelax/walsh.hpp"

int main(int argc, char** argv) {
  using namespace stochrelax;

  CLI::App app{"Stochastic relaxation of pseudo-Boolean functions over exponential families"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  auto* run = app.add_subcommand("run", "Run replicates described by a config file");
  run->add_option("config", config_path, "Run configuration (INI)")->required()->check(CLI::ExistingFile);
  run->add_option("--output", output_dir, "Override run.output");

  std::string function_path;
  double t = 1.0;
  int dim = 0;
  auto* mgf = app.add_subcommand("mgf", "Moment generating function under the uniform density");
  mgf->add_option("file", function_path, "Function file, one 'coefficient: i1 ... ik' per line")
      ->required()
      ->check(CLI::ExistingFile);
  mgf->add_option("--t", t, "Argument of the MGF")->required();
  mgf->add_option("--n", dim, "Dimension (default: largest variable index)")->check(CLI::Range(1, 64));

  int trials = 2;
  auto* binomial = app.add_subcommand("binomial-demo", "Binomial dual-parametrization identity table");
  binomial->add_option("--n", trials, "Number of trials")->required()->check(CLI::Range(1, 100000));

  double shift = 1.0;
  auto* orlicz_cmd = app.add_subcommand("orlicz-demo", "Non-steep gamma-tail Phi-expectation table");
  orlicz_cmd->add_option("--a", shift, "Shift a > 0 of the gamma-tail density")
      ->required()
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      std::ifstream in(config_path);
      auto cfg = cli::parse_config(in);
      if (!output_dir.empty()) cfg.output = output_dir;
      return cli::run_command(cfg, std::cout);
    }
    if (*mgf) {
      std::ifstream in(function_path);
      const auto f = walsh::parse_function(in, dim > 0 ? std::optional<int>(dim) : std::nullopt);
      const auto rep = cli::mgf_report(f, t);
      cli::print(std::cout, rep);
      return rep.ok ? 0 : 1;
    }
    if (*binomial) {
      const auto demo = cli::binomial_demo(trials);
      cli::print(std::cout, demo);
      return demo.ok ? 0 : 1;
    }
    if (*orlicz_cmd) {
      const auto demo = cli::orlicz_demo(shift);
      cli::print(std::cout, demo);
      return demo.ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
