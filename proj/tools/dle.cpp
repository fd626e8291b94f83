// dle: command-line front end for the differential Lyapunov solvers.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dle/cli/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Krylov projection solvers for differential Lyapunov equations"};
  app.require_subcommand(1);
  // --h is the time step, so help is long-form only.
  app.set_help_flag("--help", "print help and exit");

  std::string config;
  dle::cli::Overrides ov;
  auto add_common = [&](CLI::App* sub, bool solver_flags) {
    sub->add_option("--config", config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", ov.out, "output directory");
    sub->add_option("--seed", ov.seed, "seed for random blocks");
    sub->add_option("--h", ov.h, "time step");
    if (!solver_flags) return;
    sub->add_option("--method", ov.method, "eba-exp or eba-bdf")
        ->check(CLI::IsMember({"eba-exp", "eba-bdf"}));
    sub->add_option("--m-max", ov.m_max, "maximum number of Arnoldi steps")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol", ov.tol, "residual tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--bdf-order", ov.bdf_order, "BDF order")->check(CLI::Range(1, 3));
  };
  auto* solve = app.add_subcommand("solve", "run one solver and write report.json and solve.csv");
  auto* compare = app.add_subcommand("compare", "run both solvers and the dense oracle");
  auto* sweep = app.add_subcommand("sweep", "sweep over m, h or p and write sweep.csv");
  auto* gen = app.add_subcommand("gen-problem", "write the problem matrices as Matrix Market files");
  add_common(solve, true);
  add_common(compare, true);
  add_common(sweep, true);
  add_common(gen, false);

  CLI11_PARSE(app, argc, argv);

  try {
    const dle::cli::RunConfig rc = dle::cli::load_config(config, ov);
    if (solve->parsed()) return dle::cli::cmd_solve(rc);
    if (compare->parsed()) return dle::cli::cmd_compare(rc);
    if (sweep->parsed()) return dle::cli::cmd_sweep(rc);
    return dle::cli::cmd_gen_problem(rc);
  } catch (const dle::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
