#include <iostream>

#include <CLI11.hpp>

#include "liesym/cli/commands.hpp"

int main(int argc, char** argv) {
  using liesym::cli::RunConfig;
  CLI::App app{"Lie symmetries of BSDEs: derive, verify, exponentiate, simulate"};
  app.require_subcommand(1);
  RunConfig c;

  auto common = [&](CLI::App* s) {
    s->add_option("--problem", c.problem, "problem file")->required()->check(CLI::ExistingFile);
    s->add_option("--out", c.out, "output directory for reports and CSV files");
  };
  auto with_candidate = [&](CLI::App* s) {
    s->add_option("--candidate", c.candidate, "candidate file")->required()->check(CLI::ExistingFile);
  };
  auto with_a = [&](CLI::App* s) {
    s->add_option("--a", c.a_values, "group parameter (repeatable)")->take_all();
  };

  auto* derive = app.add_subcommand("derive", "print the split determining system");
  common(derive);
  auto* verify = app.add_subcommand("verify", "check a candidate symmetry");
  common(verify);
  with_candidate(verify);
  verify->add_option("--seed", c.seed, "seed for sampled checks");
  auto* exponentiate = app.add_subcommand("exponentiate", "tabulate the finite transformations");
  common(exponentiate);
  with_candidate(exponentiate);
  with_a(exponentiate);
  auto* simulate = app.add_subcommand("simulate", "run the Monte Carlo verification");
  common(simulate);
  simulate->add_option("--candidate", c.candidate, "candidate file")->check(CLI::ExistingFile);
  with_a(simulate);
  simulate->add_option("--paths", c.paths, "number of paths M");
  simulate->add_option("--steps", c.steps, "number of time steps N");
  simulate->add_option("--seed", c.seed, "random seed");
  simulate->add_option("--degree", c.degree, "regression basis degree");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  c.subcommand = app.get_subcommands().front()->get_name();
  return liesym::cli::run(c, std::cout, std::cerr);
}
