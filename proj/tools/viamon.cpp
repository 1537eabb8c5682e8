#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"viamon: version-age analytics, simulation and sampling-policy optimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", viamon::git_describe());

  struct Args {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
  };
  Args args;
  for (const char* name : {"validate", "sweep", "optimize"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config, "YAML experiment file")->required();
    sub->add_option("--out", args.out, "output directory (overrides output.dir)");
    sub->add_option("--seed", args.seed, "base seed (overrides simulation.seed)");
    sub->add_option("--jobs", args.jobs, "worker threads")->check(CLI::PositiveNumber);
  }
  app.get_subcommand("validate")->description("check closed forms against the chain solver and Monte Carlo");
  app.get_subcommand("sweep")->description("tabulate every metric over the grid for each policy");
  app.get_subcommand("optimize")->description("solve the budgeted sampling problem on each grid cell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : viamon::kExitConfig;
  }

  const auto* sub = app.get_subcommands().front();
  viamon::RunOptions opts;
  if (sub->count("--out")) opts.out_dir = args.out;
  if (sub->count("--seed")) opts.seed = args.seed;
  opts.jobs = args.jobs;
  return viamon::run_command(sub->get_name(), args.config, opts, std::cout, std::cerr);
}
