#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "choquard/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectral Choquard concentration experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  std::vector<double> lambdas;
  bool strict = false;
  long long seed = -1;

  app.add_option("--config", config_path, "configuration file (INI)");
  app.add_option("--out", out_dir, "output directory (overrides [output] dir)");
  app.add_option("--override", overrides, "section.key=value override (repeatable)");
  app.add_flag("--strict", strict, "escalate boundary-decay warnings to errors");
  app.add_option("--seed", seed, "random seed override");

  CLI::App* validate = app.add_subcommand("validate", "classify the regime and constants");
  CLI::App* solve_limit =
      app.add_subcommand("solve-limit", "solve the limiting constant-potential problem");
  solve_limit->add_option("--lambda", lambdas, "lambda values (default 1)");
  CLI::App* concentrate =
      app.add_subcommand("concentrate", "penalized eps ladder with diagnostics");
  CLI::App* nonexist = app.add_subcommand("nonexist", "nonexistence obstruction probes");
  (void)validate;
  (void)concentrate;
  (void)nonexist;

  CLI11_PARSE(app, argc, argv);

  choq::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = choq::RunConfig::parse_file(config_path);
    for (const std::string& o : overrides) cfg.apply_override(o);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (strict) cfg.solver.strict_boundary = true;
    if (seed >= 0) cfg.solver.seed = static_cast<std::uint64_t>(seed);
  } catch (const std::exception& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  return choq::run_command(name, cfg, lambdas, std::cout, std::cerr);
}
