// tfa: decompose / select / project / evaluate / sweep / verify
#include <iostream>

#include "CLI11.hpp"
#include "tfa/errors.hpp"
#include "tfa/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"time-frequency analysis of degenerate trilinear forms"};
  app.require_subcommand(1, 1);

  std::string config, out = "out", suite = "all", input;
  long long seed = -1;
  int threads = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "INI file")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "overrides run.seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", threads, "overrides run.threads")->check(CLI::PositiveNumber);
  };
  for (const char* name : {"decompose", "select", "project", "evaluate", "sweep"})
    common(app.add_subcommand(name));
  auto* verify = app.add_subcommand("verify", "check named invariants");
  common(verify);
  verify->add_option("--suite", suite, "geometry, tiles, signals, selection, projections, forms or all");
  verify->add_option("--input", input, "tile dump to check instead of the configured window");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : tfa::kExitConfig;
  }

  tfa::CommandOptions opt;
  opt.command = app.get_subcommands().front()->get_name();
  opt.out = out;
  opt.suite = suite;
  if (!input.empty()) opt.input = input;

  tfa::RunConfig cfg;
  try {
    cfg = tfa::load_config(config);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (threads > 0) cfg.threads = threads;
    tfa::validate_config(cfg);
  } catch (const tfa::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tfa::kExitConfig;
  }
  return tfa::run_command(cfg, opt, std::cout, std::cerr);
}
