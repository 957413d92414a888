// magpl <experiment> --config <file> [--out <dir>] [--seed <n>] [--threads <n>]
//
// Exit status: 0 when every acceptance-tagged check passes, 1 when one fails,
// 2 for configuration or runtime errors.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "magpl/config.hpp"
#include "magpl/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Magnetic p-Laplacian critical-growth experiments"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool print_config = false;

  for (const char* name : {"ineq-sweep", "instanton-rates", "certify", "solve", "geometry"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("-c,--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out_dir, "output root (overrides MAGPL_OUT and output_dir)");
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--threads", threads, "thread count (recorded; runs are serial)")->check(CLI::PositiveNumber);
    sub->add_flag("--print-config", print_config, "print the validated config with all defaults and exit");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string experiment = app.get_subcommands().front()->get_name();

  try {
    magpl::RunConfig cfg = magpl::parse_config(config_path);
    if (magpl::experiment_name(cfg.experiment) != experiment) {
      std::cerr << "error: " << config_path << " configures '" << magpl::experiment_name(cfg.experiment)
                << "', not '" << experiment << "'\n";
      return 2;
    }
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (print_config) {
      std::cout << magpl::write_config(cfg);
      return 0;
    }
    const auto root = magpl::resolve_output_root(out_dir.empty() ? std::nullopt : std::optional(out_dir), cfg);
    const magpl::RunRecord rec = magpl::run(cfg, root);
    for (const auto& c : rec.checks)
      std::printf("%s  %s%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.empty() ? "" : ": ",
                  c.detail.c_str());
    std::printf("outputs in %s\n", rec.run_dir.c_str());
    return rec.passed() ? 0 : 1;
  } catch (const magpl::ConfigError& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
