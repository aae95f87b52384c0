#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "iaffect/cli.hpp"
#include "iaffect/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Continuous infant affect classification pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> jobs;

  for (auto name : iaffect::cli::kCommands) {
    auto* sub = app.add_subcommand(std::string(name));
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--seed", seed, "Master seed (overrides the config)");
    sub->add_option("--out", out_dir, "Output directory (overrides the config)");
    sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  iaffect::cli::RunConfig config;
  try {
    config = config_path.empty() ? iaffect::cli::parse_run_config("{}")
                                 : iaffect::cli::load_run_config(config_path);
    iaffect::cli::Overrides o;
    o.seed = seed;
    if (out_dir) o.out_dir = *out_dir;
    o.jobs = jobs;
    iaffect::cli::apply(config, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return iaffect::cli::run_command(command, config, std::cout, std::cerr);
}
