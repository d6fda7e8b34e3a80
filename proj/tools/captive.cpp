#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "captive/cli.hpp"

namespace cli = captive::cli;

namespace {

const char* describe(std::string_view name) {
  if (name == "simulate") return "validate a captive model and simulate an ensemble";
  if (name == "corridors") return "simulate a corridor stack with occupancy statistics";
  if (name == "polar") return "simulate polar paths inside an annulus";
  if (name == "transitions") return "corridor transition probabilities, analytic and MC";
  if (name == "transform") return "map captive paths through a monotone function";
  return "run every validator and write validation.json";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Captive jump-diffusion simulator"};
  app.set_version_flag("--version", std::string(cli::kToolVersion));
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::string> out, input, map;
  bool summary = false;
  std::size_t threads = 0;

  for (std::string_view name : cli::kSubcommands) {
    CLI::App* sub = app.add_subcommand(std::string(name), describe(name));
    sub->add_option("--config", config, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "override simulation.seed");
    sub->add_option("--paths", paths, "override simulation.n_paths");
    sub->add_option("--out", out, "override output.directory");
    sub->add_option("--threads", threads, "worker count (0: automatic)");
    if (name == "transform") {
      sub->add_option("--input", input, "path CSV to map instead of simulating");
      sub->add_option("--map", map, "exp, reciprocal, identity or sin-construct");
    }
    if (name == "polar") sub->add_flag("--summary", summary, "write radial histograms");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    cli::Overrides o;
    o.seed = seed;
    o.paths = paths;
    o.out = out;
    o.input = input;
    o.map = map;
    o.summary = summary;
    o.threads = threads;
    const cli::RunConfig cfg = cli::apply_overrides(cli::load_config(config), o);
    const std::string sub = app.get_subcommands().front()->get_name();
    return cli::run_command(sub, cfg, o);
  } catch (const std::exception& e) {
    std::cerr << cli::error_json(e).dump() << '\n';
    return cli::exit_code(e);
  }
}
