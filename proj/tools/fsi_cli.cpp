#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "fsi/commands.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool dump_fields = false;
};

void add_flags(CLI::App& cmd, Flags& flags) {
  cmd.add_option("--config", flags.config, "configuration file")->required();
  cmd.add_option("--out", flags.out, "output directory (overrides output.out)");
  cmd.add_option("--seed", flags.seed, "random seed (overrides output.seed)");
  cmd.add_flag("--dump-fields", flags.dump_fields, "write per-step field CSVs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled elastic solid and quasi-linear Stokes fluid solver"};
  app.require_subcommand(1);
  Flags flags;
  const std::pair<const char*, const char*> commands[] = {
      {"run", "solve the coupled problem over the eps schedule"},
      {"solid", "apply the solid Dirichlet-to-Neumann operator to a random trace"},
      {"fluid", "apply the regularized fluid operator to a random traction"},
      {"verify", "run the estimate verification report"},
      {"study", "manufactured-solution convergence and eps studies"},
  };
  for (const auto& [name, help] : commands) add_flags(*app.add_subcommand(name, help), flags);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? fsi::kExitOk : fsi::kExitConfig;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  fsi::Invocation inv;
  try {
    std::ifstream in(flags.config, std::ios::binary);
    if (!in) throw fsi::ConfigError("cannot read config file " + flags.config);
    std::stringstream text;
    text << in.rdbuf();
    inv.config_text = text.str();
    inv.config = fsi::parse_config_text(inv.config_text, flags.config);
    if (flags.out) inv.config.out = *flags.out;
    if (flags.seed) inv.config.seed = *flags.seed;
    if (flags.dump_fields) inv.config.dump_fields = true;
  } catch (const fsi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return fsi::kExitConfig;
  }
  return fsi::run_command(name, inv, std::cout, std::cerr);
}
