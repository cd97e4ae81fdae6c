#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Free energies and last-passage constants of directed polymers"};
  app.require_subcommand(1, 1);

  std::string config;
  std::string out_path;
  std::int64_t seed = -1;
  std::size_t threads = 0;
  for (const char* name : {"periodic", "mc", "oracle", "duality"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON config file")->required();
    sub->add_option("--out", out_path, "CSV output path (default stdout)");
    sub->add_option("--seed", seed, "seed overriding the config")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", threads, "worker threads (default $POLYVAR_THREADS or 1)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  polyvar::cli::Overrides ov;
  if (seed >= 0) ov.seed = static_cast<std::uint64_t>(seed);
  ov.threads = threads;
  if (ov.threads == 0) {
    if (const char* env = std::getenv("POLYVAR_THREADS")) {
      try {
        ov.threads = static_cast<std::size_t>(std::stoul(env));
      } catch (const std::exception&) {
        std::cerr << "error: POLYVAR_THREADS must be a positive integer\n";
        return 3;
      }
    }
  }
  if (ov.threads == 0) ov.threads = 1;

  const std::string name = app.get_subcommands().front()->get_name();
  if (out_path.empty()) return polyvar::cli::run_command(name, config, std::cout, std::cerr, ov);
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "error: cannot write '" << out_path << "'\n";
    return 3;
  }
  return polyvar::cli::run_command(name, config, out, std::cerr, ov);
}
