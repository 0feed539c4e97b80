#include "commands.hpp"
#include "json_config.hpp"

#include <cspr/error.hpp>
#include <cspr/parallel.hpp>

#include <iostream>
#include <map>
#include <memory>

namespace {

int exit_code(cspr::ErrorKind kind) {
  switch (kind) {
    case cspr::ErrorKind::InvalidArgument:
    case cspr::ErrorKind::Dimension: return 2;
    case cspr::ErrorKind::Format: return 3;
    case cspr::ErrorKind::Degenerate:
    case cspr::ErrorKind::Singular: return 4;
  }
  return 1;
}

std::string_view category(cspr::ErrorKind kind) {
  switch (exit_code(kind)) {
    case 2: return "usage";
    case 3: return "format";
    default: return "compute";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cspr: fuzzy-class common spatial patterns for EEG regression"};
  app.set_version_flag("--version", std::string(CSPR_VERSION));
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  cspr::cli::GlobalOptions globals;
  globals.jobs = cspr::default_jobs();
  app.add_option("--seed", globals.seed, "Master random seed");
  app.add_option("--out-dir", globals.out_dir, "Directory for every output file");
  app.add_option("--format", globals.format, "Format of tabular outputs")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--jobs", globals.jobs, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  app.set_config("--config", "", "JSON file of option values; command-line flags take precedence");
  app.config_formatter(std::make_shared<cspr::cli::JsonConfig>(&app));
  app.allow_config_extras(CLI::config_extras_mode::error);

  std::map<std::string, cspr::cli::Action> actions;
  cspr::cli::register_commands(app, globals, actions);
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    actions.at(app.get_subcommands().front()->get_name())();
  } catch (const cspr::Error& e) {
    std::cerr << "error: " << category(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
