#pragma once

#include <CLI11.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>

namespace cspr::cli {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string out_dir = "cspr-out";
  std::string format = "json";
  std::size_t jobs = 1;
};

using Action = std::function<void()>;

/// Adds every subcommand to `root`; `actions` maps subcommand name to its
/// body, which runs after parsing succeeds.
void register_commands(CLI::App& root, GlobalOptions& globals, std::map<std::string, Action>& actions);

}  // namespace cspr::cli
