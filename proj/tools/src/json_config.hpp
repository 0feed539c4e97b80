#pragma once

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace cspr::cli {

/// Reads a flat JSON object as a CLI11 config file. Keys are option long
/// names; '_' and '-' are interchangeable. A key names a global option if the
/// root app has one, otherwise an option of the selected subcommand. A
/// run-manifest.json is accepted as well; its "config" object is used.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;

 private:
  const CLI::App* root_;
};

/// Resolved values of every configurable option of `app` (and of the root
/// for globals), keyed by long name without dashes. Loadable via --config.
nlohmann::json resolved_options(const CLI::App& app);

}  // namespace cspr::cli
