#include "json_config.hpp"

#include <algorithm>
#include <istream>

namespace cspr::cli {

namespace {

std::string option_key(std::string name) {
  std::replace(name.begin(), name.end(), '_', '-');
  return name;
}

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number() || v.is_null()) return v.dump();
  throw CLI::ConversionError("config: nested objects are not supported");
}

// "3" -> 3, "true" -> true, anything else stays a string.
nlohmann::json typed(const std::string& text) {
  auto v = nlohmann::json::parse(text, nullptr, false);
  if (!v.is_discarded() && (v.is_number() || v.is_boolean())) return v;
  return text;
}

const CLI::App* selected_subcommand(const CLI::App* root) {
  auto subs = root->get_subcommands();
  return subs.empty() ? nullptr : subs.front();
}

void add_option_value(nlohmann::json& out, const CLI::Option* opt) {
  if (!opt->get_configurable() || opt->get_lnames().empty()) return;
  const auto& name = opt->get_lnames().front();
  std::vector<std::string> values;
  if (opt->count() > 0) {
    values = opt->reduced_results();
  } else {
    const auto def = opt->get_default_str();
    if (def.empty()) return;
    if (opt->get_expected_max() > 1 && def.size() >= 2 && def.front() == '[' && def.back() == ']') {
      values = CLI::detail::split(def.substr(1, def.size() - 2), ',');
      for (auto& v : values) v = CLI::detail::trim_copy(v);
    } else {
      values = {def};
    }
  }
  if (opt->get_expected_max() > 1) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& v : values) list.push_back(typed(v));
    out[name] = list;
  } else if (!values.empty()) {
    out[name] = typed(values.back());
  }
}

}  // namespace

std::string JsonConfig::to_config(const CLI::App* app, bool, bool, std::string) const {
  return resolved_options(*app).dump(2);
}

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  nlohmann::json doc;
  try {
    input >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw CLI::ConversionError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw CLI::ConversionError("config: expected a JSON object");
  // A run-manifest carries its resolved options under "config".
  if (doc.contains("tool") && doc.contains("config") && doc["config"].is_object()) doc = doc["config"];

  const auto* sub = selected_subcommand(root_);
  std::vector<CLI::ConfigItem> items;
  for (const auto& [key, value] : doc.items()) {
    CLI::ConfigItem item;
    item.name = option_key(key);
    if (root_->get_option_no_throw("--" + item.name) == nullptr && sub != nullptr) {
      item.parents = {sub->get_name()};
    }
    if (value.is_array()) {
      for (const auto& v : value) item.inputs.push_back(scalar_text(v));
    } else {
      item.inputs.push_back(scalar_text(value));
    }
    items.push_back(std::move(item));
  }
  return items;
}

nlohmann::json resolved_options(const CLI::App& app) {
  nlohmann::json out = nlohmann::json::object();
  const CLI::App* root = &app;
  while (root->get_parent() != nullptr) root = root->get_parent();
  for (const auto* opt : root->get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "config") continue;
    add_option_value(out, opt);
  }
  if (root != &app) {
    for (const auto* opt : app.get_options()) add_option_value(out, opt);
  }
  return out;
}

}  // namespace cspr::cli
