#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qa/manifest.hpp"

namespace qa::cli {

/// A required option was absent from both the flags and the config file.
class MissingOption : public std::runtime_error {
 public:
  explicit MissingOption(const std::string& key)
      : std::runtime_error("missing required option '" + key + "'") {}
};

enum class Kind {
  kText,
  kInput,      ///< path read by the command
  kOutput,     ///< path written by the command
  kCount,
  kNumber,
  kList,
  kInputList,
  kCountList,
  kBindings,   ///< repeated id=binding pairs
  kFlag,
};

struct OptionSpec {
  std::string key;
  std::string flag;  ///< long names without dashes, comma separated
  Kind kind;
  std::string help;
};

struct RunContext {
  Manifest manifest;
  /// Where the manifest goes; set by the command.
  std::string manifest_path;

  void output(const std::string& path);
};

using Handler = void (*)(const nlohmann::json& cfg, RunContext& ctx);

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<OptionSpec> options;
  std::vector<std::string> required;
  Handler run;
};

const std::vector<CommandSpec>& commands();
const CommandSpec& find_command(const std::string& name);

/// Makes every path-valued field absolute and checks required keys.
nlohmann::json resolve(const CommandSpec& spec, nlohmann::json cfg);

/// Runs a resolved config, records input digests and writes the manifest.
void execute(const CommandSpec& spec, const nlohmann::json& cfg);

}  // namespace qa::cli
