#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "io.hpp"

namespace ximpact::cli {

enum class OptType { Str, Int, U64, Double, List, Flag };

struct OptSpec {
  std::string key;  // flag is --key
  OptType type;
  json def;  // null: no default
  std::string help;
  bool positional = false;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<OptSpec> options;
};

const std::vector<CommandSpec>& commands();

// Converts a command-line string to the option's JSON type; throws
// ValidationError on malformed input.
json convert_option(const OptSpec& o, const std::string& raw);

// Defaults, then the config file, then explicit flags.
json resolve_config(const CommandSpec& c, const json& file_config, const json& explicit_flags);

// Hash of the resolved config without the out and config keys.
std::string config_hash(const json& resolved);

// Each returns the process exit code. Errors derived from ximpact::Error or
// InputError propagate to the caller.
int run_command(const std::string& name, json cfg, std::ostream& out, std::ostream& err);

int cmd_simulate(json cfg, std::ostream& out, std::ostream& err);
int cmd_estimate(json cfg, std::ostream& out, std::ostream& err);
int cmd_axioms(json cfg, std::ostream& out, std::ostream& err);
int cmd_score(json cfg, std::ostream& out, std::ostream& err);
int cmd_cost(json cfg, std::ostream& out, std::ostream& err);

}  // namespace ximpact::cli
