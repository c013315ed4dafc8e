#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "commands.hpp"
#include "ximpact/errors.hpp"

using ximpact::cli::json;

namespace {

struct Bound {
  const ximpact::cli::OptSpec* spec;
  CLI::Option* opt;
  std::string raw;
  bool flag = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-impact models: simulate, estimate, check axioms, score"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ximpact 0.1.0");

  std::map<std::string, std::vector<Bound>> bound;
  std::map<std::string, std::string> config_path;
  for (const auto& c : ximpact::cli::commands()) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    auto& bs = bound[c.name];
    bs.reserve(c.options.size());
    for (const auto& o : c.options) {
      bs.push_back({&o, nullptr, {}, false});
      Bound& b = bs.back();
      std::string help = o.help;
      if (!o.def.is_null() && o.type != ximpact::cli::OptType::Flag)
        help += " [default: " + (o.def.is_string() ? o.def.get<std::string>() : o.def.dump()) + "]";
      if (o.type == ximpact::cli::OptType::Flag) {
        b.opt = sub->add_flag("--" + o.key, b.flag, help);
      } else {
        const std::string names = o.positional ? o.key + ",--" + o.key : "--" + o.key;
        b.opt = sub->add_option(names, b.raw, help);
      }
    }
    sub->add_option("--config", config_path[c.name], "JSON config; explicit flags override it");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (const auto& c : ximpact::cli::commands()) {
    if (!app.got_subcommand(c.name)) continue;
    try {
      json flags = json::object();
      for (const auto& b : bound[c.name]) {
        if (b.opt->count() == 0) continue;
        flags[b.spec->key] = b.spec->type == ximpact::cli::OptType::Flag
                                 ? json(b.flag)
                                 : ximpact::cli::convert_option(*b.spec, b.raw);
      }
      json file = nullptr;
      if (!config_path[c.name].empty()) file = ximpact::cli::read_json(config_path[c.name]);
      json cfg = ximpact::cli::resolve_config(c, file, flags);
      return ximpact::cli::run_command(c.name, std::move(cfg), std::cout, std::cerr);
    } catch (const ximpact::cli::InputError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    } catch (const ximpact::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
