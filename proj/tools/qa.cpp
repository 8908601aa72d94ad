#include <charconv>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "json.hpp"
#include "qa/binary_io.hpp"
#include "qa/error.hpp"
#include "qa/numfmt.hpp"

using nlohmann::json;
namespace cli = qa::cli;

namespace {

constexpr int kUsage = 2;
constexpr int kFailure = 1;

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", message}, {"kind", kind}}.dump() << "\n";
}

std::uint64_t parse_count(const std::string& flag, const std::string& s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw qa::Error("config", "--" + flag + " expects a non-negative integer, got '" + s + "'");
  }
  return v;
}

/// Raw flag values for one subcommand, kept until we know which were given.
struct FlagStore {
  std::map<std::string, std::string> scalars;
  std::map<std::string, std::vector<std::string>> lists;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;
};

void register_options(CLI::App* sub, const cli::CommandSpec& spec, FlagStore& store) {
  sub->add_option("--config", store.config_path, "JSON config; flags override its fields");
  for (const auto& o : spec.options) {
    std::string name;
    for (const auto& part : CLI::detail::split(o.flag, ',')) name += (name.empty() ? "--" : ",--") + part;
    CLI::Option* opt = nullptr;
    switch (o.kind) {
      case cli::Kind::kFlag:
        opt = sub->add_flag(name, store.flags[o.key], o.help);
        break;
      case cli::Kind::kList:
      case cli::Kind::kInputList:
      case cli::Kind::kCountList:
        opt = sub->add_option(name, store.lists[o.key], o.help)->delimiter(',');
        break;
      case cli::Kind::kBindings:
        opt = sub->add_option(name, store.lists[o.key], o.help);
        break;
      default:
        opt = sub->add_option(name, store.scalars[o.key], o.help);
        break;
    }
    switch (o.kind) {
      case cli::Kind::kCount: opt->type_name("UINT"); break;
      case cli::Kind::kNumber: opt->type_name("FLOAT"); break;
      case cli::Kind::kInput:
      case cli::Kind::kOutput: opt->type_name("PATH"); break;
      case cli::Kind::kInputList: opt->type_name("PATH,..."); break;
      case cli::Kind::kCountList: opt->type_name("UINT,..."); break;
      case cli::Kind::kList: opt->type_name("ID,..."); break;
      case cli::Kind::kBindings: opt->type_name("ID=BINDING"); break;
      default: break;
    }
    store.options[o.key] = opt;
  }
}

json merge_flags(const cli::CommandSpec& spec, const FlagStore& store) {
  json cfg = json::object();
  if (!store.config_path.empty()) {
    try {
      cfg = json::parse(qa::io::read_file(store.config_path));
    } catch (const json::exception& e) {
      throw qa::Error("config", store.config_path + ": " + e.what());
    }
    if (!cfg.is_object()) throw qa::Error("config", store.config_path + ": expected a JSON object");
  }
  for (const auto& o : spec.options) {
    if (store.options.at(o.key)->count() == 0) continue;
    switch (o.kind) {
      case cli::Kind::kFlag:
        cfg[o.key] = store.flags.at(o.key);
        break;
      case cli::Kind::kCount:
        cfg[o.key] = parse_count(o.flag, store.scalars.at(o.key));
        break;
      case cli::Kind::kNumber:
        cfg[o.key] = qa::parse_double(store.scalars.at(o.key));
        break;
      case cli::Kind::kList:
      case cli::Kind::kInputList:
        cfg[o.key] = store.lists.at(o.key);
        break;
      case cli::Kind::kCountList: {
        json arr = json::array();
        for (const auto& s : store.lists.at(o.key)) arr.push_back(parse_count(o.flag, s));
        cfg[o.key] = arr;
        break;
      }
      case cli::Kind::kBindings: {
        json& b = cfg[o.key];
        if (!b.is_object()) b = json::object();
        for (const auto& pair : store.lists.at(o.key)) {
          const auto eq = pair.find('=');
          if (eq == std::string::npos || eq == 0) {
            throw qa::Error("config", "--" + o.flag + " expects id=binding, got '" + pair + "'");
          }
          b[pair.substr(0, eq)] = pair.substr(eq + 1);
        }
        break;
      }
      default:
        cfg[o.key] = store.scalars.at(o.key);
        break;
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple-choice QA retrieval and attentive ranking"};
  app.require_subcommand(1);
  std::map<std::string, FlagStore> stores;
  for (const auto& spec : cli::commands()) {
    register_options(app.add_subcommand(spec.name, spec.help), spec, stores[spec.name]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto parsed = app.get_subcommands();
    std::cout << (parsed.empty() ? app.help() : parsed.front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    const auto parsed = app.get_subcommands();
    std::cerr << e.what() << "\n\n" << (parsed.empty() ? app.help() : parsed.front()->help());
    return kUsage;
  }

  const auto* chosen = app.get_subcommands().front();
  const auto& spec = cli::find_command(chosen->get_name());
  try {
    const auto cfg = cli::resolve(spec, merge_flags(spec, stores.at(spec.name)));
    cli::execute(spec, cfg);
  } catch (const cli::MissingOption& e) {
    std::cerr << e.what() << "\n\n" << chosen->help();
    return kUsage;
  } catch (const qa::Error& e) {
    print_error(e.kind(), e.what());
    return kFailure;
  } catch (const json::exception& e) {
    print_error("config", e.what());
    return kFailure;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kFailure;
  }
  return 0;
}
