#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "tda/config.hpp"
#include "tda/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tda - rare-word data augmentation for parallel corpora"};
  app.get_formatter()->column_width(26);

  std::string command;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> set_args;

  std::string command_list;
  for (const std::string& name : tda::command_names()) {
    if (!command_list.empty()) command_list += ", ";
    command_list += name;
  }
  app.add_option("command", command, "one of: " + command_list)->required();
  app.add_option("--config", config_path, "config file (key = value lines)");
  app.add_option("--set", set_args, "override a config key, e.g. --set top_k=100");
  app.add_option("--out", out_dir, "output directory (overrides out_dir)");

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const std::string& arg : set_args) {
      std::size_t eq = arg.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw tda::UsageError("--set expects key=value, got '" + arg + "'");
      }
      overrides.push_back({arg.substr(0, eq), arg.substr(eq + 1)});
    }
    if (!out_dir.empty()) overrides.push_back({"out_dir", out_dir});

    tda::RunConfig config = tda::parse_config(config_path, overrides);
    tda::run_command(command, config);
  } catch (const tda::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    std::cerr << "run '" << (argc > 0 ? argv[0] : "tda") << " --help' for usage\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
