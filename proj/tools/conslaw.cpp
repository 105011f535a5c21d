#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "conslaw/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"conslaw: scalar conservation laws on the torus"};
  app.require_subcommand(1);
  std::string manifest_path, out_dir;
  for (const auto& name : conslaw::experiment_commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--manifest", manifest_path, "manifest JSON")->required();
    sub->add_option("--out", out_dir, "output root")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  nlohmann::json manifest;
  {
    std::ifstream is(manifest_path);
    if (!is) {
      std::cerr << "error: cannot open manifest " << manifest_path << '\n';
      return 2;
    }
    try {
      is >> manifest;
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "error: manifest is not valid JSON: " << e.what() << '\n';
      return 2;
    }
  }
  try {
    const auto res = conslaw::run_experiment(command, manifest, out_dir);
    if (res.status != conslaw::ExitStatus::ok) std::cerr << "error: " << res.message << '\n';
    if (!res.out_dir.empty()) std::cout << res.out_dir.string() << '\n';
    return static_cast<int>(res.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
