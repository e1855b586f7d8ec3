#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lpw/app/config.hpp"
#include "lpw/app/experiments.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool plots = false;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(lpw::app::ExperimentKind kind, const Overrides& o) {
  using nlohmann::json;
  json doc = json::object();
  if (!o.config_path.empty()) {
    try {
      doc = json::parse(read_text(o.config_path));
    } catch (const json::parse_error& e) {
      std::cerr << "error: " << o.config_path << ": malformed JSON: " << e.what() << "\n";
      return 2;
    }
  }
  if (doc.is_object()) {
    if (o.seed) doc["master_seed"] = *o.seed;
    if (o.out) doc["output_dir"] = *o.out;
    if (o.plots) doc["plots"] = true;
  }
  lpw::app::RunConfig config;
  try {
    config = lpw::app::parse_config(doc.dump(), kind);
  } catch (const lpw::app::ConfigError& e) {
    std::cerr << "error: invalid configuration\n";
    for (const auto& p : e.problems()) std::cerr << "  - " << p << "\n";
    return 2;
  }
  const auto summary = lpw::app::execute(config);
  for (const auto& path : summary.written) std::cout << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bell-test experiments on pilot-wave and lattice pilot-wave models"};
  app.require_subcommand(1);
  Overrides overrides;
  std::uint64_t seed = 0;
  std::string out;

  std::optional<lpw::app::ExperimentKind> chosen;
  for (auto kind : lpw::app::all_experiments()) {
    auto* sub = app.add_subcommand(lpw::app::to_string(kind), lpw::app::describe(kind));
    sub->add_option("--config", overrides.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_flag("--plots", overrides.plots, "also write SVG plots");
    sub->callback([&, kind, sub] {
      chosen = kind;
      if (sub->count("--seed") > 0) overrides.seed = seed;
      if (sub->count("--out") > 0) overrides.out = out;
    });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    return run(*chosen, overrides);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
