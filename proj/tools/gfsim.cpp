// Command-line front end: run, sweep, preset, replay.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "gfsim/config.hpp"
#include "gfsim/experiments.hpp"
#include "gfsim/metrics.hpp"

namespace {

namespace ex = gfsim::experiments;

gfsim::Config load_config(const std::string& path, const std::vector<std::string>& sets) {
  gfsim::Config c;
  if (!path.empty()) c.load_file(path);
  for (const auto& s : sets) c.set_assignment(s);
  return c;
}

void emit(const std::string& csv, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << csv;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw gfsim::ConfigError("cannot write " + out_path);
  out << csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gfsim: discrete-event simulator of a CPU-GPU file I/O stack"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string out_path;

  auto* run = app.add_subcommand("run", "run one configuration sim.repetitions times");
  run->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  run->add_option("--set", sets, "override: key=value (repeatable)");
  run->add_option("--out", out_path, "CSV output file (default stdout)");

  std::string param;
  std::string values;
  auto* sweep = app.add_subcommand("sweep", "run one configuration per value of a parameter");
  sweep->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  sweep->add_option("--set", sets, "override: key=value (repeatable)");
  sweep->add_option("--param", param, "config key to vary")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--out", out_path, "CSV output file (default stdout)");

  std::string preset_name;
  double scale = 1.0;
  std::string out_dir;
  auto* preset = app.add_subcommand("preset", "run a named experiment preset as CSV");
  preset->add_option("name", preset_name, "preset name")->required();
  preset->add_option("--scale", scale, "size scale factor");
  preset->add_option("--out", out_dir, "directory for <name>.csv (default stdout)");
  preset->add_option("--set", sets, "override: key=value (repeatable)");

  std::string trace_path;
  auto* replay = app.add_subcommand("replay", "replay a request trace on the host path only");
  replay->add_option("--trace", trace_path, "trace file")->required()->check(CLI::ExistingFile);
  replay->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  replay->add_option("--set", sets, "override: key=value (repeatable)");
  replay->add_option("--out", out_path, "CSV output file (default stdout)");

  app.add_subcommand("presets", "list preset names");
  app.add_subcommand("keys", "list config keys with defaults");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      emit(ex::run_csv(ex::run(load_config(config_path, sets))), out_path);
    } else if (*sweep) {
      emit(ex::sweep_csv(load_config(config_path, sets), param, ex::split_list(values)), out_path);
    } else if (*preset) {
      const auto p = ex::make_preset(preset_name, scale, load_config("", sets));
      const std::string csv = ex::preset_csv(p);
      if (out_dir.empty()) {
        std::cout << csv;
      } else {
        std::filesystem::create_directories(out_dir);
        emit(csv, (std::filesystem::path(out_dir) / (preset_name + ".csv")).string());
      }
    } else if (*replay) {
      auto c = load_config(config_path, sets);
      c.set("mode.replay", "1");
      c.set("workload.trace_file", trace_path);
      emit(ex::run_csv(ex::run(c)), out_path);
    } else if (app.got_subcommand("presets")) {
      for (const auto& n : ex::preset_names()) std::cout << n << '\n';
    } else if (app.got_subcommand("keys")) {
      for (const auto& k : gfsim::config_keys()) {
        std::cout << k.key << '=' << k.default_value << "  # " << k.help << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "gfsim: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
