#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qflow/scenario.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qflow::Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// `run` and `validate` accept either a config file path or a preset name.
qflow::ScenarioConfig load_config(const std::string& source) {
  if (std::filesystem::exists(source))
    return qflow::parse_config(slurp(source));
  const auto names = qflow::preset_names();
  if (std::find(names.begin(), names.end(), source) != names.end())
    return qflow::preset_config(source);
  throw qflow::ValidationError("\"" + source +
                               "\" is neither a config file nor a preset");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qflow: analytic matter-wave interference and Bohmian "
               "trajectory toolkit"};
  app.require_subcommand(1);

  std::string source;
  std::string out_override;
  long long seed_override = -1;

  auto* run = app.add_subcommand("run", "run a scenario config or preset");
  run->add_option("config", source, "config file or preset name")->required();
  run->add_option("--seed", seed_override, "override the ensemble seed");
  run->add_option("--out", out_override, "override the output directory");

  auto* validate =
      app.add_subcommand("validate", "parse and validate a config");
  validate->add_option("config", source, "config file or preset name")
      ->required();

  auto* presets = app.add_subcommand("presets", "preset utilities");
  auto* presets_list = presets->add_subcommand("list", "list preset names");
  std::string show_name;
  auto* presets_show =
      presets->add_subcommand("show", "print a preset config");
  presets_show->add_option("name", show_name, "preset name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (presets_list->parsed()) {
      for (const auto& name : qflow::preset_names()) std::puts(name.c_str());
      return 0;
    }
    if (presets_show->parsed()) {
      std::fputs(qflow::print_config(qflow::preset_config(show_name)).c_str(),
                 stdout);
      return 0;
    }
    if (validate->parsed()) {
      (void)load_config(source);
      std::puts("config ok");
      return 0;
    }

    qflow::ScenarioConfig cfg = load_config(source);
    if (seed_override >= 0)
      cfg.ensemble.seed = static_cast<std::uint64_t>(seed_override);
    if (!out_override.empty()) cfg.output_dir = out_override;

    const auto manifest = qflow::run_manifest(cfg);
    qflow::emit_plots(manifest);

    for (const auto& chk : manifest.checks)
      std::printf("[%s] %s (value %.6g, threshold %.6g)\n",
                  chk.passed ? "pass" : "FAIL", chk.name.c_str(), chk.value,
                  chk.threshold);
    std::printf("artifacts: %zu file(s) in %s (%.2f s)\n",
                manifest.artifacts.size(), manifest.output_dir.c_str(),
                manifest.duration_seconds);
    return manifest.all_passed ? 0 : 1;
  } catch (const qflow::ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const qflow::ValidationError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
