#include <filesystem>
#include <fstream>
#include <sstream>

#include "qflow/scenario.hpp"

namespace qflow {

namespace {

namespace fs = std::filesystem;

bool has_artifact(const RunManifest& m, const std::string& name) {
  for (const auto& a : m.artifacts)
    if (a.file == name) return true;
  return false;
}

void write_script(const fs::path& dir, const std::string& name,
                  const std::string& body, std::vector<std::string>& written) {
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write plot script: " + path.string());
  out << body;
  written.push_back(name);
}

}  // namespace

std::vector<std::string> emit_plots(const RunManifest& manifest) {
  if (manifest.artifacts.empty())
    throw MissingArtifactError("emit_plots: manifest lists no artifacts");
  const fs::path dir = manifest.output_dir;
  for (const auto& a : manifest.artifacts)
    if (!fs::exists(dir / a.file))
      throw MissingArtifactError("emit_plots: missing artifact " + a.file);

  std::vector<std::string> written;

  if (has_artifact(manifest, "carpet.csv")) {
    std::ostringstream s;
    s << "plot: density carpet\n"
      << "data: carpet.csv\n"
      << "layout: heatmap\n"
      << "x: header row (position x)\n"
      << "y: first column (time t)\n"
      << "values: remaining cells (probability density rho)\n"
      << "xlabel: x\n"
      << "ylabel: t\n"
      << "colorbar: rho(x, t)\n";
    write_script(dir, "carpet.plot", s.str(), written);
  }

  if (has_artifact(manifest, "trajectories.csv")) {
    std::ostringstream s;
    s << "plot: trajectory fan\n"
      << "data: trajectories.csv\n"
      << "layout: lines\n"
      << "x: column t\n"
      << "series: columns path_*\n"
      << "xlabel: t\n"
      << "ylabel: x\n";
    write_script(dir, "trajectories.plot", s.str(), written);
  }

  if (has_artifact(manifest, "ladder.csv")) {
    std::ostringstream s;
    s << "plot: far-field momentum ladder\n"
      << "layout: two stacked panels, shared x\n"
      << "panel 1:\n"
      << "  data: carpet.csv\n"
      << "  use: last row (density at the far-field time)\n"
      << "  ylabel: rho\n"
      << "panel 2:\n"
      << "  data: ladder.csv\n"
      << "  x: column x\n"
      << "  y: column p_normalized\n"
      << "  ylabel: p / (2 pi hbar / d)\n"
      << "  hint: horizontal gridlines at integer steps\n";
    write_script(dir, "ladder.plot", s.str(), written);
  }

  if (has_artifact(manifest, "scaling.csv")) {
    std::ostringstream s;
    s << "plot: truncation length scaling\n"
      << "data: scaling.csv\n"
      << "layout: scatter with fit line\n"
      << "x: column K (log scale)\n"
      << "y: column L (log scale)\n"
      << "fit: dimension.json (slope D_f - 1)\n"
      << "xlabel: number of modes K\n"
      << "ylabel: curve length L\n";
    write_script(dir, "scaling.plot", s.str(), written);
  }

  if (has_artifact(manifest, "toymodel.csv")) {
    std::ostringstream s;
    s << "plot: effective-well geometry\n"
      << "data: toymodel.csv\n"
      << "layout: two stacked panels, shared x\n"
      << "panel 1:\n"
      << "  x: column t\n"
      << "  y: column x_min\n"
      << "  ylabel: well edge x_min\n"
      << "panel 2:\n"
      << "  x: column t\n"
      << "  y: column V0\n"
      << "  ylabel: well depth V0\n"
      << "xlabel: t\n";
    write_script(dir, "toymodel.plot", s.str(), written);
  }

  if (written.empty())
    throw MissingArtifactError("emit_plots: no plottable artifacts");
  return written;
}

}  // namespace qflow
