#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qflow/scenario.hpp"

namespace py = pybind11;
using namespace qflow;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

PhysicalConstants constants_from(double hbar, double mass) {
  PhysicalConstants c{hbar, mass};
  validate(c);
  return c;
}

}  // namespace

PYBIND11_MODULE(_qflow, m) {
  m.doc() = "analytic matter-wave models and Bohmian trajectory analysis";
  m.attr("__version__") = toolkit_version();

  py::register_exception<NodeError>(m, "NodeError");
  py::register_exception<DomainError>(m, "DomainError");
  py::register_exception<ValidationError>(m, "ValidationError");
  py::register_exception<ParseError>(m, "ParseError");

  // ModelSpec is a variant over these; each alternative is an opaque handle
  // and any of them is accepted where a model is expected.
  py::class_<GaussianSpec>(m, "GaussianModel");
  py::class_<SuperpositionSpec>(m, "SuperpositionModel");
  py::class_<TalbotSpec>(m, "TalbotModel");
  py::class_<BoxSpec>(m, "BoxModel");
  py::class_<HarmonicSpec>(m, "HarmonicModel");
  py::class_<PlaneWaveSpec>(m, "PlaneWaveModel");

  m.def(
      "gaussian_packet",
      [](double x0, double v, double sigma0, Complex weight) {
        return ModelSpec(GaussianSpec{x0, v, sigma0, weight});
      },
      py::arg("x0") = 0.0, py::arg("v") = 0.0, py::arg("sigma0") = 1.0,
      py::arg("weight") = Complex(1.0, 0.0));
  m.def("superposition",
        [](const std::vector<std::tuple<double, double, double, Complex>>&
               components) {
          SuperpositionSpec s;
          for (const auto& [x0, v, sigma0, w] : components)
            s.components.push_back({x0, v, sigma0, w});
          return ModelSpec(s);
        });
  m.def(
      "nslit",
      [](int n, double d, double sigma0) {
        return ModelSpec(make_nslit(n, d, sigma0));
      },
      py::arg("n_slits"), py::arg("d"), py::arg("sigma0"));
  m.def(
      "talbot",
      [](double d, double sigma0, int nmax) {
        return ModelSpec(make_talbot(d, sigma0, nmax));
      },
      py::arg("d"), py::arg("sigma0"), py::arg("nmax") = -1);
  m.def(
      "box_gaussian",
      [](double d, double sigma0, int nmax) {
        return ModelSpec(make_box_gaussian(d, sigma0, nmax));
      },
      py::arg("d"), py::arg("sigma0"), py::arg("nmax") = -1);
  m.def(
      "box_explicit",
      [](double L, std::vector<Complex> coefficients) {
        return ModelSpec(make_box_explicit(L, std::move(coefficients)));
      },
      py::arg("L"), py::arg("coefficients"));
  m.def(
      "square_wave_box",
      [](double L, double w, int n_modes) {
        const auto c = square_wave_coefficients(L, w, n_modes);
        std::vector<Complex> cc(c.begin(), c.end());
        return ModelSpec(make_box_explicit(L, std::move(cc)));
      },
      py::arg("L"), py::arg("w"), py::arg("n_modes"));
  m.def(
      "harmonic",
      [](double omega, std::vector<std::pair<int, Complex>> levels) {
        return ModelSpec(make_harmonic(omega, std::move(levels)));
      },
      py::arg("omega"), py::arg("levels"));
  m.def(
      "plane_wave", [](double p) { return ModelSpec(PlaneWaveSpec{p}); },
      py::arg("p"));

  m.def(
      "eval_model",
      [](const ModelSpec& model, double x, double t, double hbar, double mass) {
        const auto w = eval_model(model, constants_from(hbar, mass), x, t);
        return py::make_tuple(w.psi, w.dpsi, w.d2psi);
      },
      py::arg("model"), py::arg("x"), py::arg("t"), py::arg("hbar") = 1.0,
      py::arg("mass") = 1.0);
  m.def(
      "density",
      [](const ModelSpec& model, py::array_t<double> xs, double t, double hbar,
         double mass) {
        const auto c = constants_from(hbar, mass);
        auto r = xs.unchecked<1>();
        py::array_t<double> out(xs.size());
        auto w = out.mutable_unchecked<1>();
        for (py::ssize_t i = 0; i < r.shape(0); ++i)
          w(i) = std::norm(eval_model(model, c, r(i), t).psi);
        return out;
      },
      py::arg("model"), py::arg("x"), py::arg("t"), py::arg("hbar") = 1.0,
      py::arg("mass") = 1.0);
  m.def(
      "velocity",
      [](const ModelSpec& model, py::array_t<double> xs, double t, double hbar,
         double mass) {
        const auto c = constants_from(hbar, mass);
        auto r = xs.unchecked<1>();
        py::array_t<double> out(xs.size());
        auto w = out.mutable_unchecked<1>();
        for (py::ssize_t i = 0; i < r.shape(0); ++i)
          w(i) = velocity_at(model, r(i), t, c);
        return out;
      },
      py::arg("model"), py::arg("x"), py::arg("t"), py::arg("hbar") = 1.0,
      py::arg("mass") = 1.0);
  m.def(
      "hydro_fields",
      [](const ModelSpec& model, double x, double t, double hbar, double mass) {
        const auto c = constants_from(hbar, mass);
        const auto h = hydro_fields(eval_model(model, c, x, t), c);
        py::dict out;
        out["rho"] = h.rho;
        out["S"] = h.S;
        out["v"] = h.v;
        out["J"] = h.J;
        out["Q"] = h.Q;
        return out;
      },
      py::arg("model"), py::arg("x"), py::arg("t"), py::arg("hbar") = 1.0,
      py::arg("mass") = 1.0);

  m.def(
      "spreading_ratio",
      [](double sigma0, double t, double hbar, double mass) {
        return spreading_ratio(sigma0, t, constants_from(hbar, mass));
      },
      py::arg("sigma0"), py::arg("t"), py::arg("hbar") = 1.0,
      py::arg("mass") = 1.0);
  m.def(
      "critical_speed",
      [](double d, double sigma0, double hbar, double mass) {
        const auto cs = critical_speed(d, sigma0, constants_from(hbar, mass));
        return py::make_tuple(cs.v, cs.v_over_vs);
      },
      py::arg("d"), py::arg("sigma0"), py::arg("hbar") = 1.0,
      py::arg("mass") = 1.0);
  m.def(
      "talbot_time",
      [](double d, double hbar, double mass) {
        return talbot_time(d, constants_from(hbar, mass));
      },
      py::arg("d"), py::arg("hbar") = 1.0, py::arg("mass") = 1.0);
  m.def(
      "box_recurrence_time",
      [](double d, double hbar, double mass) {
        return box_recurrence_time(d, constants_from(hbar, mass));
      },
      py::arg("d"), py::arg("hbar") = 1.0, py::arg("mass") = 1.0);

  m.def(
      "run_ensemble",
      [](const ModelSpec& model, int n_traj, const std::string& sampling,
         std::pair<double, double> support, std::uint64_t seed,
         std::vector<double> save_times, double rtol, double atol,
         double hbar, double mass) {
        EnsembleSpec spec;
        spec.n_traj = n_traj;
        if (sampling == "density_weighted")
          spec.sampling = Sampling::DensityWeighted;
        else if (sampling == "uniform_support")
          spec.sampling = Sampling::UniformSupport;
        else
          throw ValidationError("sampling must be density_weighted or "
                                "uniform_support");
        spec.support_min = support.first;
        spec.support_max = support.second;
        spec.seed = seed;
        IntegratorConfig cfg;
        cfg.rtol = rtol;
        cfg.atol = atol;
        cfg.save_times = std::move(save_times);
        const auto ens =
            run_ensemble(model, spec, cfg, constants_from(hbar, mass));

        py::array_t<double> paths({static_cast<py::ssize_t>(ens.paths.size()),
                                   static_cast<py::ssize_t>(ens.times.size())});
        auto w = paths.mutable_unchecked<2>();
        for (std::size_t i = 0; i < ens.paths.size(); ++i)
          for (std::size_t j = 0; j < ens.times.size(); ++j)
            w(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) =
                ens.paths[i][j];
        std::vector<bool> aborted(ens.paths.size());
        for (std::size_t i = 0; i < ens.paths.size(); ++i)
          aborted[i] = ens.status[i] == PathStatus::NodeAbort;
        return py::make_tuple(to_array(ens.times), paths, aborted);
      },
      py::arg("model"), py::arg("n_traj"), py::arg("sampling"),
      py::arg("support"), py::arg("seed"), py::arg("save_times"),
      py::arg("rtol") = 1e-8, py::arg("atol") = 1e-10, py::arg("hbar") = 1.0,
      py::arg("mass") = 1.0);

  m.def(
      "density_carpet",
      [](const ModelSpec& model, std::pair<double, double> x_range, int nx,
         std::pair<double, double> t_range, int nt, bool per_row_max,
         double hbar, double mass) {
        const GridSpec grid{x_range.first, x_range.second, nx, t_range.first,
                            t_range.second, nt};
        const auto field = density_carpet(
            model, grid, per_row_max ? CarpetNorm::PerRowMax : CarpetNorm::Raw,
            constants_from(hbar, mass));
        py::array_t<double> values({static_cast<py::ssize_t>(nt),
                                    static_cast<py::ssize_t>(nx)});
        std::copy(field.values.begin(), field.values.end(),
                  values.mutable_data());
        return values;
      },
      py::arg("model"), py::arg("x_range"), py::arg("nx"), py::arg("t_range"),
      py::arg("nt"), py::arg("per_row_max") = false, py::arg("hbar") = 1.0,
      py::arg("mass") = 1.0);

  m.def(
      "momentum_ladder",
      [](const ModelSpec& model, py::array_t<double> xs, double t_far,
         double d, double skip_floor, double hbar, double mass) {
        auto r = xs.unchecked<1>();
        std::vector<double> grid(r.shape(0));
        for (py::ssize_t i = 0; i < r.shape(0); ++i) grid[i] = r(i);
        const auto ladder = momentum_ladder(
            model, grid, t_far, d, constants_from(hbar, mass), skip_floor);
        py::array_t<double> p(static_cast<py::ssize_t>(ladder.size()));
        auto w = p.mutable_unchecked<1>();
        for (std::size_t i = 0; i < ladder.size(); ++i)
          w(static_cast<py::ssize_t>(i)) = ladder[i].p_normalized;
        return py::make_tuple(p, plateau_fraction(ladder));
      },
      py::arg("model"), py::arg("x"), py::arg("t_far"), py::arg("d"),
      py::arg("skip_floor") = 1e-6, py::arg("hbar") = 1.0,
      py::arg("mass") = 1.0);
  m.def(
      "ladder_far_time",
      [](int n_slits, double d, double hbar, double mass) {
        return ladder_far_time(n_slits, d, constants_from(hbar, mass));
      },
      py::arg("n_slits"), py::arg("d"), py::arg("hbar") = 1.0,
      py::arg("mass") = 1.0);

  m.def(
      "density_length_series",
      [](const ModelSpec& model, std::vector<int> K_values, double t, int nx,
         double hbar, double mass) {
        const auto* box = std::get_if<BoxSpec>(&model);
        if (!box || box->mode != BoxSpec::Mode::ExplicitCoefficients)
          throw DomainError("density_length_series needs an explicit box state");
        const auto s = density_length_series(*box, K_values, t, nx,
                                             constants_from(hbar, mass));
        py::array_t<double> K(static_cast<py::ssize_t>(s.K.size()));
        auto kk = K.mutable_unchecked<1>();
        for (std::size_t i = 0; i < s.K.size(); ++i)
          kk(static_cast<py::ssize_t>(i)) = s.K[i];
        return py::make_tuple(K, to_array(s.L));
      },
      py::arg("model"), py::arg("K_values"), py::arg("t"), py::arg("nx"),
      py::arg("hbar") = 1.0, py::arg("mass") = 1.0);
  m.def(
      "fractal_dimension",
      [](std::vector<int> K, std::vector<double> L) {
        ScalingSeries s;
        s.K = std::move(K);
        s.L = std::move(L);
        s.converged.assign(s.K.size(), true);
        const auto est = fractal_dimension(s);
        py::dict out;
        out["D_f"] = est.D_f;
        out["slope_stderr"] = est.slope_stderr;
        out["r_squared"] = est.r_squared;
        return out;
      },
      py::arg("K"), py::arg("L"));

  m.def(
      "well_geometry",
      [](double p, double sigma0, double x0, double t, double hbar,
         double mass) {
        ToyParams params{p, sigma0, x0, constants_from(hbar, mass)};
        const auto g = well_geometry(params, t);
        return py::make_tuple(g.x_min, g.V0);
      },
      py::arg("p"), py::arg("sigma0"), py::arg("x0"), py::arg("t"),
      py::arg("hbar") = 1.0, py::arg("mass") = 1.0);

  m.def("preset_names", &preset_names);
  m.def(
      "preset_config",
      [](const std::string& name) { return print_config(preset_config(name)); },
      py::arg("name"));
  m.def(
      "validate_config",
      [](const std::string& text) { return print_config(parse_config(text)); },
      py::arg("text"));
  m.def(
      "run_scenario",
      [](const std::string& source, const std::string& out_dir,
         long long seed) {
        ScenarioConfig cfg;
        const auto names = preset_names();
        if (std::find(names.begin(), names.end(), source) != names.end())
          cfg = preset_config(source);
        else
          cfg = parse_config(source);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed >= 0) cfg.ensemble.seed = static_cast<std::uint64_t>(seed);
        const auto manifest = run_manifest(cfg);
        emit_plots(manifest);
        py::dict out;
        out["scenario"] = manifest.scenario;
        out["all_passed"] = manifest.all_passed;
        out["output_dir"] = manifest.output_dir;
        out["node_abort_fraction"] = manifest.node_abort_fraction;
        py::list checks;
        for (const auto& chk : manifest.checks) {
          py::dict c;
          c["name"] = chk.name;
          c["passed"] = chk.passed;
          c["value"] = chk.value;
          c["threshold"] = chk.threshold;
          checks.append(c);
        }
        out["checks"] = checks;
        py::list artifacts;
        for (const auto& a : manifest.artifacts) artifacts.append(a.file);
        out["artifacts"] = artifacts;
        return out;
      },
      py::arg("source"), py::arg("out_dir") = std::string(),
      py::arg("seed") = -1);
}
