#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "racegp/config.hpp"
#include "racegp/datagen.hpp"
#include "racegp/dynamics.hpp"
#include "racegp/error_model.hpp"
#include "racegp/errors.hpp"
#include "racegp/experiment.hpp"
#include "racegp/gp.hpp"
#include "racegp/kernel.hpp"
#include "racegp/metrics.hpp"
#include "racegp/report.hpp"
#include "racegp/track.hpp"

namespace py = pybind11;
using namespace racegp;

namespace {

// Samples as an (n, 16) array: x_k (7), u_k (2), x_next (7).
Eigen::MatrixXd samples_array(const Dataset& d) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(d.size()), 16);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& s = d.samples[i];
    const auto a = s.x_k.to_array(), b = s.x_next.to_array();
    const auto r = static_cast<Eigen::Index>(i);
    for (int j = 0; j < 7; ++j) {
      out(r, j) = a[j];
      out(r, 9 + j) = b[j];
    }
    out(r, 7) = s.u_k.a_long;
    out(r, 8) = s.u_k.delta_v;
  }
  return out;
}

py::dict record_dict(const ExperimentRecord& r) {
  py::dict d;
  d["id"] = r.config.id();
  d["track"] = r.config.track;
  d["scenario"] = r.config.scenario.flag();
  d["size"] = std::string(to_string(r.config.size));
  d["combo"] = r.config.combo;
  d["subset"] = r.config.subset;
  d["test"] = r.config.test;
  d["seed"] = r.config.seed;
  d["status"] = std::string(to_string(r.status));
  d["message"] = r.message;
  d["train_time_s"] = r.train_time_s;
  d["n_train"] = r.n_train;
  d["n_test"] = r.n_test;
  d["rmse_omega"] = r.rmse_omega;
  d["rmse_beta"] = r.rmse_beta;
  d["r2_omega"] = r.r2_omega;
  d["r2_beta"] = r.r2_beta;
  d["r2_mean"] = r.r2_mean;
  d["ev_omega"] = r.ev_omega;
  d["ev_beta"] = r.ev_beta;
  d["std_ratio"] = r.std_ratio;
  d["high_uncertainty"] = r.high_uncertainty;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "racegp native core";
  m.attr("__version__") = kToolVersion;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<VehicleState>(m, "VehicleState")
      .def(py::init<>())
      .def(py::init([](double x, double y, double delta, double v, double psi, double omega,
                       double beta) { return VehicleState{x, y, delta, v, psi, omega, beta}; }),
           py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("delta") = 0.0, py::arg("v") = 0.0,
           py::arg("psi") = 0.0, py::arg("omega") = 0.0, py::arg("beta") = 0.0)
      .def_readwrite("x", &VehicleState::x)
      .def_readwrite("y", &VehicleState::y)
      .def_readwrite("delta", &VehicleState::delta)
      .def_readwrite("v", &VehicleState::v)
      .def_readwrite("psi", &VehicleState::psi)
      .def_readwrite("omega", &VehicleState::omega)
      .def_readwrite("beta", &VehicleState::beta)
      .def("to_list", &VehicleState::to_array)
      .def("__eq__", [](const VehicleState& a, const VehicleState& b) { return a == b; })
      .def("__repr__", [](const VehicleState& s) {
        return "VehicleState(x=" + std::to_string(s.x) + ", y=" + std::to_string(s.y) +
               ", v=" + std::to_string(s.v) + ", omega=" + std::to_string(s.omega) +
               ", beta=" + std::to_string(s.beta) + ")";
      });

  py::class_<ControlInput>(m, "ControlInput")
      .def(py::init([](double a_long, double delta_v) { return ControlInput{a_long, delta_v}; }),
           py::arg("a_long") = 0.0, py::arg("delta_v") = 0.0)
      .def_readwrite("a_long", &ControlInput::a_long)
      .def_readwrite("delta_v", &ControlInput::delta_v);

  py::class_<VehicleParams>(m, "VehicleParams")
      .def(py::init<>())
      .def_readwrite("m", &VehicleParams::m)
      .def_readwrite("I_z", &VehicleParams::I_z)
      .def_readwrite("l_f", &VehicleParams::l_f)
      .def_readwrite("l_r", &VehicleParams::l_r)
      .def_readwrite("h_cog", &VehicleParams::h_cog)
      .def_readwrite("mu", &VehicleParams::mu)
      .def_readwrite("C_sf", &VehicleParams::C_sf)
      .def_readwrite("C_sr", &VehicleParams::C_sr)
      .def_readwrite("g", &VehicleParams::g)
      .def_readwrite("delta_max", &VehicleParams::delta_max)
      .def_readwrite("a_max", &VehicleParams::a_max)
      .def_readwrite("delta_v_max", &VehicleParams::delta_v_max)
      .def_readwrite("v_max", &VehicleParams::v_max)
      .def_readwrite("v_min_dyn", &VehicleParams::v_min_dyn)
      .def_property_readonly("wheelbase", &VehicleParams::wheelbase)
      .def("validate", &VehicleParams::validate);

  m.def(
      "integrate_step",
      [](const std::string& model, const VehicleState& s, const ControlInput& u,
         const VehicleParams& p, double dt, int substeps) {
        return integrate_step(model_kind_from_string(model), s, u, p, dt, substeps);
      },
      py::arg("model"), py::arg("state"), py::arg("input"), py::arg("params") = VehicleParams{},
      py::arg("dt") = kControlPeriod, py::arg("substeps") = kDefaultSubsteps,
      "One control period of the 'kinematic', 'dynamic' or 'ekin' model.");
  m.def("clamp_input", &clamp_input);

  // tracks
  py::class_<Track>(m, "Track")
      .def_readonly("name", &Track::name)
      .def_readonly("closed", &Track::closed)
      .def_property_readonly("waypoints", [](const Track& t) {
        Eigen::MatrixXd w(static_cast<Eigen::Index>(t.waypoints.size()), 4);
        for (std::size_t i = 0; i < t.waypoints.size(); ++i) {
          const auto& p = t.waypoints[i];
          w.row(static_cast<Eigen::Index>(i)) << p.x, p.y, p.w_left, p.w_right;
        }
        return w;
      });
  m.def("load_track", &load_track, py::arg("path"), py::arg("name") = "");

  py::class_<RefLine>(m, "RefLine")
      .def_readonly("length", &RefLine::length)
      .def_readonly("spacing", &RefLine::spacing)
      .def_readonly("closed", &RefLine::closed)
      .def("__len__", &RefLine::size)
      .def_property_readonly(
          "points",
          [](const RefLine& l) {
            Eigen::MatrixXd out(static_cast<Eigen::Index>(l.size()), 6);
            for (std::size_t i = 0; i < l.size(); ++i) {
              const auto& p = l.points[i];
              out.row(static_cast<Eigen::Index>(i)) << p.s, p.x, p.y, p.heading, p.kappa, p.v_ref;
            }
            return out;
          },
          "Columns s, x, y, heading, kappa, v_ref.");
  m.def(
      "build_refline",
      [](const Track& t, const std::string& kind, std::optional<std::filesystem::path> raceline,
         double spacing) {
        return build_refline(t, kind == "raceline" ? LineKind::raceline : LineKind::centerline,
                             raceline, spacing);
      },
      py::arg("track"), py::arg("kind") = "centerline", py::arg("raceline_path") = py::none(),
      py::arg("spacing") = kDefaultSpacing);
  m.def(
      "sectors",
      [](const RefLine& line) {
        py::list out;
        for (const auto& s : split_sectors(line)) {
          py::dict d;
          d["index"] = s.index;
          d["s_start"] = s.s_start;
          d["s_end"] = s.s_end;
          d["class"] = std::string(to_string(s.curvature_class));
          d["mean_abs_kappa"] = s.mean_abs_kappa;
          out.append(d);
        }
        return out;
      },
      py::arg("line"));

  // data
  py::class_<Dataset>(m, "Dataset")
      .def_readonly("track", &Dataset::track)
      .def_property_readonly("scenario", [](const Dataset& d) { return d.scenario.flag(); })
      .def("__len__", &Dataset::size)
      .def("to_array", &samples_array, "Rows: x_k (7), u_k (2), x_next (7).");

  py::class_<ErrorSample>(m, "ErrorSample")
      .def_readonly("features", &ErrorSample::features)
      .def_readonly("e_omega", &ErrorSample::e_omega)
      .def_readonly("e_beta", &ErrorSample::e_beta);

  m.def(
      "simulate",
      [](const RunConfig& cfg, const std::string& track, const std::string& scenario,
         std::uint64_t seed) {
        ScenarioSetup setup;
        setup.profile = cfg.profile;
        setup.spacing = cfg.spacing;
        if (auto rl = cfg.raceline_for(track); !rl.empty()) setup.raceline_path = rl;
        const TrainTest tt = collect_train_test(load_track(cfg.track_path(track), track),
                                                Scenario::parse(scenario), setup, cfg.vehicle,
                                                cfg.controller, seed);
        return py::make_tuple(tt.train, tt.test);
      },
      py::arg("config"), py::arg("track"), py::arg("scenario") = "ra-noncap",
      py::arg("seed") = 0, "Train and test laps of one scenario.");
  m.def("compute_errors", &compute_errors, py::arg("dataset"), py::arg("params") = VehicleParams{});
  m.def("feature_matrix", &feature_matrix);

  // GP
  m.def("study_combos", [] {
    const auto& c = study_combos();
    return std::vector<std::string>(c.begin(), c.end());
  });
  py::class_<KernelExpr>(m, "Kernel")
      .def_static("combo", &build_kernel_combo)
      .def("parameters", &KernelExpr::parameters)
      .def(
          "gram",
          [](const KernelExpr& k, const Eigen::MatrixXd& X, std::optional<Eigen::MatrixXd> X2) {
            return X2 ? gram(k, X, *X2) : gram(k, X);
          },
          py::arg("X"), py::arg("X2") = py::none())
      .def("__repr__", &KernelExpr::to_string);
  py::class_<GPModel>(m, "GPModel")
      .def_readonly("noise2", &GPModel::noise2)
      .def_readonly("jitter", &GPModel::jitter)
      .def_readonly("kernel", &GPModel::kernel)
      .def_property_readonly("log_marginal_likelihood", &log_marginal_likelihood);
  m.def("gp_fit", &gp_fit, py::arg("X"), py::arg("y"), py::arg("kernel"), py::arg("noise2"));
  m.def(
      "gp_predict",
      [](const GPModel& g, const Eigen::MatrixXd& Xs) {
        const Prediction p = gp_predict(g, Xs);
        return py::make_tuple(p.mean, p.var);
      },
      py::arg("model"), py::arg("Xs"), "Posterior mean and variance (noise included).");

  py::class_<ErrorGP>(m, "ErrorGP")
      .def_readonly("combo", &ErrorGP::combo)
      .def_readonly("train_time_s", &ErrorGP::train_time_s)
      .def_readonly("evaluations", &ErrorGP::evaluations)
      .def_readonly("gp_omega", &ErrorGP::gp_omega)
      .def_readonly("gp_beta", &ErrorGP::gp_beta);
  m.def(
      "fit_error_model",
      [](const std::vector<ErrorSample>& errs, const std::string& combo, const std::string& size,
         int budget, int restarts, std::uint64_t seed) {
        ErrorFitOptions o;
        o.budget = budget;
        o.restarts = restarts;
        o.seed = seed;
        py::gil_scoped_release release;
        return fit_error_model(errs, combo, size_fraction_from_string(size), o);
      },
      py::arg("errors"), py::arg("combo") = "RQ+LIN", py::arg("size") = "full",
      py::arg("budget") = 300, py::arg("restarts") = 5, py::arg("seed") = 0);
  m.def(
      "predict_errors",
      [](const ErrorGP& eg, const Eigen::MatrixXd& features) {
        const ErrorPrediction p = predict_errors(eg, features);
        py::dict d;
        d["mean_omega"] = p.mean_omega;
        d["var_omega"] = p.var_omega;
        d["mean_beta"] = p.mean_beta;
        d["var_beta"] = p.var_beta;
        return d;
      },
      py::arg("model"), py::arg("features"));
  m.def(
      "corrected_step",
      [](const VehicleState& s, const ControlInput& u, const VehicleParams& p, const ErrorGP& eg) {
        return corrected_step(s, u, p, eg);
      },
      py::arg("state"), py::arg("input"), py::arg("params"), py::arg("model"));
  m.def(
      "rollout",
      [](const VehicleState& x0, const std::vector<ControlInput>& inputs, const VehicleParams& p,
         const ErrorGP* eg) { return rollout(x0, inputs, p, eg); },
      py::arg("x0"), py::arg("inputs"), py::arg("params") = VehicleParams{},
      py::arg("model") = nullptr);
  m.def(
      "save_error_model",
      [](const ErrorGP& eg, const std::filesystem::path& path, std::uint64_t seed) {
        save_error_model(eg, path, Provenance{seed, "", kToolVersion});
      },
      py::arg("model"), py::arg("path"), py::arg("seed") = 0);
  m.def("load_error_model", &load_error_model);

  m.def("rmse", &rmse);
  m.def("r_squared", &r_squared);
  m.def("explained_variance", &explained_variance);

  // configuration and study
  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("vehicle", &RunConfig::vehicle)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("parallel", &RunConfig::parallel)
      .def_property(
          "gp_budget", [](const RunConfig& c) { return c.gp.budget; },
          [](RunConfig& c, int b) { c.gp.budget = b; })
      .def_property(
          "gp_restarts", [](const RunConfig& c) { return c.gp.restarts; },
          [](RunConfig& c, int r) { c.gp.restarts = r; })
      .def_property_readonly("tracks",
                             [](const RunConfig& c) {
                               std::vector<std::string> names;
                               for (const auto& [name, path] : c.tracks) names.push_back(name);
                               return names;
                             })
      .def("dump", &dump_run_config)
      .def("hash", &config_hash);
  m.def("load_config", &load_run_config, py::arg("path"));
  m.def("parse_config", &parse_run_config, py::arg("text"), py::arg("base_dir") = "");

  m.def(
      "run_matrix",
      [](const RunConfig& cfg, std::vector<std::string> tracks, std::vector<std::string> scenarios,
         std::vector<std::string> sizes, std::vector<std::string> combos,
         std::vector<std::string> subsets, std::vector<std::string> tests, int parallel) {
        MatrixSpec spec = cfg.matrix;
        if (!tracks.empty()) spec.tracks = std::move(tracks);
        if (!scenarios.empty()) spec.scenarios = std::move(scenarios);
        if (!sizes.empty()) spec.sizes = std::move(sizes);
        if (!combos.empty()) spec.combos = std::move(combos);
        if (!subsets.empty()) spec.subsets = std::move(subsets);
        if (!tests.empty()) spec.tests = std::move(tests);
        std::vector<ExperimentRecord> recs;
        {
          py::gil_scoped_release release;
          DatasetCache cache(cfg);
          recs = run_matrix(spec, cache, parallel > 0 ? parallel : cfg.parallel);
        }
        py::list out;
        for (const auto& r : recs) out.append(record_dict(r));
        return out;
      },
      py::arg("config"), py::arg("tracks") = std::vector<std::string>{},
      py::arg("scenarios") = std::vector<std::string>{},
      py::arg("sizes") = std::vector<std::string>{}, py::arg("combos") = std::vector<std::string>{},
      py::arg("subsets") = std::vector<std::string>{}, py::arg("tests") = std::vector<std::string>{},
      py::arg("parallel") = 0,
      "Expand and run an experiment matrix; empty lists keep the configured axes.");
}
