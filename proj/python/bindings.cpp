#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <iostream>

#include "fracflow/app.hpp"
#include "fracflow/audit.hpp"
#include "fracflow/errors.hpp"
#include "fracflow/parallel.hpp"
#include "fracflow/validation.hpp"

namespace py = pybind11;
using namespace fracflow;

namespace {

using Kernel = std::shared_ptr<KernelSpec>;

Kernel hold(KernelSpec k) { return std::make_shared<KernelSpec>(std::move(k)); }

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Row-major (ny, nx) view of the grid values.
Array to_array(const LevelSetField& f) {
  const Grid& g = f.grid();
  Array a({g.ny, g.nx});
  std::copy(f.values().begin(), f.values().end(), a.mutable_data());
  return a;
}

LevelSetField from_array(const Grid& g, const Array& a, py::object outside) {
  if (a.ndim() != 2 || a.shape(0) != g.ny || a.shape(1) != g.nx)
    throw DataError("field array must have shape (ny, nx) = (" + std::to_string(g.ny) + ", " + std::to_string(g.nx) + ")");
  std::vector<double> v(a.data(), a.data() + a.size());
  if (outside.is_none()) return LevelSetField(g, std::move(v));
  return LevelSetField(g, std::move(v), outside.cast<double>());
}

Array polyline_array(const Polyline& p) {
  Array a({static_cast<py::ssize_t>(p.size()), py::ssize_t{2}});
  double* d = a.mutable_data();
  for (std::size_t k = 0; k < p.size(); ++k) d[2 * k] = p[k].x, d[2 * k + 1] = p[k].y;
  return a;
}

py::list contour_list(const std::vector<Polyline>& c) {
  py::list out;
  for (const Polyline& p : c) out.append(polyline_array(p));
  return out;
}

py::dict eval_dict(const CurvatureEval& e) {
  py::dict d;
  d["kappa_upper"] = e.kappa_upper;
  d["kappa_lower"] = e.kappa_lower;
  d["near"] = e.near_part;
  d["far_upper"] = e.far_upper;
  d["far_lower"] = e.far_lower;
  d["gradient"] = py::make_tuple(e.gradient.x, e.gradient.y);
  d["degenerate"] = e.degenerate;
  return d;
}

int run_command(const std::string& command, const std::string& config_path) {
  const RunConfig cfg = load_config(config_path);
  if (command == "simulate") return cmd_simulate(cfg, std::cerr);
  if (command == "curvature") return cmd_curvature(cfg, std::cerr);
  if (command == "validate") return cmd_validate(cfg, std::cerr);
  if (command == "study") return cmd_study(cfg, std::cerr);
  throw ConfigError("unknown command '" + command + "' (simulate | curvature | validate | study)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fractional mean curvature of level sets and the level-set flow it drives";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<AccuracyError>(m, "AccuracyError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  m.def("set_thread_count", &set_thread_count, py::arg("n"));
  m.def("thread_count", &thread_count);

  py::class_<KernelSpec, Kernel>(m, "Kernel")
      .def_static(
          "power_law",
          [](double alpha, int dim, std::vector<double> g, double prefactor) {
            return hold(KernelSpec::power_law(alpha, dim, Anisotropy(std::move(g)), prefactor));
          },
          py::arg("alpha"), py::arg("dim") = 2, py::arg("anisotropy") = std::vector<double>{}, py::arg("prefactor") = 1.0,
          "density prefactor * g(z/|z|) / |z|^(N + alpha); g sampled at 2 pi k / M (empty = 1)")
      .def_static("gaussian", [](double a, double s) { return hold(KernelSpec::bounded(RadialProfile::gaussian(a, s))); },
                  py::arg("amplitude"), py::arg("sigma"))
      .def_static("annulus",
                  [](double lo, double hi, double v) { return hold(KernelSpec::bounded(RadialProfile::annulus(lo, hi, v))); },
                  py::arg("inner"), py::arg("outer"), py::arg("value"))
      .def_static("profile",
                  [](std::vector<double> r, std::vector<double> v) {
                    return hold(KernelSpec::bounded(RadialProfile::sampled(std::move(r), std::move(v))));
                  },
                  py::arg("radius"), py::arg("values"))
      .def_static("dislocation", [](double eps) { return hold(KernelSpec::rescaled_dislocation(eps)); }, py::arg("epsilon"))
      .def("density", [](const KernelSpec& k, double x, double y) { return k.density({x, y}); })
      .def("radial_mass", &KernelSpec::radial_mass, py::arg("theta"), py::arg("a"), py::arg("b"))
      .def("tail_mass", &KernelSpec::tail_mass, py::arg("delta"))
      .def_property_readonly("dimension", &KernelSpec::dimension)
      .def_property_readonly("alpha", &KernelSpec::alpha)
      .def("__repr__", &KernelSpec::describe);

  m.def("lens_mass", [](const KernelSpec& k, double ex, double ey) { return lens_mass(k, {ex, ey}); }, py::arg("kernel"),
        py::arg("ex") = 1.0, py::arg("ey") = 0.0);
  m.def(
      "audit",
      [](const KernelSpec& k, double threshold) {
        const AdmissibilityReport r = admissibility_audit(k, 16, threshold);
        py::dict d;
        d["pass"] = r.pass;
        d["worst_plateau_ratio"] = r.worst_plateau_ratio;
        d["tail"] = r.tail.value;
        return d;
      },
      py::arg("kernel"), py::arg("threshold") = 1e-3);

  py::class_<Grid>(m, "Grid")
      .def_static("centered", &Grid::centered, py::arg("extent"), py::arg("h"))
      .def_readonly("nx", &Grid::nx)
      .def_readonly("ny", &Grid::ny)
      .def_readonly("h", &Grid::h)
      .def_property_readonly("origin", [](const Grid& g) { return py::make_tuple(g.origin.x, g.origin.y); })
      .def("point", [](const Grid& g, int i, int j) { return py::make_tuple(g.point(i, j).x, g.point(i, j).y); });

  py::class_<LevelSetField>(m, "Field")
      .def(py::init(&from_array), py::arg("grid"), py::arg("values"), py::arg("outside") = py::none())
      .def_static("disk",
                  [](const Grid& g, double cx, double cy, double r) { return make_signed_distance(Shape::disk({cx, cy}, r), g); },
                  py::arg("grid"), py::arg("cx"), py::arg("cy"), py::arg("radius"))
      .def_static("ellipse",
                  [](const Grid& g, double cx, double cy, double a, double b, double angle) {
                    return make_signed_distance(Shape::ellipse({cx, cy}, a, b, angle), g);
                  },
                  py::arg("grid"), py::arg("cx"), py::arg("cy"), py::arg("a"), py::arg("b"), py::arg("angle") = 0.0)
      .def_static("affine", [](const Grid& g, double px, double py_, double c) { return LevelSetField::affine(g, {px, py_}, c); },
                  py::arg("grid"), py::arg("px"), py::arg("py"), py::arg("c"))
      .def_property_readonly("grid", &LevelSetField::grid)
      .def_property_readonly("values", &to_array)
      .def_property_readonly("outside", &LevelSetField::outside_value)
      .def("area", &enclosed_area)
      .def("contour", [](const LevelSetField& f) { return contour_list(extract_contour(f)); });

  m.def(
      "kappa_at",
      [](const LevelSetField& f, int i, int j, Kernel k, double delta) { return eval_dict(kappa_at(f, i, j, k, delta)); },
      py::arg("field"), py::arg("i"), py::arg("j"), py::arg("kernel"), py::arg("delta"));
  m.def(
      "curvature_band",
      [](const LevelSetField& f, Kernel k, double delta, double band) {
        const CurvatureEvaluator ev(f.grid(), k, delta);
        const FieldContext ctx(f);
        const Grid& g = f.grid();
        std::vector<std::size_t> nodes;
        for (std::size_t q = 0; q < g.size(); ++q)
          if (std::fabs(f[q]) <= band) nodes.push_back(q);
        std::vector<CurvatureEval> out(nodes.size());
        {
          py::gil_scoped_release release;
          parallel_for(nodes.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t n = b; n < e; ++n) out[n] = ev.evaluate(ctx, g.col(nodes[n]), g.row(nodes[n]));
          });
        }
        Array ij({static_cast<py::ssize_t>(nodes.size()), py::ssize_t{2}});
        Array kap({static_cast<py::ssize_t>(nodes.size()), py::ssize_t{2}});
        for (std::size_t n = 0; n < nodes.size(); ++n) {
          ij.mutable_data()[2 * n] = g.col(nodes[n]);
          ij.mutable_data()[2 * n + 1] = g.row(nodes[n]);
          kap.mutable_data()[2 * n] = out[n].kappa_upper;
          kap.mutable_data()[2 * n + 1] = out[n].kappa_lower;
        }
        return py::make_tuple(ij, kap);
      },
      py::arg("field"), py::arg("kernel"), py::arg("delta"), py::arg("band"),
      "(nodes (n, 2) as i, j; kappa (n, 2) as upper, lower) at every node with |u| <= band");

  m.def(
      "simulate",
      [](const LevelSetField& u0, Kernel k, double t_end, double snapshot_every, double c1, double mobility,
         std::string far_field, bool keep_fields) {
        FlowConfig cfg;
        cfg.kernel = k;
        cfg.t_end = t_end;
        cfg.snapshot_every = snapshot_every;
        cfg.c1 = c1;
        cfg.mobility = mobility;
        cfg.keep_fields = keep_fields;
        if (far_field == "direct") cfg.far_field_mode = FarFieldMode::Direct;
        else if (far_field != "transform") throw ConfigError("far_field must be transform or direct");
        RunResult r;
        {
          py::gil_scoped_release release;
          r = FlowSolver(u0.grid(), cfg).run(u0);
        }
        py::list snaps;
        for (const FrontSnapshot& s : r.snapshots) {
          py::dict d;
          d["t"] = s.t;
          d["area"] = s.area;
          d["mean_radius"] = s.radii.mean_radius;
          d["contour"] = contour_list(s.contour);
          if (s.field) d["field"] = to_array(*s.field);
          snaps.append(d);
        }
        py::dict out;
        out["snapshots"] = snaps;
        out["extinct"] = r.extinct;
        out["aborted"] = r.aborted;
        out["message"] = r.message;
        out["steps"] = r.final_state.step_count;
        out["final"] = r.final_state.field;
        return out;
      },
      py::arg("u0"), py::arg("kernel"), py::arg("t_end"), py::arg("snapshot_every") = 0.0, py::arg("c1") = 0.0,
      py::arg("mobility") = 1.0, py::arg("far_field") = "transform", py::arg("keep_fields") = false);

  m.def("radial_ball_oracle", &radial_ball_oracle, py::arg("r"), py::arg("kernel"));
  m.def("monte_carlo_ball_curvature", &monte_carlo_ball_curvature, py::arg("r"), py::arg("kernel"),
        py::arg("samples") = 1000000, py::arg("seed") = 1);
  m.def(
      "ball_ode_trajectory",
      [](double r0, const KernelSpec& k, double c1, double mu, double t_end) {
        const BallTrajectory tr = ball_ode_trajectory(r0, k, c1, mu, t_end);
        py::dict d;
        d["t"] = tr.t;
        d["r"] = tr.r;
        d["extinct"] = tr.extinct;
        d["extinction_time"] = tr.extinction_time;
        return d;
      },
      py::arg("r0"), py::arg("kernel"), py::arg("c1") = 0.0, py::arg("mobility") = 1.0, py::arg("t_end") = 1.0);

  m.def("run", &run_command, py::arg("command"), py::arg("config_path"),
        "runs a CLI subcommand on an INI file and returns its exit code");
  m.def("config_help", &config_help);
}
