#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "orlat/branching.hpp"
#include "orlat/coupling.hpp"
#include "orlat/error.hpp"
#include "orlat/fgrid.hpp"
#include "orlat/lattice.hpp"
#include "orlat/meanfield.hpp"
#include "orlat/rng.hpp"
#include "orlat/rwalk.hpp"
#include "orlat/stats.hpp"
#include "orlat/weights.hpp"

namespace py = pybind11;
using namespace orlat;

namespace {

WeightSpec make_law(const std::vector<std::pair<double, double>>& atoms,
                    const std::vector<std::tuple<double, double, double>>& segments) {
  RawLaw raw;
  for (const auto& [v, p] : atoms) raw.atoms.push_back({v, p});
  for (const auto& [lo, hi, p] : segments) raw.segments.push_back({lo, hi, p});
  return validate(raw);
}

Vertex vertex_from_steps(const std::vector<std::uint32_t>& steps) { return Vertex::from_steps(steps); }

py::dict estimate_dict(const SurvivalEstimate& e) {
  py::dict d;
  d["survived"] = e.survived;
  d["died"] = e.died;
  d["censored"] = e.censored;
  d["point"] = e.point;
  d["ci_lo"] = e.ci_lo;
  d["ci_hi"] = e.ci_hi;
  return d;
}

}  // namespace

PYBIND11_MODULE(_orlat, m) {
  m.doc() = "Weighted contact process on the oriented lattice";

  py::register_exception<Error>(m, "OrlatError", PyExc_RuntimeError);

  py::class_<WeightSpec>(m, "WeightSpec")
      .def(py::init(&make_law), py::arg("atoms") = std::vector<std::pair<double, double>>{},
           py::arg("segments") = std::vector<std::tuple<double, double, double>>{})
      .def_static("constant", &WeightSpec::constant)
      .def_static("bernoulli", &WeightSpec::bernoulli)
      .def_static("uniform", &WeightSpec::uniform)
      .def_property_readonly("bound", &WeightSpec::bound)
      .def_property_readonly("mean", &WeightSpec::mean)
      .def_property_readonly("second_moment", &WeightSpec::second_moment)
      .def("expect", [](const WeightSpec& s, const std::function<double(double)>& f) { return expect(s, f); });

  py::class_<MeanFieldSolution>(m, "MeanFieldSolution")
      .def_readonly("lambda_", &MeanFieldSolution::lambda)
      .def_readonly("theta", &MeanFieldSolution::theta)
      .def_readonly("limit_survival", &MeanFieldSolution::limit_survival)
      .def_readonly("residual", &MeanFieldSolution::residual);

  m.def("critical_rate", &critical_rate);
  m.def("solve_theta", &solve_theta, py::arg("spec"), py::arg("lam"));
  m.def("survival_limit", &survival_limit, py::arg("spec"), py::arg("lam"));

  m.def(
      "branching_survival_d",
      [](const WeightSpec& spec, double lam, std::uint32_t d, int grid_points, double tol) {
        FGridOptions opt;
        opt.grid_points = grid_points;
        opt.tol = tol;
        return branching_survival_d(solve_fgrid(spec, lam, d, opt), spec);
      },
      py::arg("spec"), py::arg("lam"), py::arg("d"), py::arg("grid_points") = 129, py::arg("tol") = 1e-10);

  m.def(
      "estimate_branching_survival",
      [](const WeightSpec& spec, double lam, std::uint32_t d, std::uint64_t n_runs, std::uint64_t seed,
         std::uint64_t horizon, std::uint64_t pop_cap, double confidence) {
        BranchingParams p;
        p.lambda = lam;
        p.d = d;
        p.horizon = horizon;
        p.pop_cap = pop_cap;
        return estimate_dict(estimate_branching_survival(spec, p, n_runs, confidence, seed));
      },
      py::arg("spec"), py::arg("lam"), py::arg("d"), py::arg("n_runs"), py::arg("seed") = 1,
      py::arg("horizon") = 200, py::arg("pop_cap") = 100000, py::arg("confidence") = 0.99);

  m.def(
      "estimate_survival",
      [](const std::string& kind, const WeightSpec& spec, double lam, std::uint32_t d, std::uint64_t n_runs,
         std::uint64_t seed, std::uint64_t pop_cap, double confidence) {
        LatticeExperiment e;
        if (kind == "sir") {
          e.kind = ProcessKind::Sir;
        } else if (kind == "contact") {
          e.kind = ProcessKind::Contact;
        } else {
          throw Error(ErrorCode::BadArguments, "kind must be 'sir' or 'contact'");
        }
        e.lambda = lam;
        e.d = d;
        e.budget.pop_cap = pop_cap;
        return estimate_dict(estimate_survival(spec, e, n_runs, confidence, seed));
      },
      py::arg("kind"), py::arg("spec"), py::arg("lam"), py::arg("d"), py::arg("n_runs"), py::arg("seed") = 1,
      py::arg("pop_cap") = 50000, py::arg("confidence") = 0.99);

  m.def(
      "collision_prob",
      [](std::uint32_t d, const std::vector<std::uint32_t>& x, const std::vector<std::uint32_t>& y,
         std::uint64_t horizon, std::uint64_t n_runs, std::uint64_t seed) {
        const auto est = collision_prob(d, vertex_from_steps(x), vertex_from_steps(y), horizon, n_runs, 0.99, seed);
        return py::make_tuple(est.point, est.ci_lo, est.ci_hi);
      },
      py::arg("d"), py::arg("x"), py::arg("y"), py::arg("horizon") = 1000, py::arg("n_runs") = 10000,
      py::arg("seed") = 1);

  m.def(
      "coupling_success",
      [](const WeightSpec& spec, double lam, std::uint32_t d, double sigma, std::uint64_t n_runs, std::uint64_t seed) {
        const auto est = estimate_coupling(spec, lam, d, sigma, n_runs, 0.99, seed);
        return py::make_tuple(est.p_success, est.ci_lo, est.ci_hi, est.target_steps);
      },
      py::arg("spec"), py::arg("lam"), py::arg("d"), py::arg("sigma"), py::arg("n_runs"), py::arg("seed") = 1);

  m.def("wilson_interval", &wilson_interval, py::arg("successes"), py::arg("trials"), py::arg("confidence"));
  m.def("philox2x64", [](std::uint64_t c0, std::uint64_t c1, std::uint64_t key) {
    const auto out = philox2x64({c0, c1}, key);
    return py::make_tuple(out[0], out[1]);
  });
}
