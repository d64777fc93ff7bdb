// Python bindings for the main operations: kernel evaluation, Gaussian field
// sampling and moments, the remainder expansion, partition estimates, the
// mean-field free energy, and the experiment runner.
#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "vortexgas/common.hpp"
#include "vortexgas/expansion.hpp"
#include "vortexgas/experiments.hpp"
#include "vortexgas/field.hpp"
#include "vortexgas/gibbs.hpp"
#include "vortexgas/io.hpp"
#include "vortexgas/kernels.hpp"
#include "vortexgas/meanfield.hpp"

namespace py = pybind11;
using namespace vortexgas;

namespace {

kernels::KernelSpec table_spec(double mass) { return kernels::KernelSpec::for_tables(mass); }

py::dict estimate_dict(const Estimate& e) {
    py::dict d;
    d["value"] = e.value;
    d["stderr"] = e.stderr_;
    d["n_samples"] = e.n_samples;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Point-vortex Gibbs ensemble laboratory (C++ core)";

    m.def("version", []() { return io::version_string(); },
          "Version string of the underlying library.");

    py::register_exception<Error>(m, "VortexgasError");

    py::class_<kernels::KernelTable>(m, "KernelTable",
                                     "Periodised interaction kernel on a torus grid.")
        .def(py::init([](const std::string& kind, double mass) {
                 return kernels::KernelTable::build(kernels::kind_from_name(kind),
                                                    table_spec(mass));
             }),
             py::arg("kind"), py::arg("mass"),
             "Build a kernel table; kind is 'green', 'yukawa' or 'smooth'.")
        .def("eval",
             [](const kernels::KernelTable& t, double x, double y) {
                 return t.eval({x, y});
             },
             py::arg("x"), py::arg("y"), "Evaluate at displacement (x, y).")
        .def("node",
             [](const kernels::KernelTable& t, int i, int j) { return t.node(i, j); },
             py::arg("i"), py::arg("j"), "Raw truncated spectral sum at grid node (i, j).")
        .def("grid_mean", &kernels::KernelTable::grid_mean);

    m.def("smooth_diag",
          [](double mass) { return kernels::smooth_diag(table_spec(mass)); }, py::arg("mass"),
          "Diagonal value of the smooth kernel part.");

    m.def("field_norm_sq",
          [](double mass, std::uint64_t seed) {
              return field::sample_field(kernels::KernelSpec::for_field(mass), seed)
                  .l2_sq_parseval();
          },
          py::arg("mass"), py::arg("seed"),
          "Squared L2 norm of one Gaussian field sample (deterministic in seed).");

    m.def("analytic_exp_moment",
          [](double alpha, double mass) {
              return field::analytic_exp_moment(alpha, kernels::KernelSpec::for_field(mass));
          },
          py::arg("alpha"), py::arg("mass"),
          "Closed form of E[exp(-alpha ||F||^2)] for the truncated field.");

    m.def("exp_moment_mc",
          [](double alpha, double mass, long long n_samples, std::uint64_t seed) {
              return estimate_dict(field::exp_moment_mc(
                  alpha, kernels::KernelSpec::for_field(mass), n_samples, seed));
          },
          py::arg("alpha"), py::arg("mass"), py::arg("n_samples"), py::arg("seed"),
          "Monte Carlo estimate of E[exp(-alpha ||F||^2)].");

    m.def("remainder_expand",
          [](const std::vector<std::complex<double>>& e_values, double e_weight, int k,
             int order) {
              const auto rep = expansion::remainder_expand(e_values, e_weight, k, order);
              py::dict d;
              d["direct"] = rep.direct;
              d["expanded"] = rep.expanded;
              d["identity_error"] = rep.identity_error;
              return d;
          },
          py::arg("e_values"), py::arg("e_weight"), py::arg("k"), py::arg("order"),
          "Direct and expanded forms of the product remainder, with their difference.");

    m.def("partition_estimate",
          [](double beta, int n_vortices, long long n_samples, std::uint64_t seed) {
              gibbs::EnsembleParams p;
              p.beta = beta;
              p.n_vortices = n_vortices;
              const auto green = kernels::KernelTable::build(kernels::Kind::green,
                                                             table_spec(1.0));
              return estimate_dict(gibbs::partition_estimate(p, green, n_samples, seed));
          },
          py::arg("beta"), py::arg("n_vortices"), py::arg("n_samples"), py::arg("seed"),
          "Monte Carlo estimate of the neutral-ensemble partition function.");

    m.def("free_energy",
          [](const std::vector<std::vector<double>>& plus,
             const std::vector<std::vector<double>>& minus, double beta, double mass) {
              meanfield::DensityPair d;
              d.grid_n = static_cast<int>(plus.size());
              for (const auto& row : plus)
                  d.plus.insert(d.plus.end(), row.begin(), row.end());
              for (const auto& row : minus)
                  d.minus.insert(d.minus.end(), row.begin(), row.end());
              return meanfield::free_energy(d, beta, table_spec(mass));
          },
          py::arg("plus"), py::arg("minus"), py::arg("beta"), py::arg("mass") = 1.0,
          "Mean-field free energy of a two-species density pair on a square grid.");

    m.def("run_experiment",
          [](const std::string& name, const std::map<std::string, std::string>& params,
             const std::string& out_dir, std::uint64_t seed) {
              experiments::ExperimentConfig cfg;
              cfg.experiment = name;
              cfg.params = params;
              cfg.out_dir = out_dir;
              cfg.seed = seed;
              const auto result = experiments::run(cfg);
              py::list checks;
              for (const auto& chk : result.manifest.checks) {
                  py::dict d;
                  d["check"] = chk.check;
                  d["pass"] = chk.pass;
                  d["margin"] = chk.margin;
                  checks.append(d);
              }
              py::dict out;
              out["experiment"] = result.manifest.experiment;
              out["all_passed"] = result.all_passed;
              out["noise_dominated"] = result.noise_dominated;
              out["checks"] = checks;
              out["outputs"] = result.manifest.outputs;
              return out;
          },
          py::arg("name"), py::arg("params") = std::map<std::string, std::string>{},
          py::arg("out_dir") = "out", py::arg("seed") = 1,
          "Run one named experiment and return its verdicts.");
}
