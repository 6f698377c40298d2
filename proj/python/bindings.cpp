#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "optotherm/dynamics.hpp"
#include "optotherm/errors.hpp"
#include "optotherm/gaussian.hpp"
#include "optotherm/metrology.hpp"
#include "optotherm/wigner.hpp"

namespace py = pybind11;
using namespace optotherm;

namespace {

std::optional<FockCutoff> cutoff_of(std::optional<int> n_max) {
    if (!n_max) return std::nullopt;
    return FockCutoff(*n_max);
}

ProbeModel model_of(double alpha, double g, double tau, double chi, std::optional<int> n_max) {
    return ProbeModel(alpha, g, tau, chi, cutoff_of(n_max));
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Optomechanical thermometry: probe states, Fisher information, Wigner functions";
    m.attr("__version__") = OPTOTHERM_VERSION;

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
    py::register_exception<TruncationError>(m, "TruncationError", PyExc_RuntimeError);
    py::register_exception<PrecisionError>(m, "PrecisionError", PyExc_RuntimeError);

    m.def("nbar_from_temperature", &nbar_from_temperature, py::arg("kelvin"), py::arg("omega"));
    m.def("temperature_from_nbar", &temperature_from_nbar, py::arg("nbar"), py::arg("omega"));
    m.def("dnbar_dtemperature", &dnbar_dtemperature, py::arg("kelvin"), py::arg("omega"));
    m.def("coherent_cutoff", [](double alpha) { return FockCutoff::for_coherent(alpha).n_max(); }, py::arg("alpha"));

    m.def(
        "probe_state",
        [](double alpha, double nbar, double g, double tau, double chi, std::optional<int> n_max) {
            return model_of(alpha, g, tau, chi, n_max).family().at(nbar).matrix();
        },
        py::arg("alpha"), py::arg("nbar"), py::arg("g"), py::arg("tau"), py::arg("chi") = 0.0,
        py::arg("n_max") = py::none(), "Reduced optical density matrix in the Fock basis.");

    m.def(
        "bipartite_oracle",
        [](double alpha, double nbar, double g, double tau, std::optional<int> n_max, std::optional<int> n_mech) {
            const CoherentAmplitude a(alpha);
            const OscillatorSpec osc(nbar);
            const CouplingParams cpl(g, tau);
            const FockCutoff light = n_max ? FockCutoff(*n_max) : FockCutoff::for_coherent(alpha);
            const FockCutoff mech = n_mech ? FockCutoff(*n_mech) : oracle_mechanical_cutoff(a, osc, cpl);
            return bipartite_oracle(a, osc, cpl, light, mech).matrix();
        },
        py::arg("alpha"), py::arg("nbar"), py::arg("g"), py::arg("tau"), py::arg("n_max") = py::none(),
        py::arg("n_mech") = py::none(), "Reduced state from the full light-mechanics evolution.");

    m.def(
        "qfi",
        [](double alpha, double nbar, double g, double tau, double chi, std::optional<int> n_max) {
            return qfi(model_of(alpha, g, tau, chi, n_max), nbar).value;
        },
        py::arg("alpha"), py::arg("nbar"), py::arg("g"), py::arg("tau"), py::arg("chi") = 0.0,
        py::arg("n_max") = py::none());

    m.def(
        "cfi_homodyne",
        [](double alpha, double nbar, double g, double tau, double phi_lo, double chi, std::optional<int> n_max,
           int quad_points) {
            QuadratureSpec quad;
            quad.points = quad_points;
            return cfi_homodyne(model_of(alpha, g, tau, chi, n_max), nbar, {phi_lo}, quad).value;
        },
        py::arg("alpha"), py::arg("nbar"), py::arg("g"), py::arg("tau"), py::arg("phi_lo") = 0.0,
        py::arg("chi") = 0.0, py::arg("n_max") = py::none(), py::arg("quad_points") = QuadratureSpec{}.points);

    py::class_<GmaxResult>(m, "GmaxResult")
        .def_readonly("g_max", &GmaxResult::g_max)
        .def_readonly("fq_max", &GmaxResult::fq_max)
        .def_readonly("on_boundary", &GmaxResult::on_boundary)
        .def("__repr__", [](const GmaxResult& r) {
            std::ostringstream s;
            s << "GmaxResult(g_max=" << r.g_max << ", fq_max=" << r.fq_max << ")";
            return s.str();
        });
    m.def(
        "find_gmax",
        [](double alpha, double nbar, double tau, double g_lo, double g_hi) {
            GmaxOptions opts;
            opts.g_lo = g_lo;
            opts.g_hi = g_hi;
            return find_gmax(alpha, nbar, tau, opts);
        },
        py::arg("alpha"), py::arg("nbar"), py::arg("tau"), py::arg("g_lo") = GmaxOptions{}.g_lo,
        py::arg("g_hi") = GmaxOptions{}.g_hi);

    py::class_<PhiOptimum>(m, "PhiOptimum")
        .def_readonly("phi_star", &PhiOptimum::phi_star)
        .def_readonly("fc", &PhiOptimum::fc)
        .def_readonly("fq", &PhiOptimum::fq)
        .def_readonly("ratio", &PhiOptimum::ratio);
    m.def(
        "optimal_phi_lo",
        [](double alpha, double nbar, double g, double tau, double chi, int points) {
            PhiOptions opts;
            opts.points = points;
            return optimal_phi_lo(ProbeModel(alpha, g, tau, chi), nbar, opts);
        },
        py::arg("alpha"), py::arg("nbar"), py::arg("g"), py::arg("tau"), py::arg("chi") = 0.0,
        py::arg("points") = PhiOptions{}.points);

    m.def("distance_mod_pi", &distance_mod_pi, py::arg("phi"));

    m.def(
        "wigner_grid",
        [](const CMatrix& rho, double half_width, int points) {
            WignerGridSpec spec;
            spec.q_min = spec.p_min = -half_width;
            spec.q_max = spec.p_max = half_width;
            spec.q_points = spec.p_points = points;
            const PhaseSpaceGrid grid = wigner_grid(ProbeState(rho), spec);
            return py::make_tuple(grid.q, grid.p, grid.values);
        },
        py::arg("rho"), py::arg("half_width"), py::arg("points") = 201,
        "(q, p, W) with W[i, j] = W(q[i], p[j]) on a square grid.");
    m.def(
        "wigner_point", [](const CMatrix& rho, double q, double p) { return wigner_point(ProbeState(rho), q, p); },
        py::arg("rho"), py::arg("q"), py::arg("p"));

    m.def(
        "sigma_L",
        [](double g, double alpha, double nbar, double tau) {
            return Matrix2(evolve_covariance(initial_covariance(nbar), g, alpha, tau).optical().cov());
        },
        py::arg("g"), py::arg("alpha"), py::arg("nbar"), py::arg("tau"),
        "Optical covariance matrix from the symplectic propagator.");
    m.def("sigma_L_closed_form", &sigma_L_closed_form, py::arg("g"), py::arg("alpha"), py::arg("nbar"), py::arg("tau"));
    m.def(
        "gaussian_qfi", [](double g, double alpha, double nbar, double tau) { return gaussian_qfi(g, alpha, nbar, tau).value; },
        py::arg("g"), py::arg("alpha"), py::arg("nbar"), py::arg("tau"));
    m.def("gaussian_qfi_closed_form", &gaussian_qfi_closed_form, py::arg("g"), py::arg("alpha"), py::arg("nbar"),
          py::arg("tau"));
    m.def(
        "generaldyne_cfi",
        [](double g, double alpha, double nbar, double tau, double z, double theta) {
            return generaldyne_cfi(sigma_L_closed_form(g, alpha, nbar, tau), sigma_L_derivative(g, alpha, tau),
                                   GeneralDyneSetting(z, theta))
                .value;
        },
        py::arg("g"), py::arg("alpha"), py::arg("nbar"), py::arg("tau"), py::arg("z"), py::arg("theta"));
    m.def("homodyne_cfi_closed_form", &homodyne_cfi_closed_form, py::arg("g"), py::arg("alpha"), py::arg("nbar"),
          py::arg("theta"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out;
            std::ostringstream err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs a CLI subcommand in-process; returns (exit_code, stdout, stderr).");
}
