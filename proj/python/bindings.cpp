#include "qshare/scenario.hpp"
#include "qshare/simulator.hpp"
#include "qshare/stability.hpp"
#include "qshare/steady_state.hpp"
#include "qshare/tuner.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace qshare;

namespace {

CommGraph graph_from(std::size_t n, const std::vector<std::tuple<int, int, double>>& edges) {
    std::vector<Edge> e;
    for (const auto& [i, j, w] : edges) {
        if (i < 1 || j < 1) throw ModelError("graph node indices are 1-based");
        e.push_back({static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1), w});
    }
    return CommGraph(n, e);
}

ReducedNetwork reduced(const Mat& G, const Mat& B) {
    if (G.rows() != G.cols() || B.rows() != G.rows() || B.cols() != G.cols())
        throw ModelError("G and B must be square matrices of equal size");
    return ReducedNetwork{G, B};
}

double omega_nom(const ScenarioFile& f) { return f.scenario.network.bases.omega_nom(); }

py::dict simulate_py(const ScenarioFile& f) {
    TimeSeries ts;
    {
        py::gil_scoped_release nogil;
        ts = simulate(f.scenario);
    }
    py::dict d;
    d["t"] = Vec(Eigen::Map<const Vec>(ts.t.data(), static_cast<Eigen::Index>(ts.t.size())));
    d["theta"] = ts.theta;
    d["omega_dev"] = ts.omega_dev;
    d["f"] = ts.f;
    d["v"] = ts.v;
    d["lambda"] = ts.lambda;
    d["zeta"] = ts.zeta;
    d["V"] = ts.V;
    d["P"] = ts.P;
    d["Q"] = ts.Q;
    d["P_ratio"] = ts.P_ratio;
    d["Q_ratio"] = ts.Q_ratio;
    d["rho"] = ts.rho;
    d["v_min"] = ts.v_min;
    d["v_max"] = ts.v_max;
    std::vector<std::string> modes;
    for (auto m : ts.mode) modes.push_back(to_string(m));
    d["mode"] = modes;
    double drift = 0.0;
    for (const auto& s : ts.segments) drift = std::max(drift, s.max_dual_drift);
    d["max_dual_drift"] = drift;
    d["accepted_steps"] = ts.accepted_steps;
    d["containment_checks"] = ts.containment_checks;
    d["containment_violations"] = ts.containment_violations;
    d["min_containment_margin"] = ts.min_containment_margin;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Core routines: scenarios, network reduction, simulation, steady state, stability, tuning.";

    static py::exception<Error> model_error(m, "ModelError", PyExc_RuntimeError);
    static py::exception<ScenarioError> scenario_error(m, "ScenarioError", model_error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ScenarioError& e) {
            py::set_error(scenario_error, e.what());
        } catch (const Error& e) {
            py::set_error(model_error, e.what());
        }
    });

    py::class_<ScenarioFile>(m, "Scenario")
        .def_property_readonly("name", [](const ScenarioFile& f) { return f.scenario.name; })
        .def_property_readonly("ibr_count", [](const ScenarioFile& f) { return f.scenario.network.ibr_count(); })
        .def_property_readonly("s_rated", [](const ScenarioFile& f) { return f.scenario.params.s_rated(); })
        .def_property_readonly("load_s", [](const ScenarioFile& f) {
            std::vector<double> s;
            for (const auto& l : f.scenario.network.loads) s.push_back(l.s);
            return s;
        })
        .def_property_readonly("load_pf", [](const ScenarioFile& f) {
            std::vector<double> s;
            for (const auto& l : f.scenario.network.loads) s.push_back(l.pf);
            return s;
        })
        .def_property_readonly("events", [](const ScenarioFile& f) {
            std::vector<std::pair<double, std::string>> out;
            for (const auto& e : f.scenario.events) out.emplace_back(e.time, to_string(e.kind));
            return out;
        })
        .def_property(
            "t_end", [](const ScenarioFile& f) { return f.scenario.settings.t_end; },
            [](ScenarioFile& f, double t) {
                f.scenario.settings.t_end = t;
                auto& ev = f.scenario.events;
                ev.erase(std::remove_if(ev.begin(), ev.end(), [&](const Event& e) { return e.time > t; }), ev.end());
            })
        .def_property(
            "rel_tol", [](const ScenarioFile& f) { return f.scenario.settings.rel_tol; },
            [](ScenarioFile& f, double r) { f.scenario.settings.rel_tol = r; })
        .def_property(
            "sample_period", [](const ScenarioFile& f) { return f.scenario.settings.sample_s; },
            [](ScenarioFile& f, double s) { f.scenario.settings.sample_s = s; })
        .def("__eq__", [](const ScenarioFile& a, const ScenarioFile& b) { return a == b; })
        .def("__repr__", [](const ScenarioFile& f) {
            return "<Scenario " + f.scenario.name + " with " + std::to_string(f.scenario.network.ibr_count()) +
                   " IBRs>";
        });

    m.def("bundled_scenarios", &bundled_scenarios);
    m.def("load_scenario", &load_scenario, py::arg("path_or_name"));
    m.def("parse_scenario", &parse_scenario, py::arg("text"), py::arg("origin") = "<string>");
    m.def("serialize_scenario", &serialize_scenario);

    m.def(
        "laplacian",
        [](std::size_t n, const std::vector<std::tuple<int, int, double>>& edges) { return laplacian(graph_from(n, edges)); },
        py::arg("n"), py::arg("edges"), "Laplacian of an undirected graph given 1-based (i, j, weight) edges.");
    m.def(
        "algebraic_connectivity",
        [](std::size_t n, const std::vector<std::tuple<int, int, double>>& edges) {
            return algebraic_connectivity(graph_from(n, edges));
        },
        py::arg("n"), py::arg("edges"));
    m.def(
        "consensus_gain_matrix",
        [](std::size_t n, const std::vector<std::tuple<int, int, double>>& edges, double k) {
            return consensus_gain_matrix(graph_from(n, edges), k);
        },
        py::arg("n"), py::arg("edges"), py::arg("k"));

    m.def(
        "kron_reduce",
        [](const ScenarioFile& f, std::optional<Vec> load_scale) {
            const auto& net = f.scenario.network;
            const auto r = load_scale ? kron_reduce(net, *load_scale) : kron_reduce(net);
            return std::make_pair(r.G, r.B);
        },
        py::arg("scenario"), py::arg("load_scale") = py::none(), "Reduced (G, B) in per unit.");
    m.def(
        "power_flow",
        [](const Mat& G, const Mat& B, const Vec& theta, const Vec& V) {
            auto pq = power_flow(reduced(G, B), theta, V);
            return std::make_pair(pq.P, pq.Q);
        },
        py::arg("G"), py::arg("B"), py::arg("theta"), py::arg("V"));
    m.def(
        "jacobians",
        [](const Mat& G, const Mat& B, const Vec& theta, const Vec& V) {
            const auto l = jacobians(reduced(G, B), theta, V);
            py::dict d;
            d["J_theta_P"] = l.J_theta_P;
            d["J_V_P"] = l.J_V_P;
            d["J_theta_Q"] = l.J_theta_Q;
            d["J_V_Q"] = l.J_V_Q;
            d["w_P"] = l.w_P;
            d["w_Q"] = l.w_Q;
            return d;
        },
        py::arg("G"), py::arg("B"), py::arg("theta"), py::arg("V"));

    m.def("simulate", &simulate_py, py::arg("scenario"),
          "Integrate the scenario; returns a dict of (samples x IBRs) arrays and run statistics.");

    py::class_<Equilibrium>(m, "Equilibrium")
        .def_readonly("theta", &Equilibrium::theta)
        .def_readonly("omega", &Equilibrium::omega)
        .def_readonly("v", &Equilibrium::v)
        .def_readonly("lambda_", &Equilibrium::lambda)
        .def_readonly("zeta", &Equilibrium::zeta)
        .def_readonly("V", &Equilibrium::V)
        .def_readonly("P", &Equilibrium::P)
        .def_readonly("Q", &Equilibrium::Q)
        .def_readonly("omega_syn", &Equilibrium::omega_syn)
        .def_readonly("alpha_P", &Equilibrium::alpha_P)
        .def_readonly("alpha_Q", &Equilibrium::alpha_Q)
        .def_readonly("saturated", &Equilibrium::saturated)
        .def_readonly("iterations", &Equilibrium::iterations)
        .def_readonly("residual", &Equilibrium::residual);

    m.def(
        "solve_equilibrium",
        [](const ScenarioFile& f, std::optional<Vec> load_scale) {
            const auto& s = f.scenario;
            const auto net = load_scale ? kron_reduce(s.network, *load_scale) : kron_reduce(s.network);
            return solve_equilibrium(net, s.graph, s.params, omega_nom(f));
        },
        py::arg("scenario"), py::arg("load_scale") = py::none());

    m.def(
        "verify_properties",
        [](const ScenarioFile& f, const Equilibrium& eq) {
            const auto r = verify_properties(eq, f.scenario.params, omega_nom(f));
            py::dict d;
            d["active_sharing"] = r.active_sharing;
            d["containment"] = r.containment;
            d["global_sharing"] = r.global_sharing;
            d["partial_sharing"] = r.partial_sharing;
            d["all_pass"] = r.all_pass();
            d["margin_low"] = r.margin_low;
            d["margin_high"] = r.margin_high;
            d["sharing_error"] = r.sharing_error;
            return d;
        },
        py::arg("scenario"), py::arg("equilibrium"));

    m.def(
        "analyze_stability",
        [](const ScenarioFile& f, std::vector<double> ratios, std::uint64_t seed) {
            const auto& s = f.scenario;
            LmiOptions lo;
            lo.seed = seed;
            StabilityAnalysis a;
            {
                py::gil_scoped_release nogil;
                a = analyze_stability(kron_reduce(s.network), s.graph, s.params, omega_nom(f), ratios, lo);
            }
            py::dict d;
            d["R_theta"] = a.blocks.R_theta;
            d["R_vV"] = a.blocks.R_vV;
            d["R_zeta"] = a.blocks.R_zeta;
            d["P_theta"] = a.lmi.P_theta;
            d["D_v"] = Vec(a.lmi.D_v.diagonal());
            d["lmi_feasible"] = a.lmi.feasible;
            d["lmi_margin"] = a.lmi.margin;
            d["alpha_s"] = a.lmi.alpha_s;
            d["P_y"] = a.boundary.P_y;
            d["alpha_f"] = a.boundary.alpha_f;
            std::vector<std::tuple<double, double, double>> rows;
            for (const auto& r : a.sweep.rows) rows.emplace_back(r.ratio, r.abscissa, r.full_abscissa);
            d["sweep"] = rows;
            d["quasi_steady_abscissa"] = a.sweep.quasi_steady_abscissa;
            d["report"] = format_report(a);
            return d;
        },
        py::arg("scenario"), py::arg("ratios") = std::vector<double>{0.5, 0.2, 0.1, 0.05, 0.01},
        py::arg("seed") = 2024);

    m.def(
        "tune",
        [](const ScenarioFile& f) {
            const auto spec = f.tuning.value_or(TuningSpec{});
            const auto& s = f.scenario;
            const auto r = tune(spec, s.graph, s.params.ibrs, s.network.bases.f_nom_hz);
            py::dict d;
            d["m_star"] = r.m_star;
            d["sigma2"] = r.sigma2;
            d["k"] = r.params.gains.k;
            d["tau_omega"] = r.params.gains.tau_omega;
            d["tau_v"] = r.params.gains.tau_v;
            d["tau_p"] = r.params.gains.tau_p;
            d["tau_d"] = r.params.gains.tau_d;
            d["beta"] = r.params.gains.beta;
            std::vector<double> mv;
            for (const auto& p : r.params.ibrs) mv.push_back(p.m_v * s.network.bases.v_base_v);
            d["m_v_volts"] = mv;
            d["warnings"] = r.warnings;
            d["section"] = serialize_controller(r.params);
            return d;
        },
        py::arg("scenario"), "Gains from the scenario's [tuning] section (defaults when absent).");

    m.def(
        "validate",
        [](const ScenarioFile& f, double budget) {
            const auto r = validate(f.scenario.params, budget);
            py::dict d;
            d["pass"] = r.pass();
            d["violations"] = r.violations();
            return d;
        },
        py::arg("scenario"), py::arg("beta_error_budget") = 5e-4);
}
