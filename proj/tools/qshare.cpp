// qshare command-line tool.
#include "qshare/output.hpp"
#include "qshare/scenario.hpp"
#include "qshare/simulator.hpp"
#include "qshare/stability.hpp"
#include "qshare/steady_state.hpp"
#include "qshare/tuner.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace qshare;

namespace {

struct Options {
    std::string scenario;
    double t_end = -1.0;
    double rel_tol = -1.0;
    double sample_ms = -1.0;
    std::string out_dir;
    std::vector<double> ratios = {0.5, 0.2, 0.1, 0.05, 0.01};
    std::uint64_t seed = 2024;
};

ScenarioFile load(const Options& o) {
    ScenarioFile f = load_scenario(o.scenario);
    auto& st = f.scenario.settings;
    if (o.t_end > 0.0) {
        st.t_end = o.t_end;
        // Events past the new horizon are dropped rather than rejected.
        auto& ev = f.scenario.events;
        ev.erase(std::remove_if(ev.begin(), ev.end(), [&](const Event& e) { return e.time > st.t_end; }), ev.end());
    }
    if (o.rel_tol > 0.0) st.rel_tol = o.rel_tol;
    if (o.sample_ms > 0.0) st.sample_s = o.sample_ms * 1e-3;
    if (!o.out_dir.empty()) f.outputs.directory = o.out_dir;
    return f;
}

fs::path out_dir(const ScenarioFile& f) {
    fs::path d = f.outputs.directory;
    fs::create_directories(d);
    return d;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

int run_simulate(const Options& o) {
    const auto f = load(o);
    const auto t0 = std::chrono::steady_clock::now();
    const TimeSeries ts = simulate(f.scenario);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto dir = out_dir(f);
    const auto csv = dir / (f.scenario.name + ".csv");
    {
        std::ofstream out(csv, std::ios::binary);
        if (!out) throw Error("cannot write " + csv.string());
        write_csv(out, ts, f.outputs.channels);
    }
    const auto script = dir / ("plot_" + f.scenario.name + ".py");
    write_file(script, plot_script(csv.filename().string(), f.scenario.name));

    double drift = 0.0;
    for (const auto& s : ts.segments) drift = std::max(drift, s.max_dual_drift);
    const double t_last = ts.t.back();
    std::cout << "scenario " << f.scenario.name << ": " << ts.samples() << " samples, " << ts.accepted_steps
              << " accepted steps, " << std::fixed << std::setprecision(2) << secs << " s\n"
              << std::defaultfloat << std::setprecision(6);
    std::cout << "containment: " << ts.containment_violations << " violations in " << ts.containment_checks
              << " checks, min margin " << ts.min_containment_margin << "\n";
    std::cout << "max dual drift within segments: " << drift << "\n";
    std::cout << "saturated IBRs at t=" << t_last << ":";
    for (int i : detect_saturated_set(ts, t_last)) std::cout << ' ' << i;
    std::cout << "\nsharing error at t=" << t_last << ": " << sharing_error(ts, t_last).transpose() << "\n";
    std::cout << "wrote " << csv.string() << "\nwrote " << script.string() << "\n";
    return 0;
}

int run_steady_state(const Options& o) {
    const auto f = load(o);
    const auto& s = f.scenario;
    if (auto e = s.check(); !e.empty()) throw ScenarioError(e);
    const auto net = kron_reduce(s.network);
    const double wn = s.network.bases.omega_nom();
    const auto eq = solve_equilibrium(net, s.graph, s.params, wn);
    const auto rep = verify_properties(eq, s.params, wn);
    std::cout << format_report(eq, rep);
    const auto dir = out_dir(f);
    const auto csv = dir / (s.name + "_steady_state.csv");
    write_file(csv, format_report_csv(rep));
    std::cout << "wrote " << csv.string() << "\n";
    return 0;
}

int run_stability(const Options& o) {
    const auto f = load(o);
    const auto& s = f.scenario;
    if (auto e = s.check(); !e.empty()) throw ScenarioError(e);
    const auto net = kron_reduce(s.network);
    LmiOptions lo;
    lo.seed = o.seed;
    const auto a = analyze_stability(net, s.graph, s.params, s.network.bases.omega_nom(), o.ratios, lo);
    std::cout << format_report(a);
    const auto dir = out_dir(f);
    const auto csv = dir / (s.name + "_sweep.csv");
    write_file(csv, format_sweep_csv(a.sweep));
    std::cout << "wrote " << csv.string() << "\n";
    return 0;
}

int run_tune(const Options& o) {
    const auto f = load(o);
    const auto& s = f.scenario;
    const TuningSpec spec = f.tuning.value_or(TuningSpec{});
    const auto r = tune(spec, s.graph, s.params.ibrs, s.network.bases.f_nom_hz);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";

    std::ostringstream head;
    head << std::setprecision(6);
    head << "# tuned for " << s.name << ": m* = " << r.m_star << " rad/s/p.u., sigma_2 = " << r.sigma2
         << ", m_V = " << r.params.ibrs.front().m_v * s.network.bases.v_base_v << " V (IBR 1)\n";
    const std::string text = head.str() + serialize_controller(r.params);
    std::cout << text;

    const auto val = validate(r.params, spec.beta_error_budget);
    std::cout << "\n" << format_validation(val);

    // The LMI is re-checked at the tuned gains; beta is not reduced on failure.
    ControllerParams p = r.params;
    try {
        const auto net = kron_reduce(s.network);
        const double wn = s.network.bases.omega_nom();
        const auto eq = solve_equilibrium(net, s.graph, p, wn);
        const auto lin = jacobians(net, eq.theta, eq.V);
        LmiOptions lo;
        lo.seed = o.seed;
        const auto cert = solve_lmi(assemble_blocks(lin, s.graph, p, wn), p.gains.beta, lo);
        std::cout << "LMI at tuned gains: " << (cert.feasible ? "feasible" : "not certified (inconclusive)")
                  << ", margin " << cert.margin << "\n";
    } catch (const Error& e) {
        std::cout << "LMI at tuned gains: not evaluated (" << e.what() << ")\n";
    }

    const auto dir = out_dir(f);
    const auto path = dir / (s.name + "_tuned.scn");
    write_file(path, text);
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reactive power sharing under voltage limits: simulation and analysis"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("scenario", o.scenario, "scenario file or bundled name (lv5, mv9-template)")->required();
        sub->add_option("--out-dir", o.out_dir, "output directory (default from the scenario)");
        sub->add_option("--seed", o.seed, "seed for randomized search restarts");
    };

    auto* sim = app.add_subcommand("simulate", "integrate the closed loop and write CSV + plot script");
    add_common(sim);
    sim->add_option("--t-end", o.t_end, "final time [s]")->check(CLI::PositiveNumber);
    sim->add_option("--rel-tol", o.rel_tol, "integrator relative tolerance")->check(CLI::PositiveNumber);
    sim->add_option("--sample-ms", o.sample_ms, "output sample period [ms]")->check(CLI::PositiveNumber);

    auto* ss = app.add_subcommand("steady-state", "solve the equilibrium and check the sharing properties");
    add_common(ss);

    auto* st = app.add_subcommand("stability", "reduced-model blocks, LMI certificate and tau_d/tau_v sweep");
    add_common(st);
    st->add_option("--ratios", o.ratios, "tau_d/tau_v ratios for the sweep")->delimiter(',');

    auto* tu = app.add_subcommand("tune", "derive controller gains from the [tuning] section");
    add_common(tu);

    auto* ls = app.add_subcommand("scenarios", "list bundled scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        if (rc == 0) return 0;
        std::cerr << "\n" << app.help();
        return 2;
    }

    try {
        if (*sim) return run_simulate(o);
        if (*ss) return run_steady_state(o);
        if (*st) return run_stability(o);
        if (*tu) return run_tune(o);
        if (*ls) {
            for (const auto& n : bundled_scenarios()) std::cout << n << "\n";
            return 0;
        }
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
