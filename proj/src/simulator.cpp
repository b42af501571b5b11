#include "qshare/simulator.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace qshare {

namespace odeint = boost::numeric::odeint;

std::string to_string(EventKind kind) {
    switch (kind) {
        case EventKind::ActivateController: return "activate";
        case EventKind::ScaleLoad: return "scale-load";
        case EventKind::SetLimits: return "set-limits";
    }
    return "activate";
}

bool InitialState::operator==(const InitialState& o) const {
    auto same = [](const Vec& a, const Vec& b) { return a.size() == b.size() && a == b; };
    return mode == o.mode && same(theta, o.theta) && same(omega, o.omega) && same(v, o.v) && same(lambda, o.lambda) &&
           same(zeta, o.zeta);
}

std::vector<std::string> Scenario::check() const {
    std::vector<std::string> errs = network.check();
    const std::size_t n = network.ibr_count();
    if (graph.size() != n) {
        errs.push_back("graph: node count " + std::to_string(graph.size()) + " does not match IBR count " + std::to_string(n));
    }
    if (params.size() != n) {
        errs.push_back("ibrs: " + std::to_string(params.size()) + " IBR parameter rows for " + std::to_string(n) + " connectors");
    }
    for (auto& e : params.check()) errs.push_back(std::move(e));

    if (!(settings.t_end > 0.0)) errs.push_back("simulation: t_end must be positive");
    if (!(settings.rel_tol > 0.0)) errs.push_back("simulation: rel_tol must be positive");
    if (!(settings.abs_tol > 0.0)) errs.push_back("simulation: abs_tol must be positive");
    if (!(settings.sample_s > 0.0)) errs.push_back("simulation: sample period must be positive");
    if (settings.max_step < 0.0) errs.push_back("simulation: max_step must be nonnegative");

    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        std::ostringstream who;
        who << "event #" << i + 1 << " (" << to_string(e.kind) << " at t=" << e.time << ")";
        if (!(e.time > prev)) errs.push_back(who.str() + ": event times must be strictly increasing");
        if (e.time < 0.0 || e.time > settings.t_end) errs.push_back(who.str() + ": time outside [0, t_end]");
        prev = e.time;
        switch (e.kind) {
            case EventKind::ScaleLoad:
                if (network.bus_position(e.bus) == NetworkData::npos)
                    errs.push_back(who.str() + ": unknown bus " + std::to_string(e.bus));
                if (!(e.factor >= 0.0)) errs.push_back(who.str() + ": load factor must be nonnegative");
                break;
            case EventKind::SetLimits:
                if (e.ibr < 0 || static_cast<std::size_t>(e.ibr) > n)
                    errs.push_back(who.str() + ": unknown IBR " + std::to_string(e.ibr));
                if (!(e.v_min < e.v_max)) errs.push_back(who.str() + ": V_min must be below V_max");
                break;
            case EventKind::ActivateController: break;
        }
    }

    auto check_len = [&](const Vec& x, const char* what) {
        if (x.size() != 0 && static_cast<std::size_t>(x.size()) != n)
            errs.push_back(std::string("initial state: ") + what + " has wrong length");
    };
    check_len(initial.theta, "theta");
    check_len(initial.omega, "omega");
    check_len(initial.v, "v");
    check_len(initial.lambda, "lambda");
    check_len(initial.zeta, "zeta");
    return errs;
}

// ---------------------------------------------------------------------------

ClosedLoopModel::ClosedLoopModel(ReducedNetwork net, const CommGraph& g, ControllerParams params, ControlMode mode)
    : n_(params.size()), net_(std::move(net)), lap_(qshare::laplacian(g)), params_(std::move(params)), mode_(mode) {
    if (net_.size() != n_ || g.size() != n_) throw ModelError("closed-loop model: inconsistent IBR counts");
}

Vec ClosedLoopModel::voltage(const Eigen::Ref<const Vec>& v) const {
    Vec V(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        V(ii) = mode_ == ControlMode::Proposed ? voltage_output(params_.ibrs[i], v(ii)) : 1.0 + v(ii);
    }
    return V;
}

void ClosedLoopModel::rhs(const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> dxdt) const {
    const auto n = static_cast<Eigen::Index>(n_);
    const auto theta = x.segment(0, n);
    const auto Omega = x.segment(n, n);
    const auto v = x.segment(2 * n, n);
    const auto& g = params_.gains;

    const Vec V = voltage(v);
    const auto pq = power_flow(net_, theta, V);

    dxdt.segment(0, n) = Omega;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = params_.ibrs[static_cast<std::size_t>(i)];
        const auto droop = droop_rhs(p, Omega(i), v(i), pq.P(i), pq.Q(i));
        dxdt(n + i) = droop.omega / g.tau_omega;
        if (mode_ == ControlMode::Droop)
            dxdt(2 * n + i) = droop.v / g.tau_v;
        else
            dxdt(2 * n + i) = integrator_rhs(p, g.beta, v(i), x(3 * n + i), pq.Q(i)) / g.tau_v;
    }
    if (mode_ == ControlMode::Proposed) {
        const auto lambda = x.segment(3 * n, n);
        const auto zeta = x.segment(4 * n, n);
        Vec q_ratio = pq.Q.array() / params_.s_rated().array();
        const Vec l_lambda = lap_ * lambda;
        dxdt.segment(3 * n, n) = (q_ratio - lambda - lap_ * zeta - g.k * l_lambda) / g.tau_p;
        dxdt.segment(4 * n, n) = l_lambda / g.tau_d;
    }
}

Vec ClosedLoopModel::rhs(const Vec& x) const {
    Vec dx(x.size());
    rhs(x, dx);
    return dx;
}

// ---------------------------------------------------------------------------

std::size_t TimeSeries::index_at(double time) const {
    if (t.empty()) throw ModelError("time series is empty");
    const double half = t.size() > 1 ? 0.5 * (t[1] - t[0]) : 0.0;
    if (time < t.front() - half - 1e-12 || time > t.back() + half + 1e-12) {
        std::ostringstream os;
        os << "time " << time << " outside the series [" << t.front() << ", " << t.back() << "]";
        throw ModelError(os.str());
    }
    auto it = std::lower_bound(t.begin(), t.end(), time);
    if (it == t.end()) return t.size() - 1;
    auto i = static_cast<std::size_t>(it - t.begin());
    if (i > 0 && std::abs(t[i - 1] - time) <= std::abs(t[i] - time)) return i - 1;
    return i;
}

std::set<int> detect_saturated_set(const TimeSeries& ts, double time) {
    const auto k = static_cast<Eigen::Index>(ts.index_at(time));
    std::set<int> out;
    for (Eigen::Index i = 0; i < ts.rho.cols(); ++i)
        if (ts.rho(k, i) > 0.0) out.insert(static_cast<int>(i) + 1);
    return out;
}

Vec sharing_error(const TimeSeries& ts, double time) {
    const auto k = static_cast<Eigen::Index>(ts.index_at(time));
    const Vec r = ts.Q_ratio.row(k).transpose();
    return (r.array() - r.mean()).abs().matrix();
}

// ---------------------------------------------------------------------------

namespace {

using State = std::vector<double>;

class Recorder {
  public:
    Recorder(TimeSeries& ts, std::size_t n, std::size_t capacity) : ts_(ts), n_(static_cast<Eigen::Index>(n)) {
        const auto rows = static_cast<Eigen::Index>(capacity);
        for (Mat* m : channels()) *m = Mat::Zero(rows, n_);
        ts_.t.reserve(capacity);
        ts_.mode.reserve(capacity);
    }

    void record(double t, const ClosedLoopModel& model, const Eigen::Ref<const Vec>& x, double omega_nom) {
        const auto k = static_cast<Eigen::Index>(ts_.t.size());
        if (k >= ts_.V.rows()) {
            for (Mat* m : channels()) m->conservativeResize(2 * k + 1, n_);
        }
        const auto n = n_;
        const Vec V = model.voltage(x.segment(2 * n, n));
        const auto pq = power_flow(model.network(), x.segment(0, n), V);
        const auto& params = model.params();
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& p = params.ibrs[static_cast<std::size_t>(i)];
            ts_.theta(k, i) = x(i);
            ts_.omega_dev(k, i) = x(n + i);
            ts_.f(k, i) = (omega_nom + x(n + i)) / (2.0 * std::numbers::pi);
            ts_.v(k, i) = x(2 * n + i);
            const bool proposed = model.mode() == ControlMode::Proposed;
            ts_.lambda(k, i) = proposed ? x(3 * n + i) : 0.0;
            ts_.zeta(k, i) = proposed ? x(4 * n + i) : 0.0;
            ts_.V(k, i) = V(i);
            ts_.P(k, i) = pq.P(i);
            ts_.Q(k, i) = pq.Q(i);
            ts_.P_ratio(k, i) = pq.P(i) / p.s_rated;
            ts_.Q_ratio(k, i) = pq.Q(i) / p.s_rated;
            ts_.rho(k, i) = proposed ? leakage(p, x(2 * n + i)) : 0.0;
            ts_.v_min(k, i) = p.v_min;
            ts_.v_max(k, i) = p.v_max;
            ts_.delta(k, i) = p.delta();
        }
        ts_.t.push_back(t);
        ts_.mode.push_back(model.mode());
    }

    void finish() {
        const auto rows = static_cast<Eigen::Index>(ts_.t.size());
        for (Mat* m : channels()) m->conservativeResize(rows, n_);
    }

  private:
    std::vector<Mat*> channels() {
        return {&ts_.theta, &ts_.omega_dev, &ts_.f, &ts_.v, &ts_.lambda, &ts_.zeta, &ts_.V, &ts_.P,
                &ts_.Q, &ts_.P_ratio, &ts_.Q_ratio, &ts_.rho, &ts_.v_min, &ts_.v_max, &ts_.delta};
    }

    TimeSeries& ts_;
    Eigen::Index n_;
};

bool all_finite(const State& x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

Vec to_vec(const State& x) { return Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size())); }

State to_state(const Vec& x) { return State(x.data(), x.data() + x.size()); }

}  // namespace

TimeSeries simulate(const Scenario& s) {
    if (auto errs = s.check(); !errs.empty()) {
        std::ostringstream os;
        os << "invalid scenario";
        if (!s.name.empty()) os << " '" << s.name << "'";
        os << ':';
        for (const auto& e : errs) os << "\n  " << e;
        throw ModelError(os.str());
    }
    const auto n = static_cast<Eigen::Index>(s.network.ibr_count());
    const auto& cfg = s.settings;
    const double omega_nom = s.network.bases.omega_nom();

    NetworkData data = to_per_unit(s.network);
    Vec load_scale = Vec::Ones(static_cast<Eigen::Index>(data.buses.size()));
    std::map<std::vector<double>, ReducedNetwork> reduced_cache;
    auto reduced_for = [&](const Vec& scale) -> const ReducedNetwork& {
        std::vector<double> key(scale.data(), scale.data() + scale.size());
        auto it = reduced_cache.find(key);
        if (it == reduced_cache.end()) {
            try {
                it = reduced_cache.emplace(key, kron_reduce(data, scale)).first;
            } catch (const ModelError& e) {
                throw ModelError(std::string("network re-reduction failed: ") + e.what());
            }
        }
        return it->second;
    };

    ControllerParams params = s.params;
    ControlMode mode = s.initial.mode;

    // Full 5n state; droop mode integrates the leading 3n entries.
    Vec full = Vec::Zero(5 * n);
    auto fill = [&](const Vec& src, Eigen::Index off) {
        if (src.size() == n) full.segment(off, n) = src;
    };
    fill(s.initial.theta, 0);
    fill(s.initial.omega, n);
    fill(s.initial.v, 2 * n);
    fill(s.initial.lambda, 3 * n);
    fill(s.initial.zeta, 4 * n);

    TimeSeries ts;
    const auto total_samples = static_cast<std::size_t>(std::floor(cfg.t_end / cfg.sample_s + 1e-9)) + 1;
    Recorder rec(ts, static_cast<std::size_t>(n), total_samples + 8);
    ts.min_containment_margin = std::numeric_limits<double>::infinity();
    std::size_t next_sample = 0;
    auto sample_time = [&](std::size_t k) { return static_cast<double>(k) * cfg.sample_s; };

    double t = 0.0;
    std::size_t next_event = 0;
    const double max_dt = cfg.max_step > 0.0 ? cfg.max_step : cfg.t_end;

    auto is_noop = [&](const Event& e) {
        switch (e.kind) {
            case EventKind::ActivateController: return mode == ControlMode::Proposed;
            case EventKind::ScaleLoad: return load_scale(static_cast<Eigen::Index>(data.bus_position(e.bus))) == e.factor;
            case EventKind::SetLimits:
                for (std::size_t i = 0; i < params.ibrs.size(); ++i) {
                    if (e.ibr != 0 && static_cast<std::size_t>(e.ibr) != i + 1) continue;
                    if (params.ibrs[i].v_min != e.v_min || params.ibrs[i].v_max != e.v_max) return false;
                }
                return true;
        }
        return false;
    };

    while (true) {
        // Events that leave the model unchanged do not restart the integration.
        while (next_event < s.events.size() && is_noop(s.events[next_event])) ++next_event;
        const double t_seg_end = next_event < s.events.size() ? s.events[next_event].time : cfg.t_end;
        const bool last = next_event >= s.events.size();
        ClosedLoopModel model(reduced_for(load_scale), s.graph, params, mode);
        const auto dim = static_cast<Eigen::Index>(model.state_size());

        TimeSeries::Segment seg;
        seg.t0 = t;
        seg.t1 = t_seg_end;
        seg.mode = mode;
        if (mode == ControlMode::Proposed) seg.dual_sum0 = full.segment(4 * n, n).sum();

        auto check_step = [&](const Eigen::Ref<const Vec>& x, double time) {
            for (Eigen::Index i = 0; i < dim; ++i)
                if (!std::isfinite(x(i))) {
                    std::ostringstream os;
                    os << "non-finite state at t=" << time;
                    throw IntegrationError(os.str(), time);
                }
            if (mode != ControlMode::Proposed) return;
            const Vec V = model.voltage(x.segment(2 * n, n));
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto& p = params.ibrs[static_cast<std::size_t>(i)];
                const double margin = std::min(V(i) - p.v_min, p.v_max - V(i));
                ++ts.containment_checks;
                if (!(margin > 0.0)) ++ts.containment_violations;
                ts.min_containment_margin = std::min(ts.min_containment_margin, margin);
            }
            seg.max_dual_drift = std::max(seg.max_dual_drift, std::abs(x.segment(4 * n, n).sum() - seg.dual_sum0));
        };

        // Samples at or after the segment start and before its end (end included on the last segment).
        auto due = [&](std::size_t k) {
            const double tk = sample_time(k);
            if (k >= total_samples) return false;
            return last ? tk <= t_seg_end + 1e-12 : tk < t_seg_end - 1e-12;
        };

        if (t_seg_end > t) {
            State x = to_state(full.head(dim));
            auto sys = [&model](const State& xs, State& dxs, double) {
                Eigen::Map<const Vec> xm(xs.data(), static_cast<Eigen::Index>(xs.size()));
                Eigen::Map<Vec> dm(dxs.data(), static_cast<Eigen::Index>(dxs.size()));
                model.rhs(xm, dm);
            };
            auto stepper = odeint::make_dense_output(cfg.abs_tol, cfg.rel_tol, max_dt,
                                                     odeint::runge_kutta_dopri5<State>());
            const double dt0 = std::min(1e-3, t_seg_end - t);
            stepper.initialize(x, t, dt0);

            State xi(x.size());
            while (due(next_sample) && sample_time(next_sample) <= t + 1e-12) {
                rec.record(sample_time(next_sample), model, to_vec(x), omega_nom);
                ++next_sample;
            }
            while (true) {
                std::pair<double, double> span;
                try {
                    span = stepper.do_step(sys);
                } catch (const std::exception& e) {
                    throw IntegrationError(std::string("integrator step failure at t=") +
                                               std::to_string(stepper.current_time()) + ": " + e.what(),
                                           stepper.current_time());
                }
                const double t_now = span.second;
                const State& xc = stepper.current_state();
                if (!all_finite(xc)) {
                    std::ostringstream os;
                    os << "non-finite state at t=" << t_now;
                    throw IntegrationError(os.str(), t_now);
                }
                const bool past_end = t_now >= t_seg_end;
                if (!past_end) {
                    check_step(to_vec(xc), t_now);
                    ++seg.steps;
                    ++ts.accepted_steps;
                }
                while (due(next_sample) && sample_time(next_sample) <= std::min(t_now, t_seg_end)) {
                    stepper.calc_state(sample_time(next_sample), xi);
                    rec.record(sample_time(next_sample), model, to_vec(xi), omega_nom);
                    ++next_sample;
                }
                if (past_end) {
                    stepper.calc_state(t_seg_end, xi);
                    check_step(to_vec(xi), t_seg_end);
                    ++seg.steps;
                    ++ts.accepted_steps;
                    full.head(dim) = to_vec(xi);
                    break;
                }
            }
        } else {
            while (due(next_sample) && sample_time(next_sample) <= t + 1e-12) {
                rec.record(sample_time(next_sample), model, full.head(dim), omega_nom);
                ++next_sample;
            }
        }
        t = t_seg_end;
        ts.segments.push_back(seg);

        if (last) break;

        // Apply the event.
        const Event& e = s.events[next_event++];
        switch (e.kind) {
            case EventKind::ActivateController: {
                if (mode == ControlMode::Proposed) break;
                const ClosedLoopModel droop(reduced_for(load_scale), s.graph, params, mode);
                const Vec V = droop.voltage(full.segment(2 * n, n));
                const auto pq = power_flow(droop.network(), full.segment(0, n), V);
                for (Eigen::Index i = 0; i < n; ++i) {
                    const auto& p = params.ibrs[static_cast<std::size_t>(i)];
                    full(2 * n + i) = integrator_state_for_voltage(p, V(i));
                    full(3 * n + i) = pq.Q(i) / p.s_rated;
                    full(4 * n + i) = 0.0;
                }
                mode = ControlMode::Proposed;
                break;
            }
            case EventKind::ScaleLoad: {
                const auto pos = static_cast<Eigen::Index>(data.bus_position(e.bus));
                load_scale(pos) = e.factor;
                break;
            }
            case EventKind::SetLimits: {
                for (std::size_t i = 0; i < params.ibrs.size(); ++i) {
                    if (e.ibr != 0 && static_cast<std::size_t>(e.ibr) != i + 1) continue;
                    auto& p = params.ibrs[i];
                    if (p.v_min == e.v_min && p.v_max == e.v_max) continue;
                    const auto ii = static_cast<Eigen::Index>(i);
                    if (mode == ControlMode::Proposed) {
                        const double V = voltage_output(p, full(2 * n + ii));
                        p.v_min = e.v_min;
                        p.v_max = e.v_max;
                        full(2 * n + ii) = integrator_state_for_voltage(p, V);
                    } else {
                        p.v_min = e.v_min;
                        p.v_max = e.v_max;
                    }
                }
                break;
            }
        }
    }

    rec.finish();
    if (ts.containment_checks == 0) ts.min_containment_margin = 0.0;
    ts.final_state = full;
    ts.final_mode = mode;
    return ts;
}

}  // namespace qshare
