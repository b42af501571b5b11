#pragma once

#include "qshare/common.hpp"
#include "qshare/controller.hpp"
#include "qshare/graph.hpp"
#include "qshare/network.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qshare {

enum class EventKind { ActivateController, ScaleLoad, SetLimits };

std::string to_string(EventKind kind);

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::ActivateController;
    int bus = 0;          // ScaleLoad: target bus id
    double factor = 1.0;  // ScaleLoad: multiplier relative to the nominal load
    int ibr = 0;          // SetLimits: 1-based IBR, 0 = every IBR
    double v_min = 0.0;   // SetLimits
    double v_max = 0.0;   // SetLimits

    bool operator==(const Event&) const = default;
};

struct SimulationSettings {
    double t_end = 10.0;
    double rel_tol = 1e-7;
    double abs_tol = 1e-9;
    double max_step = 0.0;  // 0: unbounded
    double sample_s = 0.01;

    bool operator==(const SimulationSettings&) const = default;
};

/// Optional initial state; empty vectors mean flat start (theta = Omega = v = lambda = zeta = 0).
struct InitialState {
    ControlMode mode = ControlMode::Droop;
    Vec theta;
    Vec omega;
    Vec v;
    Vec lambda;
    Vec zeta;

    bool operator==(const InitialState& o) const;
};

struct Scenario {
    std::string name;
    NetworkData network;  // per unit
    CommGraph graph;
    ControllerParams params;
    SimulationSettings settings;
    std::vector<Event> events;
    InitialState initial;

    /// Every semantic problem (dangling references, unordered events, ...), one message each.
    std::vector<std::string> check() const;
};

/// The closed-loop vector field in a frame rotating at omega_nom.
///
/// State layout: proposed mode [theta, Omega, v, lambda, zeta] (5n),
/// droop mode [theta, Omega, v] (3n).
class ClosedLoopModel {
  public:
    ClosedLoopModel(ReducedNetwork net, const CommGraph& g, ControllerParams params, ControlMode mode);

    std::size_t ibr_count() const noexcept { return n_; }
    std::size_t state_size() const noexcept { return mode_ == ControlMode::Proposed ? 5 * n_ : 3 * n_; }
    ControlMode mode() const noexcept { return mode_; }
    const ReducedNetwork& network() const noexcept { return net_; }
    const ControllerParams& params() const noexcept { return params_; }
    const Mat& laplacian() const noexcept { return lap_; }

    /// Output voltage for integrator states v.
    Vec voltage(const Eigen::Ref<const Vec>& v) const;

    void rhs(const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> dxdt) const;
    Vec rhs(const Vec& x) const;

  private:
    std::size_t n_;
    ReducedNetwork net_;
    Mat lap_;
    ControllerParams params_;
    ControlMode mode_;
};

/// Sampled closed-loop trajectory. Matrices are (samples x IBRs).
struct TimeSeries {
    std::vector<double> t;
    Mat theta, omega_dev, f, v, lambda, zeta, V, P, Q, P_ratio, Q_ratio, rho;
    std::vector<ControlMode> mode;  // per sample
    Mat v_min, v_max;               // active limits per sample
    Mat delta;                      // active Delta per sample

    struct Segment {
        double t0 = 0.0;
        double t1 = 0.0;
        ControlMode mode = ControlMode::Droop;
        double dual_sum0 = 0.0;        // 1'zeta at t0
        double max_dual_drift = 0.0;   // max |1'zeta - 1'zeta(t0)| over accepted steps
        std::size_t steps = 0;
    };
    std::vector<Segment> segments;

    std::size_t accepted_steps = 0;
    std::size_t containment_checks = 0;      // IBR-steps checked in proposed mode
    std::size_t containment_violations = 0;
    double min_containment_margin = 0.0;     // min over checks of min(V - V_min, V_max - V)

    std::size_t samples() const noexcept { return t.size(); }
    std::size_t ibr_count() const noexcept { return static_cast<std::size_t>(V.cols()); }
    /// Index of the sample closest to time t; throws if t is outside the series.
    std::size_t index_at(double time) const;
    /// Full state vector (5n layout) at the final time.
    Vec final_state;
    ControlMode final_mode = ControlMode::Droop;
};

TimeSeries simulate(const Scenario& s);

/// 1-based IBR indices whose leakage coefficient is positive at time t.
std::set<int> detect_saturated_set(const TimeSeries& ts, double time);

/// |Q_i/S_i - mean_j Q_j/S_j| at time t.
Vec sharing_error(const TimeSeries& ts, double time);

}  // namespace qshare
