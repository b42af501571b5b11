#pragma once

#include "qshare/common.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace qshare {

enum class BusKind { IbrTerminal, Load, Junction };

std::string to_string(BusKind kind);
BusKind bus_kind_from_string(const std::string& s);

struct Bus {
    int id = 0;  // as numbered in the scenario file
    BusKind kind = BusKind::Load;

    bool operator==(const Bus&) const = default;
};

/// Series branch between two main buses.
struct Line {
    int from = 0;
    int to = 0;
    double r = 0.0;
    double x = 0.0;

    bool operator==(const Line&) const = default;
};

/// Output connector joining IBR `ibr` (1-based) internal bus to main bus `bus`.
struct Connector {
    int ibr = 0;
    int bus = 0;
    double r = 0.0;
    double x = 0.0;

    bool operator==(const Connector&) const = default;
};

/// Constant-impedance load at a main bus, given by apparent power and lagging power factor.
struct Load {
    int bus = 0;
    double s = 0.0;
    double pf = 1.0;

    bool operator==(const Load&) const = default;
};

struct Bases {
    double s_base_va = 1.0;  // total (all phases)
    double v_base_v = 1.0;
    double f_nom_hz = 50.0;
    int phases = 1;  // 3: s_base is the three-phase total and v_base is phase-to-neutral

    double z_base() const { return v_base_v * v_base_v * phases / s_base_va; }
    double omega_nom() const;

    bool operator==(const Bases&) const = default;
};

enum class ImpedanceUnit { Ohm, PerUnit };
enum class PowerUnit { VoltAmpere, PerUnit };

struct NetworkData {
    Bases bases;
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Connector> connectors;  // one per IBR
    std::vector<Load> loads;
    ImpedanceUnit line_unit = ImpedanceUnit::PerUnit;
    ImpedanceUnit connector_unit = ImpedanceUnit::PerUnit;
    PowerUnit load_unit = PowerUnit::PerUnit;

    std::size_t ibr_count() const noexcept { return connectors.size(); }

    /// Position of a bus id in `buses`, or npos.
    std::size_t bus_position(int id) const;

    /// Every violated invariant, one message each. Empty when valid.
    std::vector<std::string> check() const;

    bool operator==(const NetworkData&) const = default;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Normalizes impedances by Z_base and powers by S_base. Already normalized tables are untouched.
NetworkData to_per_unit(const NetworkData& data);

/// Kron-reduced network seen from the IBR internal buses (per unit).
struct ReducedNetwork {
    Mat G;
    Mat B;

    std::size_t size() const noexcept { return static_cast<std::size_t>(G.rows()); }
    CMat admittance() const;
};

/// Full nodal admittance matrix, IBR internal buses first (in IBR order), then main buses in `buses` order.
/// Loads are included as shunt admittances scaled per main bus by `load_scale` (one entry per bus).
CMat nodal_admittance(const NetworkData& data, const Vec& load_scale);

/// Eliminates every main bus from the nodal admittance matrix by Schur complement.
/// `data` must be in per unit. `load_scale` holds one multiplier per entry of `data.buses`.
ReducedNetwork kron_reduce(const NetworkData& data, const Vec& load_scale);
ReducedNetwork kron_reduce(const NetworkData& data);

/// Schur complement Y_kk - Y_ke Y_ee^{-1} Y_ek retaining the first `keep` nodes.
CMat schur_reduce(const CMat& y, Eigen::Index keep);

struct PowerInjection {
    Vec P;
    Vec Q;
};

/// Nodal injections of the reduced network:
///   P_i = sum_j V_i V_j (G_ij cos th_ij + B_ij sin th_ij)
///   Q_i = sum_j V_i V_j (G_ij sin th_ij - B_ij cos th_ij)
PowerInjection power_flow(const ReducedNetwork& net, const Vec& theta, const Vec& V);

/// First-order model P = Jth_P th + JV_P V + w_P, Q likewise, exact at (theta0, V0).
struct LinearizedModel {
    Mat J_theta_P;
    Mat J_V_P;
    Mat J_theta_Q;
    Mat J_V_Q;
    Vec w_P;
    Vec w_Q;
    Vec theta0;
    Vec V0;

    PowerInjection evaluate(const Vec& theta, const Vec& V) const;
};

LinearizedModel jacobians(const ReducedNetwork& net, const Vec& theta0, const Vec& V0);

}  // namespace qshare
