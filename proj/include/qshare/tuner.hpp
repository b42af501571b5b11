#pragma once

#include "qshare/controller.hpp"
#include "qshare/graph.hpp"

#include <string>
#include <vector>

namespace qshare {

/// Inputs of the gain selection procedure.
struct TuningSpec {
    double delta_f_max_pu = 0.005;     // allowed frequency deviation, p.u. of f_nom
    double rocof_star = 2.5;           // Hz/s
    double tau_p = 0.01;               // s
    double k_d = 10.0;                 // desired consensus gain
    double beta_error_budget = 5e-4;   // p.u. sharing error
    double tau_d_floor = 0.0;          // s
    double beta_cap = 0.01;

    std::vector<std::string> check() const;
};

struct TuningResult {
    ControllerParams params;
    double m_star = 0.0;   // rad/s per p.u.
    double sigma2 = 0.0;
    int beta_halvings = 0;
    std::vector<std::string> warnings;
};

/// Fills droop gains and common gains for IBRs whose s_rated and limits are set.
/// Throws ModelError on an invalid spec or an unsatisfiable error budget.
TuningResult tune(const TuningSpec& spec, const CommGraph& g, const std::vector<IbrParams>& ibrs, double f_nom_hz);

struct ValidationItem {
    std::string rule;
    int ibr = 0;  // 0 = common gain
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct ValidationReport {
    std::vector<ValidationItem> items;

    bool pass() const;
    std::vector<std::string> violations() const;
};

/// Ratio rules of the timescale separation and the beta budget. Exact 10x boundaries pass.
ValidationReport validate(const ControllerParams& params, double beta_error_budget = 5e-4);

std::string format_validation(const ValidationReport& r);

}  // namespace qshare
