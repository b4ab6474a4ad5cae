#pragma once

// Recorded samples of a run plus summary metrics, and their CSV form.

#include "freqctl/network.hpp"

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace freqctl {

struct RunMetrics {
    double t_final = 0.0;
    long long steps = 0;
    double terminal_omega_inf = 0.0;
    /// First time after the last event from which |omega|_inf stays below
    /// the threshold; NaN when it never settles.
    double settling_time = std::numeric_limits<double>::quiet_NaN();
    double settle_threshold = 1e-3;
    bool diverged = false;
    double diverged_at = std::numeric_limits<double>::quiet_NaN();
    Vector terminal_pM;
    Vector oracle_pM;
    double terminal_pM_error = std::numeric_limits<double>::quiet_NaN();
    Vector terminal_area_flows;
    Vector scheduled_area_flows;
    double terminal_areaflow_error = std::numeric_limits<double>::quiet_NaN();
    /// Smallest active multiplier seen at any step (infinity without bounds).
    double min_multiplier = std::numeric_limits<double>::infinity();
    double max_abs_eta = 0.0;
    bool angle_warning = false;
    /// Largest |r - (p^c, zeta) of the sender| over all steps when every
    /// delay is zero in a scattering run; NaN otherwise.
    double zero_delay_decode_error = std::numeric_limits<double>::quiet_NaN();
    double equilibrium_residual = std::numeric_limits<double>::quiet_NaN();
    int halved_steps = 0;
};

/// Full-rate diagnostic series (one entry per step), filled when the run
/// is given an equilibrium.
struct DiagnosticSeries {
    std::vector<double> t;
    std::vector<double> V_all;
    std::vector<double> V_B;
    std::vector<double> V_S;  // alpha-weighted channel storage
    /// Cumulative trapezoid integrals of the two passivity supply rates.
    std::vector<double> supply_B;
    std::vector<double> supply_S;
    bool empty() const { return t.empty(); }
};

struct Trajectory {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    DiagnosticSeries diagnostics;
    RunMetrics metrics;
    Vector terminal_state;

    int column(const std::string& name) const;
    std::vector<double> series(const std::string& name) const;
    void write_csv(std::ostream& out) const;
};

/// %.17g formatting used for every numeric CSV field.
std::string format_number(double x);

}  // namespace freqctl
