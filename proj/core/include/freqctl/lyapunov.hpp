#pragma once

// Storage and Lyapunov functionals evaluated numerically along trajectories.
// Every function takes the current values and the equilibrium they are
// measured against.

#include "freqctl/network.hpp"

#include <map>
#include <string>
#include <vector>

namespace freqctl {

/// 1/2 sum M (omega - omega*)^2
double V_F(const Vector& M, const Vector& omega, const Vector& omega_star);

/// sum Y [cos eta* - cos eta - sin eta* (eta - eta*)], the closed form of
/// sum Y int_{eta*}^{eta} (sin s - sin eta*) ds.
double V_P(const Vector& Y, const Vector& eta, const Vector& eta_star);

/// sum tau / (2 k_g k_c) (pM - pM*)^2
double V_D(const Vector& tau, const Vector& k_g, const Vector& k_c, const Vector& pM, const Vector& pM_star);

/// 1/2 sum w (x - x*)^2 with weights w (use ones for unit weights).
double weighted_quadratic(const Vector& w, const Vector& x, const Vector& x_star);

/// 1/2 sum rho^2 + 1/2 sum (x - rho - x*)^2 for a compensated pair.
double compensated_quadratic(const Vector& rho, const Vector& x, const Vector& x_star);

/// Multiplier functional with the convention x ln x := 0 at x = 0. Entries
/// with mask false are skipped. Throws on a nonpositive active multiplier.
double V_G(const Vector& lambda, const Vector& lambda_star, const Vector& mu, const Vector& mu_star,
           const std::vector<bool>& has_min, const std::vector<bool>& has_max);

/// 1/2 sum [M ((b - b*) - (omega - omega*))^2 + tau_chi (chi - chi*)^2]
double V_E(const Vector& M, const Vector& b, const Vector& b_star, const Vector& omega, const Vector& omega_star,
           const Vector& tau_chi, const Vector& chi, const Vector& chi_star);

/// Running window integral 1/2 int_{t-T}^{t} g for one directed channel,
/// with g sampled on the step grid and treated as piecewise linear. Before
/// t = 0 g takes the constant pre-history value.
class ChannelStorage {
public:
    ChannelStorage() = default;
    ChannelStorage(double h, double delay, double g_pre);

    void push(double g);
    /// 1/2 of the window integral ending at the latest sample.
    double value() const;
    double delay() const { return delay_; }

private:
    double cumulative_at(double t) const;

    double h_ = 0.0;
    double delay_ = 0.0;
    double g_pre_ = 0.0;
    long long count_ = 0;
    long long capacity_ = 0;
    std::vector<double> g_;
    std::vector<double> cum_;
};

/// Max over k of V[k+1] - V[k] (negative when strictly decreasing).
double monotonicity_probe(const std::vector<double>& series);

/// Central differences on a uniform grid, one-sided at the ends.
std::vector<double> derivative_estimate(const std::vector<double>& series, double h);

struct FunctionalReport {
    double t = 0.0;
    std::map<std::string, double> components;
    double derivative_estimate = 0.0;
};

}  // namespace freqctl
