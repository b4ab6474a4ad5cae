#pragma once

// Cyber-layer dynamics. Every function here is a pure derivative evaluator:
// delays, scattering and disturbances are resolved by the caller, which
// passes what each receiving bus sees on its in-channels as rows of `recv`.
//
// `mismatch` is p^M_j - p^L_j per bus (p^M = 0 at load buses), or
// p^M_j - chi_j when the demand observer replaces the measured load.

#include "freqctl/channel.hpp"
#include "freqctl/network.hpp"

#include <string>
#include <vector>

namespace freqctl {

enum class ControllerKind { naive, xi, reform, scatter, tieline_direct, tieline_scatter };

std::string to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(const std::string& name);
bool uses_scattering(ControllerKind kind);
bool uses_tieline(ControllerKind kind);
/// Number of values a receiver sees per in-channel.
int received_width(ControllerKind kind);

/// Edge copies psi^tail, psi^head per comm edge plus p^c per bus.
struct NaiveState {
    Vector psi_tail;
    Vector psi_head;
    Vector p_c;
};

struct XiState {
    Vector xi;
    Vector p_c;
};

struct ReformState {
    Vector zeta;
    Vector p_c;
};

struct ScatterState {
    Vector rho_zeta;
    Vector zeta;
    Vector rho_p;
    Vector p_c;
};

struct TieLineDirectState {
    Vector zeta;
    Vector p_c;
    Vector pi;
    Vector phi;
};

struct TieLineState {
    ScatterState base;
    Vector rho_pi;
    Vector pi;
    Vector rho_phi;
    Vector phi;
};

struct BoundsState {
    Vector lambda;  // per generator
    Vector mu;
};

struct ObserverState {
    Vector chi;  // per generator
    Vector b;
};

/// recv(c, 0) = p^c of the sender, delayed. For a canonical edge a -> b the
/// head copy integrates p_a(t - T_ab) - p_b and the tail copy
/// p_a - p_b(t - T_ba); alpha scales both.
NaiveState naive_derivatives(const NaiveState& s, const Matrix& recv, const Vector& mismatch,
                             const std::vector<DirectedChannel>& channels);

/// recv(c, 0) = p^c of the sender, delayed.
XiState xi_derivatives(const XiState& s, const Matrix& recv, const Vector& mismatch,
                       const std::vector<DirectedChannel>& channels);

/// recv(c, 0) = delayed p^c, recv(c, 1) = delayed zeta of the sender.
ReformState reform_derivatives(const ReformState& s, const Matrix& recv, const Vector& mismatch,
                               const std::vector<DirectedChannel>& channels);

/// recv(c, 0) = r^p, recv(c, 1) = r^zeta decoded by the receiver.
ScatterState scatter_controller_derivatives(const ScatterState& s, const Matrix& recv, const Vector& mismatch,
                                            const std::vector<DirectedChannel>& channels);

/// recv columns: delayed p^c, zeta, pi, phi. `schedule_injection` holds
/// J_j * Phat_k per bus.
TieLineDirectState tieline_direct_derivatives(const TieLineDirectState& s, const Matrix& recv,
                                              const Vector& mismatch, const Vector& schedule_injection,
                                              const std::vector<DirectedChannel>& channels);

/// recv columns: r^p, r^zeta, r^zeta', r^pi', r^pi'', r^phi''. The last two
/// are only read on intra-area channels.
TieLineState tieline_derivatives(const TieLineState& s, const Matrix& recv, const Vector& mismatch,
                                 const Vector& schedule_injection, const std::vector<DirectedChannel>& channels);

/// lambda' = 2 lambda (pmin - pM), mu' = 2 mu (pM - pmax). Entries whose
/// bound is absent (mask false) have zero derivative.
BoundsState bounds_derivatives(const BoundsState& s, const Vector& pM, const Vector& pmin, const Vector& pmax,
                               const std::vector<bool>& has_min, const std::vector<bool>& has_max);

struct ObserverInputs {
    Vector omega;   // per generator
    Vector p_c;     // per generator
    Vector pM;      // per generator
    Vector inflow;  // net line inflow per generator bus
    Vector M;
    Vector Lambda;
    Vector tau_chi;
};

/// tau chi' = b - omega - p^c - chi; M b' = -chi + pM - Lambda omega + inflow.
ObserverState observer_derivatives(const ObserverState& s, const ObserverInputs& in);

/// Demand estimate at a load bus from its algebraic balance.
double observer_load_estimate(double omega, double inflow, double Lambda);

}  // namespace freqctl
