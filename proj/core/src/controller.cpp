#include "freqctl/controller.hpp"

#include <stdexcept>

namespace freqctl {

std::string to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::naive: return "naive";
        case ControllerKind::xi: return "xi";
        case ControllerKind::reform: return "reform";
        case ControllerKind::scatter: return "scatter";
        case ControllerKind::tieline_direct: return "tieline_direct";
        case ControllerKind::tieline_scatter: return "tieline_scatter";
    }
    return "unknown";
}

ControllerKind controller_kind_from_string(const std::string& name) {
    for (auto kind : {ControllerKind::naive, ControllerKind::xi, ControllerKind::reform, ControllerKind::scatter,
                      ControllerKind::tieline_direct, ControllerKind::tieline_scatter})
        if (to_string(kind) == name) return kind;
    throw std::invalid_argument("unknown controller kind '" + name + "'");
}

bool uses_scattering(ControllerKind kind) {
    return kind == ControllerKind::scatter || kind == ControllerKind::tieline_scatter;
}

bool uses_tieline(ControllerKind kind) {
    return kind == ControllerKind::tieline_direct || kind == ControllerKind::tieline_scatter;
}

int received_width(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::naive:
        case ControllerKind::xi: return 1;
        case ControllerKind::reform:
        case ControllerKind::scatter: return 2;
        case ControllerKind::tieline_direct: return 4;
        case ControllerKind::tieline_scatter: return tieline_slots;
    }
    return 0;
}

namespace {

void check_recv(const Matrix& recv, const std::vector<DirectedChannel>& channels, int width) {
    if (recv.rows() != static_cast<Eigen::Index>(channels.size()) || recv.cols() < width)
        throw std::invalid_argument("received data does not cover every in-channel");
}

}  // namespace

NaiveState naive_derivatives(const NaiveState& s, const Matrix& recv, const Vector& mismatch,
                             const std::vector<DirectedChannel>& channels) {
    check_recv(recv, channels, 1);
    NaiveState d;
    d.psi_tail = Vector::Zero(s.psi_tail.size());
    d.psi_head = Vector::Zero(s.psi_head.size());
    d.p_c = -mismatch;
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto& ch = channels[c];
        const int e = ch.edge;
        if (ch.receiver_sign > 0) {
            // a -> b received at the head b
            d.psi_head[e] = ch.alpha * (recv(c, 0) - s.p_c[ch.to]);
        } else {
            // b -> a received at the tail a
            d.psi_tail[e] = ch.alpha * (s.p_c[ch.to] - recv(c, 0));
        }
    }
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto& ch = channels[c];
        if (ch.receiver_sign > 0)
            d.p_c[ch.to] += s.psi_head[ch.edge];
        else
            d.p_c[ch.to] -= s.psi_tail[ch.edge];
    }
    return d;
}

XiState xi_derivatives(const XiState& s, const Matrix& recv, const Vector& mismatch,
                       const std::vector<DirectedChannel>& channels) {
    check_recv(recv, channels, 1);
    XiState d;
    d.xi = Vector::Zero(s.xi.size());
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto& ch = channels[c];
        d.xi[ch.to] += ch.alpha * (recv(c, 0) - s.p_c[ch.to]);
    }
    d.p_c = -mismatch + s.xi;
    return d;
}

ReformState reform_derivatives(const ReformState& s, const Matrix& recv, const Vector& mismatch,
                               const std::vector<DirectedChannel>& channels) {
    check_recv(recv, channels, 2);
    ReformState d;
    d.zeta = Vector::Zero(s.zeta.size());
    d.p_c = -mismatch;
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto& ch = channels[c];
        d.zeta[ch.to] += ch.alpha * (recv(c, 0) - s.p_c[ch.to]);
        d.p_c[ch.to] -= ch.alpha * (recv(c, 1) - s.zeta[ch.to]);
    }
    return d;
}

ScatterState scatter_controller_derivatives(const ScatterState& s, const Matrix& recv, const Vector& mismatch,
                                            const std::vector<DirectedChannel>& channels) {
    check_recv(recv, channels, 2);
    Vector v_zeta = Vector::Zero(s.zeta.size());
    Vector v_p = -mismatch;
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto& ch = channels[c];
        v_zeta[ch.to] += ch.alpha * (recv(c, 0) - s.p_c[ch.to]);
        v_p[ch.to] -= ch.alpha * (recv(c, 1) - s.zeta[ch.to]);
    }
    ScatterState d;
    d.rho_zeta = -s.rho_zeta + v_zeta;
    d.zeta = -s.rho_zeta + 2.0 * v_zeta;
    d.rho_p = -s.rho_p + v_p;
    d.p_c = -s.rho_p + 2.0 * v_p;
    return d;
}

namespace {

struct TieLineDrives {
    Vector zeta, p, pi, phi;
};

// Shared right-hand sides of the tie-line controller before compensation.
// Columns of `recv`: the values coupled into zeta via p^c, into p^c via zeta,
// into pi via zeta, into zeta via pi, into phi via pi, into pi via phi.
TieLineDrives tieline_drives(const Vector& zeta, const Vector& p_c, const Vector& pi, const Vector& phi,
                             const Matrix& recv, const int col[6], const Vector& mismatch,
                             const Vector& schedule_injection, const std::vector<DirectedChannel>& channels) {
    const Eigen::Index n = zeta.size();
    TieLineDrives v{Vector::Zero(n), -mismatch, -schedule_injection, Vector::Zero(n)};
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto& ch = channels[c];
        const int j = ch.to;
        v.zeta[j] += ch.alpha * (recv(c, col[0]) - p_c[j]) - ch.alpha * (recv(c, col[3]) - pi[j]);
        v.p[j] -= ch.alpha * (recv(c, col[1]) - zeta[j]);
        v.pi[j] += ch.alpha * (recv(c, col[2]) - zeta[j]);
        if (ch.intra_area) {
            v.pi[j] -= ch.alpha * (recv(c, col[5]) - phi[j]);
            v.phi[j] += ch.alpha * (recv(c, col[4]) - pi[j]);
        }
    }
    return v;
}

}  // namespace

TieLineDirectState tieline_direct_derivatives(const TieLineDirectState& s, const Matrix& recv,
                                              const Vector& mismatch, const Vector& schedule_injection,
                                              const std::vector<DirectedChannel>& channels) {
    check_recv(recv, channels, 4);
    // raw columns: 0 p^c, 1 zeta, 2 pi, 3 phi
    const int col[6] = {0, 1, 1, 2, 2, 3};
    const auto v = tieline_drives(s.zeta, s.p_c, s.pi, s.phi, recv, col, mismatch, schedule_injection, channels);
    return {v.zeta, v.p, v.pi, v.phi};
}

TieLineState tieline_derivatives(const TieLineState& s, const Matrix& recv, const Vector& mismatch,
                                 const Vector& schedule_injection, const std::vector<DirectedChannel>& channels) {
    check_recv(recv, channels, tieline_slots);
    // decoded columns: r^p, r^zeta, r^zeta', r^pi', r^pi'', r^phi''
    const int col[6] = {0, 1, 2, 3, 4, 5};
    const auto& b = s.base;
    const auto v = tieline_drives(b.zeta, b.p_c, s.pi, s.phi, recv, col, mismatch, schedule_injection, channels);
    TieLineState d;
    d.base.rho_zeta = -b.rho_zeta + v.zeta;
    d.base.zeta = -b.rho_zeta + 2.0 * v.zeta;
    d.base.rho_p = -b.rho_p + v.p;
    d.base.p_c = -b.rho_p + 2.0 * v.p;
    d.rho_pi = -s.rho_pi + v.pi;
    d.pi = -s.rho_pi + 2.0 * v.pi;
    d.rho_phi = -s.rho_phi + v.phi;
    d.phi = -s.rho_phi + 2.0 * v.phi;
    return d;
}

BoundsState bounds_derivatives(const BoundsState& s, const Vector& pM, const Vector& pmin, const Vector& pmax,
                               const std::vector<bool>& has_min, const std::vector<bool>& has_max) {
    BoundsState d{Vector::Zero(s.lambda.size()), Vector::Zero(s.mu.size())};
    for (Eigen::Index g = 0; g < s.lambda.size(); ++g) {
        if (has_min[g]) d.lambda[g] = 2.0 * s.lambda[g] * (pmin[g] - pM[g]);
        if (has_max[g]) d.mu[g] = 2.0 * s.mu[g] * (pM[g] - pmax[g]);
    }
    return d;
}

ObserverState observer_derivatives(const ObserverState& s, const ObserverInputs& in) {
    ObserverState d;
    d.chi = (s.b - in.omega - in.p_c - s.chi).cwiseQuotient(in.tau_chi);
    d.b = (-s.chi + in.pM - in.Lambda.cwiseProduct(in.omega) + in.inflow).cwiseQuotient(in.M);
    return d;
}

double observer_load_estimate(double omega, double inflow, double Lambda) { return -Lambda * omega + inflow; }

}  // namespace freqctl
