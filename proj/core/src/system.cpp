#include "freqctl/system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace freqctl {

namespace {

const double sqrt2 = std::sqrt(2.0);

std::string bus_label(const NetworkModel& m, int j) { return std::to_string(m.buses[j].id); }

std::string edge_label(const NetworkModel& m, const LineParams& e) {
    return bus_label(m, e.from) + "_" + bus_label(m, e.to);
}

}  // namespace

IntegrationError::IntegrationError(const std::string& variable, double t, const std::string& what)
    : std::runtime_error(what + " in " + variable + " at t = " + format_number(t)), variable_(variable),
      time_(t) {}

std::vector<double> uniform_delays(const NetworkModel& model, double T) {
    return std::vector<double>(2 * model.comm_edges.size(), T);
}

std::vector<double> interval_delays(const NetworkModel& model, double lo, double hi, std::uint64_t seed) {
    if (!(hi >= lo) || lo < 0.0) throw std::invalid_argument("delay interval must satisfy 0 <= lo <= hi");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> draw(lo, hi);
    std::vector<double> out(2 * model.comm_edges.size());
    for (auto& T : out) T = lo == hi ? lo : draw(rng);
    return out;
}

Simulator::Simulator(NetworkModel model, ControllerConfig controller, SimConfig sim, std::vector<double> delays,
                     DisturbanceSpec disturbance)
    : model_(std::move(model)),
      ctrl_(controller),
      sim_(std::move(sim)),
      delays_(std::move(delays)),
      dist_spec_(disturbance),
      plant_(model_) {
    if (!(sim_.h > 0.0)) throw std::invalid_argument("step size must be positive");
    if (!(sim_.t_end > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (sim_.record_every < 1) throw std::invalid_argument("record_every must be at least 1");
    if (!(ctrl_.tau_chi > 0.0)) throw std::invalid_argument("observer time constant must be positive");
    std::stable_sort(sim_.events.begin(), sim_.events.end(),
                     [](const LoadEvent& a, const LoadEvent& b) { return a.time < b.time; });
    channels_ = make_channels(model_, delays_);
    for (const auto& ch : channels_) max_delay_ = std::max(max_delay_, ch.delay);

    const int n = model_.n_buses();
    schedule_injection_ = Vector::Zero(n);
    if (uses_tieline(ctrl_.kind) && !model_.areas.empty())
        for (const auto& area : model_.areas) schedule_injection_[area.informed_bus] += area.schedule;

    const int nG = plant_.n_generators();
    has_min_.assign(static_cast<std::size_t>(nG), false);
    has_max_.assign(static_cast<std::size_t>(nG), false);
    pmin_ = Vector::Zero(nG);
    pmax_ = Vector::Zero(nG);
    for (int g = 0; g < nG; ++g) {
        const auto& bus = model_.buses[plant_.generators()[g]];
        if (ctrl_.bounds && bus.pM_min) {
            has_min_[g] = true;
            pmin_[g] = *bus.pM_min;
        }
        if (ctrl_.bounds && bus.pM_max) {
            has_max_[g] = true;
            pmax_[g] = *bus.pM_max;
        }
    }
    switch (ctrl_.kind) {
        case ControllerKind::naive:
        case ControllerKind::xi: broadcast_vars_ = 1; break;
        case ControllerKind::reform: broadcast_vars_ = 2; break;
        case ControllerKind::tieline_direct: broadcast_vars_ = 4; break;
        default: broadcast_vars_ = 0; break;
    }
    build_layout();
    x0_ = default_initial_state();
}

void Simulator::build_layout() {
    auto& L = layout_;
    L = StateLayout{};
    const int n = model_.n_buses();
    const auto& gens = plant_.generators();
    auto add_bus_block = [&](int& offset, const std::string& prefix) {
        offset = L.size;
        for (int j = 0; j < n; ++j) L.names.push_back(prefix + "_" + bus_label(model_, j));
        L.size += n;
    };
    auto add_gen_block = [&](int& offset, const std::string& prefix) {
        offset = L.size;
        for (int j : gens) L.names.push_back(prefix + "_" + bus_label(model_, j));
        L.size += static_cast<int>(gens.size());
    };
    auto add_edge_block = [&](int& offset, const std::string& prefix, const std::vector<LineParams>& edges) {
        offset = L.size;
        for (const auto& e : edges) L.names.push_back(prefix + "_" + edge_label(model_, e));
        L.size += static_cast<int>(edges.size());
    };
    add_edge_block(L.eta, "eta", model_.phys_edges);
    add_gen_block(L.omega_g, "omega");
    add_gen_block(L.pM, "pM");
    switch (ctrl_.kind) {
        case ControllerKind::naive:
            add_edge_block(L.psi_tail, "psi_tail", model_.comm_edges);
            add_edge_block(L.psi_head, "psi_head", model_.comm_edges);
            add_bus_block(L.p_c, "pc");
            break;
        case ControllerKind::xi:
            add_bus_block(L.xi, "xi");
            add_bus_block(L.p_c, "pc");
            break;
        case ControllerKind::reform:
            add_bus_block(L.zeta, "zeta");
            add_bus_block(L.p_c, "pc");
            break;
        case ControllerKind::scatter:
            add_bus_block(L.rho_zeta, "rho_zeta");
            add_bus_block(L.zeta, "zeta");
            add_bus_block(L.rho_p, "rho_p");
            add_bus_block(L.p_c, "pc");
            break;
        case ControllerKind::tieline_direct:
            add_bus_block(L.zeta, "zeta");
            add_bus_block(L.p_c, "pc");
            add_bus_block(L.pi, "pi");
            add_bus_block(L.phi, "phi");
            break;
        case ControllerKind::tieline_scatter:
            add_bus_block(L.rho_zeta, "rho_zeta");
            add_bus_block(L.zeta, "zeta");
            add_bus_block(L.rho_p, "rho_p");
            add_bus_block(L.p_c, "pc");
            add_bus_block(L.rho_pi, "rho_pi");
            add_bus_block(L.pi, "pi");
            add_bus_block(L.rho_phi, "rho_phi");
            add_bus_block(L.phi, "phi");
            break;
    }
    if (ctrl_.bounds) {
        add_gen_block(L.lambda, "lambda");
        add_gen_block(L.mu, "mu");
    }
    if (ctrl_.observer) {
        add_gen_block(L.chi, "chi");
        add_gen_block(L.b, "b");
    }
}

Vector Simulator::default_initial_state() const {
    Vector x = Vector::Zero(layout_.size);
    for (int g = 0; g < plant_.n_generators(); ++g) {
        if (layout_.lambda >= 0 && has_min_[g]) x[layout_.lambda + g] = 1.0;
        if (layout_.mu >= 0 && has_max_[g]) x[layout_.mu + g] = 1.0;
    }
    return x;
}

void Simulator::set_initial_state(const Vector& x0) {
    if (x0.size() != layout_.size) throw std::invalid_argument("initial state has the wrong size");
    x0_ = x0;
}

Vector Simulator::demand_at(double t) const {
    const int n = model_.n_buses();
    const bool staged = std::any_of(sim_.events.begin(), sim_.events.end(),
                                    [](const LoadEvent& e) { return e.apply_configured; });
    Vector pL(n);
    for (int j = 0; j < n; ++j) pL[j] = staged ? 0.0 : model_.buses[j].pL;
    for (const auto& ev : sim_.events) {
        if (ev.time > t) break;
        if (ev.apply_configured)
            for (int j = 0; j < n; ++j) pL[j] = model_.buses[j].pL;
        for (const auto& [bus, value] : ev.set) pL[bus] = value;
    }
    return pL;
}

Vector Simulator::final_demand() const { return demand_at(std::numeric_limits<double>::infinity()); }

DispatchSolution Simulator::oracle() const {
    NetworkModel m = model_;
    const Vector pL = final_demand();
    for (int j = 0; j < m.n_buses(); ++j) m.buses[j].pL = pL[j];
    if (uses_tieline(ctrl_.kind)) return solve_ogr2(m);
    if (ctrl_.bounds) return solve_ogr3(m);
    return solve_ogr(m);
}

Equilibrium Simulator::equilibrium(const Vector* terminal) const {
    const auto& L = layout_;
    const int n = model_.n_buses();
    const int nG = plant_.n_generators();
    const auto& gens = plant_.generators();
    Equilibrium eq;
    eq.pL = final_demand();
    eq.dispatch = oracle();
    const Vector pM_bus = plant_.bus_generation(eq.dispatch.pM_star);
    const Vector mis = pM_bus - eq.pL;
    eq.flow = solve_power_flow(model_, mis);

    Vector& x = eq.state;
    x = Vector::Zero(L.size);
    x.segment(L.eta, plant_.n_edges()) = eq.flow.eta;
    x.segment(L.pM, nG) = eq.dispatch.pM_star;

    const auto area = model_.area_of_bus();
    Vector price(n);
    for (int j = 0; j < n; ++j)
        price[j] = eq.dispatch.beta.size() > 1 ? eq.dispatch.beta[area[j]] : eq.dispatch.beta[0];
    x.segment(L.p_c, n) = price;

    auto terminal_mean_gap = [&](int offset, const Vector& base, const std::vector<int>& members) {
        double s = 0.0;
        for (int j : members) s += (*terminal)[offset + j] - base[j];
        return members.empty() ? 0.0 : s / static_cast<double>(members.size());
    };
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);

    const Matrix Lc = laplacian(model_.comm_edges, n);
    if (L.zeta >= 0) {
        Vector zeta = Lc.completeOrthogonalDecomposition().solve(mis);
        if (terminal) zeta.array() += terminal_mean_gap(L.zeta, zeta, all);
        x.segment(L.zeta, n) = zeta;
    }
    if (L.xi >= 0) x.segment(L.xi, n) = mis;
    if (L.psi_tail >= 0) {
        const Matrix Dc = incidence_matrix(model_.comm_edges, n);
        const auto m = Dc.cols();
        Vector psi = Dc.completeOrthogonalDecomposition().solve(mis);
        if (terminal) {
            const Vector avg = 0.5 * (terminal->segment(L.psi_tail, m) + terminal->segment(L.psi_head, m));
            const Matrix P = Matrix::Identity(m, m) - Dc.completeOrthogonalDecomposition().pseudoInverse() * Dc;
            psi += P * (avg - psi);
        }
        x.segment(L.psi_tail, m) = psi;
        x.segment(L.psi_head, m) = psi;
    }
    if (L.pi >= 0) {
        const AreaMatrices am = area_matrices(model_);
        Vector pi = price;
        if (terminal) pi.array() += terminal_mean_gap(L.pi, pi, all);
        x.segment(L.pi, n) = pi;
        Vector phi = am.L_K.completeOrthogonalDecomposition().solve(mis + schedule_injection_);
        if (terminal) {
            for (int k = 0; k < model_.n_areas(); ++k) {
                std::vector<int> members;
                for (int j = 0; j < n; ++j)
                    if (area[j] == k) members.push_back(j);
                const double gap = terminal_mean_gap(L.phi, phi, members);
                for (int j : members) phi[j] += gap;
            }
        }
        x.segment(L.phi, n) = phi;
    }
    if (L.lambda >= 0) {
        for (int g = 0; g < nG; ++g) {
            x[L.lambda + g] = has_min_[g] ? std::sqrt(eq.dispatch.lambda_bar[g]) : 0.0;
            x[L.mu + g] = has_max_[g] ? std::sqrt(eq.dispatch.mu_bar[g]) : 0.0;
        }
    }
    if (L.chi >= 0) {
        for (int g = 0; g < nG; ++g) {
            x[L.chi + g] = eq.pL[gens[g]];
            x[L.b + g] = price[gens[g]] + eq.pL[gens[g]];
        }
    }
    return eq;
}

Vector Simulator::broadcast_row(const Vector& x) const {
    const int n = model_.n_buses();
    Vector row(n * broadcast_vars_);
    for (int j = 0; j < n; ++j) {
        const int base = j * broadcast_vars_;
        row[base] = x[layout_.p_c + j];
        if (broadcast_vars_ >= 2) row[base + 1] = x[layout_.zeta + j];
        if (broadcast_vars_ >= 4) {
            row[base + 2] = x[layout_.pi + j];
            row[base + 3] = x[layout_.phi + j];
        }
    }
    return row;
}

Vector Simulator::local_output(const Vector& x, int bus, bool intra) const {
    const double zeta = x[layout_.zeta + bus];
    const double p_c = x[layout_.p_c + bus];
    if (ctrl_.kind == ControllerKind::tieline_scatter)
        return scatter_output_tieline(zeta, p_c, x[layout_.pi + bus], x[layout_.phi + bus], intra);
    return scatter_output(zeta, p_c);
}

void Simulator::receive_all(double t, const Vector& x, Matrix& recv, Matrix* frames_out) {
    const auto nc = static_cast<Eigen::Index>(channels_.size());
    if (!uses_scattering(ctrl_.kind)) {
        const int nv = broadcast_vars_;
        recv.resize(nc, nv);
        const Vector now = broadcast_row(x);
        Vector past(raw_.width());
        for (Eigen::Index c = 0; c < nc; ++c) {
            const auto& ch = channels_[static_cast<std::size_t>(c)];
            const double d = disturbance_.value(static_cast<int>(c), t);
            const double* src = now.data();
            if (ch.delay > 0.0) {
                raw_.value(t - ch.delay, past.data());
                src = past.data();
            }
            for (int v = 0; v < nv; ++v) recv(c, v) = src[ch.from * nv + v] + d;
        }
        return;
    }
    const int S = ctrl_.kind == ControllerKind::tieline_scatter ? tieline_slots : base_slots;
    recv.resize(nc, S);
    if (frames_out) frames_out->resize(nc, S);
    Vector s_in(S);
    for (std::size_t e = 0; e < model_.comm_edges.size(); ++e) {
        const auto& fwd = channels_[2 * e];      // tail a -> head b
        const auto& bwd = channels_[2 * e + 1];  // head b -> tail a
        const int a = fwd.from;
        const int b = fwd.to;
        const Vector y_a = local_output(x, a, fwd.intra_area);
        const Vector y_b = local_output(x, b, fwd.intra_area);
        const double d_ab = disturbance_.value(static_cast<int>(2 * e), t);
        const double d_ba = disturbance_.value(static_cast<int>(2 * e + 1), t);
        Vector r_a, r_b;
        if (fwd.delay == 0.0 && bwd.delay == 0.0) {
            auto z = decode_zero_delay(y_a, y_b, d_ab, d_ba);
            r_a = std::move(z.r_tail);
            r_b = std::move(z.r_head);
        } else if (fwd.delay == 0.0) {
            // a decodes from b's delayed frames, then b reads a's fresh frame.
            s_in = receive(frames_[2 * e + 1], t, bwd.delay, d_ba);
            r_a = -sqrt2 * s_in - y_a;
            s_in = rotate(-(r_a - y_a) / sqrt2);
            s_in.array() += d_ab;
            r_b = sqrt2 * s_in - y_b;
        } else if (bwd.delay == 0.0) {
            s_in = receive(frames_[2 * e], t, fwd.delay, d_ab);
            r_b = sqrt2 * s_in - y_b;
            s_in = rotate((r_b - y_b) / sqrt2);
            s_in.array() += d_ba;
            r_a = -sqrt2 * s_in - y_a;
        } else {
            s_in = receive(frames_[2 * e], t, fwd.delay, d_ab);
            r_b = sqrt2 * s_in - y_b;
            s_in = receive(frames_[2 * e + 1], t, bwd.delay, d_ba);
            r_a = -sqrt2 * s_in - y_a;
        }
        recv.row(static_cast<Eigen::Index>(2 * e)) = r_b.transpose();
        recv.row(static_cast<Eigen::Index>(2 * e + 1)) = r_a.transpose();
        if (frames_out) {
            frames_out->row(static_cast<Eigen::Index>(2 * e)) = (-(r_a - y_a) / sqrt2).transpose();
            frames_out->row(static_cast<Eigen::Index>(2 * e + 1)) = ((r_b - y_b) / sqrt2).transpose();
        }
    }
}

Vector Simulator::rhs(double t, const Vector& x) {
    const auto& L = layout_;
    const int n = model_.n_buses();
    const int nG = plant_.n_generators();
    const int nE = plant_.n_edges();
    const auto& gens = plant_.generators();

    PlantState ps{x.segment(L.eta, nE), x.segment(L.omega_g, nG), x.segment(L.pM, nG)};
    const Vector flows = line_flows(ps.eta, model_.phys_edges);
    const Vector inflow = plant_.net_inflow(flows);
    Vector omega(n);
    for (int g = 0; g < nG; ++g) omega[gens[g]] = ps.omega_g[g];
    for (int j : plant_.loads()) omega[j] = (-pL_[j] + inflow[j]) / model_.buses[j].Lambda;

    Vector demand_seen = pL_;
    if (ctrl_.observer) {
        for (int g = 0; g < nG; ++g) demand_seen[gens[g]] = x[L.chi + g];
        for (int j : plant_.loads())
            demand_seen[j] = observer_load_estimate(omega[j], inflow[j], model_.buses[j].Lambda);
    }
    const Vector mismatch = plant_.bus_generation(ps.pM) - demand_seen;

    Matrix recv;
    receive_all(t, x, recv, nullptr);

    Vector dx = Vector::Zero(L.size);
    auto seg = [&](int off) { return x.segment(off, n); };
    switch (ctrl_.kind) {
        case ControllerKind::naive: {
            const auto m = static_cast<Eigen::Index>(model_.comm_edges.size());
            NaiveState s{x.segment(L.psi_tail, m), x.segment(L.psi_head, m), seg(L.p_c)};
            const auto d = naive_derivatives(s, recv, mismatch, channels_);
            dx.segment(L.psi_tail, m) = d.psi_tail;
            dx.segment(L.psi_head, m) = d.psi_head;
            dx.segment(L.p_c, n) = d.p_c;
            break;
        }
        case ControllerKind::xi: {
            const auto d = xi_derivatives({seg(L.xi), seg(L.p_c)}, recv, mismatch, channels_);
            dx.segment(L.xi, n) = d.xi;
            dx.segment(L.p_c, n) = d.p_c;
            break;
        }
        case ControllerKind::reform: {
            const auto d = reform_derivatives({seg(L.zeta), seg(L.p_c)}, recv, mismatch, channels_);
            dx.segment(L.zeta, n) = d.zeta;
            dx.segment(L.p_c, n) = d.p_c;
            break;
        }
        case ControllerKind::scatter: {
            ScatterState s{seg(L.rho_zeta), seg(L.zeta), seg(L.rho_p), seg(L.p_c)};
            const auto d = scatter_controller_derivatives(s, recv, mismatch, channels_);
            dx.segment(L.rho_zeta, n) = d.rho_zeta;
            dx.segment(L.zeta, n) = d.zeta;
            dx.segment(L.rho_p, n) = d.rho_p;
            dx.segment(L.p_c, n) = d.p_c;
            break;
        }
        case ControllerKind::tieline_direct: {
            TieLineDirectState s{seg(L.zeta), seg(L.p_c), seg(L.pi), seg(L.phi)};
            const auto d = tieline_direct_derivatives(s, recv, mismatch, schedule_injection_, channels_);
            dx.segment(L.zeta, n) = d.zeta;
            dx.segment(L.p_c, n) = d.p_c;
            dx.segment(L.pi, n) = d.pi;
            dx.segment(L.phi, n) = d.phi;
            break;
        }
        case ControllerKind::tieline_scatter: {
            TieLineState s{{seg(L.rho_zeta), seg(L.zeta), seg(L.rho_p), seg(L.p_c)},
                           seg(L.rho_pi), seg(L.pi), seg(L.rho_phi), seg(L.phi)};
            const auto d = tieline_derivatives(s, recv, mismatch, schedule_injection_, channels_);
            dx.segment(L.rho_zeta, n) = d.base.rho_zeta;
            dx.segment(L.zeta, n) = d.base.zeta;
            dx.segment(L.rho_p, n) = d.base.rho_p;
            dx.segment(L.p_c, n) = d.base.p_c;
            dx.segment(L.rho_pi, n) = d.rho_pi;
            dx.segment(L.pi, n) = d.pi;
            dx.segment(L.rho_phi, n) = d.rho_phi;
            dx.segment(L.phi, n) = d.phi;
            break;
        }
    }

    Vector u(nG);
    for (int g = 0; g < nG; ++g) {
        const int j = gens[g];
        const auto& bus = model_.buses[j];
        const double pc = x[L.p_c + j];
        if (ctrl_.bounds) {
            const double lam = has_min_[g] ? x[L.lambda + g] : 0.0;
            const double mu = has_max_[g] ? x[L.mu + g] : 0.0;
            u[g] = generation_input_bounded(pc, omega[j], ps.pM[g], lam, mu, bus);
        } else {
            u[g] = generation_input(pc, omega[j], ps.pM[g], bus);
        }
    }
    dx.segment(L.eta, nE) = -plant_.incidence().transpose() * omega;
    for (int g = 0; g < nG; ++g) {
        const int j = gens[g];
        const auto& bus = model_.buses[j];
        dx[L.omega_g + g] = (-pL_[j] + ps.pM[g] - bus.Lambda * omega[j] + inflow[j]) / bus.M;
        dx[L.pM + g] = (-ps.pM[g] + bus.k_g * u[g]) / bus.tau;
    }
    if (ctrl_.bounds) {
        const auto d = bounds_derivatives({x.segment(L.lambda, nG), x.segment(L.mu, nG)}, ps.pM, pmin_, pmax_,
                                          has_min_, has_max_);
        dx.segment(L.lambda, nG) = d.lambda;
        dx.segment(L.mu, nG) = d.mu;
    }
    if (ctrl_.observer) {
        ObserverInputs in;
        in.omega = ps.omega_g;
        in.p_c.resize(nG);
        in.inflow.resize(nG);
        in.M.resize(nG);
        in.Lambda.resize(nG);
        in.tau_chi = Vector::Constant(nG, ctrl_.tau_chi);
        for (int g = 0; g < nG; ++g) {
            const int j = gens[g];
            in.p_c[g] = x[L.p_c + j];
            in.inflow[g] = inflow[j];
            in.M[g] = model_.buses[j].M;
            in.Lambda[g] = model_.buses[j].Lambda;
        }
        in.pM = ps.pM;
        const auto d = observer_derivatives({x.segment(L.chi, nG), x.segment(L.b, nG)}, in);
        dx.segment(L.chi, nG) = d.chi;
        dx.segment(L.b, nG) = d.b;
    }
    return dx;
}

Vector Simulator::stage_step(double t, const Vector& x, double h) {
    if (sim_.method == Method::euler) return x + h * rhs(t, x);
    const Vector k1 = rhs(t, x);
    const Vector k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1);
    const Vector k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2);
    const Vector k4 = rhs(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

bool Simulator::multipliers_ok(const Vector& x) const {
    if (!ctrl_.bounds) return true;
    for (int g = 0; g < plant_.n_generators(); ++g) {
        if (has_min_[g] && !(x[layout_.lambda + g] > 0.0)) return false;
        if (has_max_[g] && !(x[layout_.mu + g] > 0.0)) return false;
    }
    return true;
}

Vector Simulator::step(double t, const Vector& x, double h, int depth) {
    Vector next = stage_step(t, x, h);
    if (multipliers_ok(next)) return next;
    if (depth >= 30) throw IntegrationError("multiplier", t, "sign preservation failed after step halving");
    ++metrics_.halved_steps;
    const Vector mid = step(t, x, 0.5 * h, depth + 1);
    return step(t + 0.5 * h, mid, 0.5 * h, depth + 1);
}

void Simulator::check_finite(const Vector& x, double t) const {
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i])) throw IntegrationError(layout_.names[static_cast<std::size_t>(i)], t, "non-finite value");
}

std::vector<std::string> Simulator::record_columns() const {
    std::vector<std::string> cols{"t"};
    const int n = model_.n_buses();
    for (int j = 0; j < n; ++j) cols.push_back("omega_" + bus_label(model_, j));
    for (int j : plant_.generators()) cols.push_back("pM_" + bus_label(model_, j));
    for (int j = 0; j < n; ++j) cols.push_back("pc_" + bus_label(model_, j));
    const auto& L = layout_;
    for (int off : {L.zeta, L.xi, L.rho_zeta, L.rho_p, L.pi, L.phi, L.rho_pi, L.rho_phi})
        if (off >= 0)
            for (int j = 0; j < n; ++j) cols.push_back(L.names[static_cast<std::size_t>(off + j)]);
    for (int off : {L.psi_tail, L.psi_head})
        if (off >= 0)
            for (std::size_t e = 0; e < model_.comm_edges.size(); ++e)
                cols.push_back(L.names[static_cast<std::size_t>(off) + e]);
    for (int off : {L.lambda, L.mu, L.chi, L.b})
        if (off >= 0)
            for (int g = 0; g < plant_.n_generators(); ++g) cols.push_back(L.names[static_cast<std::size_t>(off + g)]);
    for (const auto& e : model_.phys_edges) cols.push_back("flow_" + edge_label(model_, e));
    if (!model_.areas.empty())
        for (int k = 0; k < model_.n_areas(); ++k) cols.push_back("areaflow_" + std::to_string(k + 1));
    if (diag_eq_) {
        for (const char* name : {"V_all", "V_B", "V_S", "V_F", "V_P", "V_D", "V_ctrl"}) cols.push_back(name);
        if (ctrl_.bounds) cols.push_back("V_G");
        if (ctrl_.observer) cols.push_back("V_E");
    }
    return cols;
}

namespace {

struct DiagValues {
    double V_all = 0, V_B = 0, V_S = 0, V_F = 0, V_P = 0, V_D = 0, V_ctrl = 0, V_G = 0, V_E = 0;
};

}  // namespace

Matrix Simulator::steady_frames(const Vector& x) const {
    const int S = ctrl_.kind == ControllerKind::tieline_scatter ? tieline_slots : base_slots;
    Matrix out(static_cast<Eigen::Index>(channels_.size()), S);
    for (std::size_t e = 0; e < model_.comm_edges.size(); ++e) {
        const bool intra = channels_[2 * e].intra_area;
        const Vector y_a = local_output(x, channels_[2 * e].from, intra);
        const Vector y_b = local_output(x, channels_[2 * e].to, intra);
        const auto z = decode_zero_delay(y_a, y_b, 0.0, 0.0);
        out.row(static_cast<Eigen::Index>(2 * e)) = (-(z.r_tail - y_a) / sqrt2).transpose();
        out.row(static_cast<Eigen::Index>(2 * e + 1)) = ((z.r_head - y_b) / sqrt2).transpose();
    }
    return out;
}

void Simulator::init_run() {
    const int n = model_.n_buses();
    pL_ = demand_at(0.0);
    disturbance_ = ChannelDisturbance(dist_spec_, static_cast<int>(channels_.size()));
    const double span = max_delay_ + 4.0 * sim_.h;
    if (uses_scattering(ctrl_.kind)) {
        const int S = ctrl_.kind == ControllerKind::tieline_scatter ? tieline_slots : base_slots;
        frames_.clear();
        const Matrix pre = sim_.frame_prehistory == FramePrehistory::initial ? steady_frames(x0_)
                                                                              : Matrix::Zero(static_cast<Eigen::Index>(channels_.size()), S);
        for (std::size_t c = 0; c < channels_.size(); ++c)
            frames_.emplace_back(S, sim_.h, span, Vector(pre.row(static_cast<Eigen::Index>(c)).transpose()), sim_.interp);
        raw_ = UniformHistory();
    } else {
        frames_.clear();
        raw_ = UniformHistory(n * broadcast_vars_, sim_.h, span, broadcast_row(x0_), sim_.interp);
    }
    metrics_ = RunMetrics{};
    metrics_.settle_threshold = sim_.settle_threshold;
    last_event_time_ = 0.0;
    for (const auto& ev : sim_.events) last_event_time_ = std::max(last_event_time_, ev.time);
    any_unsettled_after_event_ = false;
    last_unsettled_ = 0.0;
    supply_B_rate_prev_ = supply_S_rate_prev_ = 0.0;

    storage_.clear();
    if (diag_eq_ && uses_scattering(ctrl_.kind)) {
        const Vector& xs = diag_eq_->state;
        const int S = frames_.front().width();
        frame_star_.resize(static_cast<Eigen::Index>(channels_.size()) * S);
        for (std::size_t c = 0; c < channels_.size(); ++c) {
            const auto& ch = channels_[c];
            const Vector y_sender = local_output(xs, ch.from, ch.intra_area);
            const Vector y_receiver = local_output(xs, ch.to, ch.intra_area);
            const int sender_sign = -ch.receiver_sign;
            const Vector s_star = encode_send(y_sender, rotate(y_receiver), sender_sign);
            frame_star_.segment(static_cast<Eigen::Index>(c) * S, S) = s_star;
            const Vector pre = frames_[c].value(-1.0);
            storage_.emplace_back(sim_.h, ch.delay, (pre - s_star).squaredNorm());
        }
    }
}

void Simulator::snapshot(long long k, const Vector& x, Trajectory& traj, bool record) {
    const double t = static_cast<double>(k) * sim_.h;
    const auto& L = layout_;
    const int n = model_.n_buses();
    const int nG = plant_.n_generators();
    const int nE = plant_.n_edges();
    const auto& gens = plant_.generators();

    Matrix recv, frames;
    if (uses_scattering(ctrl_.kind)) {
        receive_all(t, x, recv, &frames);
        for (std::size_t c = 0; c < channels_.size(); ++c)
            frames_[c].push(Vector(frames.row(static_cast<Eigen::Index>(c)).transpose()));
        const bool all_zero = std::all_of(channels_.begin(), channels_.end(),
                                          [](const DirectedChannel& ch) { return ch.delay == 0.0; });
        if (all_zero && dist_spec_.kind == DisturbanceKind::none) {
            double worst = std::isnan(metrics_.zero_delay_decode_error) ? 0.0 : metrics_.zero_delay_decode_error;
            for (std::size_t c = 0; c < channels_.size(); ++c) {
                const auto& ch = channels_[c];
                const Vector expect = rotate(local_output(x, ch.from, ch.intra_area));
                const Vector got = recv.row(static_cast<Eigen::Index>(c)).transpose();
                worst = std::max(worst, (got - expect).cwiseAbs().maxCoeff());
            }
            metrics_.zero_delay_decode_error = worst;
        }
    } else {
        raw_.push(broadcast_row(x));
    }

    PlantState ps{x.segment(L.eta, nE), x.segment(L.omega_g, nG), x.segment(L.pM, nG)};
    const Vector omega = plant_.bus_frequencies(ps, pL_);
    const double w_inf = omega.cwiseAbs().maxCoeff();
    if (t >= last_event_time_ && w_inf >= sim_.settle_threshold) {
        any_unsettled_after_event_ = true;
        last_unsettled_ = t;
    }
    if (nE > 0) {
        const double eta_max = ps.eta.cwiseAbs().maxCoeff();
        metrics_.max_abs_eta = std::max(metrics_.max_abs_eta, eta_max);
        if (eta_max >= std::numbers::pi / 2.0) metrics_.angle_warning = true;
    }
    for (int g = 0; g < nG; ++g) {
        if (ctrl_.bounds && has_min_[g]) metrics_.min_multiplier = std::min(metrics_.min_multiplier, x[L.lambda + g]);
        if (ctrl_.bounds && has_max_[g]) metrics_.min_multiplier = std::min(metrics_.min_multiplier, x[L.mu + g]);
    }

    DiagValues dv;
    if (diag_eq_) {
        const Vector& xs = diag_eq_->state;
        Vector M(nG), tau(nG), kg(nG), kc(nG), Y(nE);
        for (int g = 0; g < nG; ++g) {
            const auto& bus = model_.buses[gens[g]];
            M[g] = bus.M;
            tau[g] = bus.tau;
            kg[g] = bus.k_g;
            kc[g] = bus.k_c;
        }
        for (int e = 0; e < nE; ++e) Y[e] = model_.phys_edges[e].Y;
        dv.V_F = V_F(M, ps.omega_g, xs.segment(L.omega_g, nG));
        dv.V_P = V_P(Y, ps.eta, xs.segment(L.eta, nE));
        dv.V_D = V_D(tau, kg, kc, ps.pM, xs.segment(L.pM, nG));
        const Vector ones = Vector::Ones(n);
        auto quad = [&](int off) { return weighted_quadratic(ones, x.segment(off, n), xs.segment(off, n)); };
        auto comp = [&](int rho, int off) {
            return compensated_quadratic(x.segment(rho, n), x.segment(off, n), xs.segment(off, n));
        };
        switch (ctrl_.kind) {
            case ControllerKind::naive: {
                const auto m = static_cast<Eigen::Index>(model_.comm_edges.size());
                Vector inv_alpha(m);
                for (Eigen::Index e = 0; e < m; ++e) inv_alpha[e] = 1.0 / model_.comm_edges[e].alpha;
                dv.V_ctrl = quad(L.p_c) +
                            0.5 * (weighted_quadratic(inv_alpha, x.segment(L.psi_tail, m), xs.segment(L.psi_tail, m)) +
                                   weighted_quadratic(inv_alpha, x.segment(L.psi_head, m), xs.segment(L.psi_head, m)));
                break;
            }
            case ControllerKind::xi: dv.V_ctrl = quad(L.p_c) + quad(L.xi); break;
            case ControllerKind::reform: dv.V_ctrl = quad(L.p_c) + quad(L.zeta); break;
            case ControllerKind::scatter: dv.V_ctrl = comp(L.rho_p, L.p_c) + comp(L.rho_zeta, L.zeta); break;
            case ControllerKind::tieline_direct:
                dv.V_ctrl = quad(L.p_c) + quad(L.zeta) + quad(L.pi) + quad(L.phi);
                break;
            case ControllerKind::tieline_scatter:
                dv.V_ctrl = comp(L.rho_p, L.p_c) + comp(L.rho_zeta, L.zeta) + comp(L.rho_pi, L.pi) +
                            comp(L.rho_phi, L.phi);
                break;
        }
        dv.V_B = dv.V_F + dv.V_P + dv.V_D + dv.V_ctrl;
        if (ctrl_.bounds)
            dv.V_G = V_G(x.segment(L.lambda, nG), xs.segment(L.lambda, nG), x.segment(L.mu, nG),
                         xs.segment(L.mu, nG), has_min_, has_max_);
        if (ctrl_.observer) {
            dv.V_E = V_E(M, x.segment(L.b, nG), xs.segment(L.b, nG), ps.omega_g, xs.segment(L.omega_g, nG),
                         Vector::Constant(nG, ctrl_.tau_chi), x.segment(L.chi, nG), xs.segment(L.chi, nG));
        }
        double rate = 0.0;
        if (uses_scattering(ctrl_.kind)) {
            const int S = static_cast<int>(frames.cols());
            for (std::size_t c = 0; c < channels_.size(); ++c) {
                const auto& ch = channels_[c];
                const auto ci = static_cast<Eigen::Index>(c);
                const Vector diff = frames.row(ci).transpose() - frame_star_.segment(ci * S, S);
                storage_[c].push(diff.squaredNorm());
                dv.V_S += ch.alpha * storage_[c].value();
                const Vector y_t = local_output(x, ch.to, ch.intra_area) - local_output(xs, ch.to, ch.intra_area);
                const Vector r_t = recv.row(ci).transpose() - rotate(local_output(xs, ch.from, ch.intra_area));
                rate += ch.alpha * r_t.dot(y_t);
            }
        }
        dv.V_all = dv.V_B + dv.V_S + dv.V_G + dv.V_E;
        auto& ds = traj.diagnostics;
        const double h = sim_.h;
        const double sB = ds.supply_B.empty() ? 0.0 : ds.supply_B.back() + 0.5 * h * (supply_B_rate_prev_ + rate);
        const double sS = ds.supply_S.empty() ? 0.0 : ds.supply_S.back() + 0.5 * h * (supply_S_rate_prev_ - rate);
        supply_B_rate_prev_ = rate;
        supply_S_rate_prev_ = -rate;
        ds.t.push_back(t);
        ds.V_all.push_back(dv.V_all);
        ds.V_B.push_back(dv.V_B);
        ds.V_S.push_back(dv.V_S);
        ds.supply_B.push_back(sB);
        ds.supply_S.push_back(sS);
    }

    if (!record) return;
    std::vector<double> row;
    row.reserve(traj.columns.size());
    row.push_back(t);
    for (int j = 0; j < n; ++j) row.push_back(omega[j]);
    for (int g = 0; g < nG; ++g) row.push_back(ps.pM[g]);
    for (int j = 0; j < n; ++j) row.push_back(x[L.p_c + j]);
    for (int off : {L.zeta, L.xi, L.rho_zeta, L.rho_p, L.pi, L.phi, L.rho_pi, L.rho_phi})
        if (off >= 0)
            for (int j = 0; j < n; ++j) row.push_back(x[off + j]);
    for (int off : {L.psi_tail, L.psi_head})
        if (off >= 0)
            for (std::size_t e = 0; e < model_.comm_edges.size(); ++e) row.push_back(x[off + static_cast<int>(e)]);
    for (int off : {L.lambda, L.mu, L.chi, L.b})
        if (off >= 0)
            for (int g = 0; g < nG; ++g) row.push_back(x[off + g]);
    const Vector flows = line_flows(ps.eta, model_.phys_edges);
    for (int e = 0; e < nE; ++e) row.push_back(flows[e]);
    if (!model_.areas.empty()) {
        const Vector inflow = plant_.net_inflow(flows);
        const auto area = model_.area_of_bus();
        Vector af = Vector::Zero(model_.n_areas());
        for (int j = 0; j < n; ++j) af[area[j]] += inflow[j];
        for (int kk = 0; kk < af.size(); ++kk) row.push_back(af[kk]);
    }
    if (diag_eq_) {
        for (double v : {dv.V_all, dv.V_B, dv.V_S, dv.V_F, dv.V_P, dv.V_D, dv.V_ctrl}) row.push_back(v);
        if (ctrl_.bounds) row.push_back(dv.V_G);
        if (ctrl_.observer) row.push_back(dv.V_E);
    }
    traj.rows.push_back(std::move(row));
}

Trajectory Simulator::run() {
    init_run();
    Trajectory traj;
    traj.columns = record_columns();
    const auto n_steps = static_cast<long long>(std::llround(sim_.t_end / sim_.h));
    std::vector<long long> event_steps;
    for (const auto& ev : sim_.events) event_steps.push_back(std::llround(ev.time / sim_.h));

    Vector x = x0_;
    check_finite(x, 0.0);
    long long k = 0;
    std::size_t next_event = 0;
    for (; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * sim_.h;
        bool changed = false;
        while (next_event < event_steps.size() && event_steps[next_event] <= k) {
            ++next_event;
            changed = true;
        }
        if (changed) pL_ = demand_at(sim_.events[next_event - 1].time);
        disturbance_.advance_step();
        snapshot(k, x, traj, k % sim_.record_every == 0);
        Vector next = step(t, x, sim_.h, 0);
        const double t_next = static_cast<double>(k + 1) * sim_.h;
        check_finite(next, t_next);
        x = std::move(next);
        if (x.cwiseAbs().maxCoeff() > sim_.divergence_threshold) {
            metrics_.diverged = true;
            metrics_.diverged_at = t_next;
            ++k;
            break;
        }
    }
    disturbance_.advance_step();
    snapshot(k, x, traj, true);

    // Summary metrics.
    const auto& L = layout_;
    const int nG = plant_.n_generators();
    const int nE = plant_.n_edges();
    metrics_.steps = k;
    metrics_.t_final = static_cast<double>(k) * sim_.h;
    PlantState ps{x.segment(L.eta, nE), x.segment(L.omega_g, nG), x.segment(L.pM, nG)};
    const Vector omega = plant_.bus_frequencies(ps, pL_);
    metrics_.terminal_omega_inf = omega.cwiseAbs().maxCoeff();
    if (!metrics_.diverged && metrics_.terminal_omega_inf < sim_.settle_threshold)
        metrics_.settling_time = any_unsettled_after_event_ ? last_unsettled_ + sim_.h : last_event_time_;
    metrics_.terminal_pM = ps.pM;
    try {
        const auto sol = oracle();
        metrics_.oracle_pM = sol.pM_star;
        metrics_.terminal_pM_error = (ps.pM - sol.pM_star).cwiseAbs().maxCoeff();
    } catch (const InfeasibleError&) {
    }
    if (!model_.areas.empty()) {
        const Vector inflow = plant_.net_inflow(line_flows(ps.eta, model_.phys_edges));
        const auto area = model_.area_of_bus();
        metrics_.terminal_area_flows = Vector::Zero(model_.n_areas());
        metrics_.scheduled_area_flows = Vector::Zero(model_.n_areas());
        for (int j = 0; j < model_.n_buses(); ++j) metrics_.terminal_area_flows[area[j]] += inflow[j];
        for (int kk = 0; kk < model_.n_areas(); ++kk) metrics_.scheduled_area_flows[kk] = model_.areas[kk].schedule;
        metrics_.terminal_areaflow_error =
            (metrics_.terminal_area_flows - metrics_.scheduled_area_flows).cwiseAbs().maxCoeff();
    }
    Vector pc_gen(nG);
    for (int g = 0; g < nG; ++g) pc_gen[g] = x[L.p_c + plant_.generators()[g]];
    if (!ctrl_.bounds) metrics_.equilibrium_residual = plant_.equilibrium_residual(ps, pc_gen, pL_);
    traj.metrics = metrics_;
    traj.terminal_state = x;
    return traj;
}

}  // namespace freqctl
