#include "freqctl/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace freqctl {

Vector line_flows(const Vector& eta, const std::vector<LineParams>& phys_edges) {
    Vector p(eta.size());
    for (Eigen::Index e = 0; e < eta.size(); ++e) p[e] = phys_edges[e].Y * std::sin(eta[e]);
    return p;
}

Vector load_bus_frequencies(const Vector& inflow, const Vector& pL, const Vector& Lambda) {
    Vector omega(inflow.size());
    for (Eigen::Index j = 0; j < inflow.size(); ++j) {
        if (!(Lambda[j] > 0.0)) throw std::invalid_argument("zero damping at a load bus");
        omega[j] = (-pL[j] + inflow[j]) / Lambda[j];
    }
    return omega;
}

double generation_input(double p_c, double omega, double pM, const BusParams& bus) {
    const double grad = bus.cost_q * (pM - bus.cost_c);
    return bus.k_c * (p_c - omega) + pM / bus.k_g - bus.k_c * grad;
}

double generation_input_bounded(double p_c, double omega, double pM, double lambda, double mu,
                                const BusParams& bus) {
    const double grad = bus.cost_q * (pM - bus.cost_c) - lambda * lambda + mu * mu;
    return bus.k_c * (p_c - omega) + pM / bus.k_g - bus.k_c * grad;
}

PlantModel::PlantModel(const NetworkModel& model)
    : model_(&model),
      D_(incidence_matrix(model.phys_edges, model.n_buses())),
      gens_(model.generators()),
      loads_(model.loads()),
      gen_slot_(static_cast<std::size_t>(model.n_buses()), -1) {
    for (std::size_t g = 0; g < gens_.size(); ++g) gen_slot_[gens_[g]] = static_cast<int>(g);
}

Vector PlantModel::bus_generation(const Vector& pM) const {
    Vector out = Vector::Zero(n_buses());
    for (int g = 0; g < n_generators(); ++g) out[gens_[g]] = pM[g];
    return out;
}

Vector PlantModel::bus_frequencies(const PlantState& state, const Vector& pL_bus) const {
    const Vector inflow = net_inflow(line_flows(state.eta, model_->phys_edges));
    Vector omega(n_buses());
    for (int g = 0; g < n_generators(); ++g) omega[gens_[g]] = state.omega_g[g];
    for (int j : loads_) omega[j] = (-pL_bus[j] + inflow[j]) / model_->buses[j].Lambda;
    return omega;
}

PlantDerivatives PlantModel::derivatives(const PlantState& state, const Vector& u, const Vector& pL_bus) const {
    const Vector inflow = net_inflow(line_flows(state.eta, model_->phys_edges));
    Vector omega(n_buses());
    for (int g = 0; g < n_generators(); ++g) omega[gens_[g]] = state.omega_g[g];
    for (int j : loads_) omega[j] = (-pL_bus[j] + inflow[j]) / model_->buses[j].Lambda;

    PlantDerivatives d;
    d.eta = -D_.transpose() * omega;
    d.omega_g.resize(n_generators());
    d.pM.resize(n_generators());
    for (int g = 0; g < n_generators(); ++g) {
        const int j = gens_[g];
        const auto& bus = model_->buses[j];
        d.omega_g[g] = (-pL_bus[j] + state.pM[g] - bus.Lambda * omega[j] + inflow[j]) / bus.M;
        d.pM[g] = (-state.pM[g] + bus.k_g * u[g]) / bus.tau;
    }
    return d;
}

double PlantModel::equilibrium_residual(const PlantState& state, const Vector& omega_bus, const Vector& p_c,
                                        const Vector& pL_bus) const {
    const Vector flows = line_flows(state.eta, model_->phys_edges);
    const Vector inflow = net_inflow(flows);
    double worst = 0.0;
    for (std::size_t e = 0; e < model_->phys_edges.size(); ++e) {
        const auto& line = model_->phys_edges[e];
        worst = std::max(worst, std::abs(omega_bus[line.from] - omega_bus[line.to]));
    }
    for (int j = 0; j < n_buses(); ++j) {
        const auto& bus = model_->buses[j];
        const int g = gen_slot_[j];
        const double pm = g >= 0 ? state.pM[g] : 0.0;
        worst = std::max(worst, std::abs(-pL_bus[j] + pm - bus.Lambda * omega_bus[j] + inflow[j]));
        if (g >= 0) {
            const double u = generation_input(p_c[g], omega_bus[j], pm, bus);
            worst = std::max(worst, std::abs(pm - bus.k_g * u));
        }
    }
    // Flow definition holds by construction since flows are computed from eta.
    return worst;
}

double PlantModel::equilibrium_residual(const PlantState& state, const Vector& p_c, const Vector& pL_bus) const {
    return equilibrium_residual(state, bus_frequencies(state, pL_bus), p_c, pL_bus);
}

}  // namespace freqctl
