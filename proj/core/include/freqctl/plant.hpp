#pragma once

// Physical layer: swing dynamics at generators, algebraic balance at loads,
// lossless line flows and first-order generation.

#include "freqctl/network.hpp"

namespace freqctl {

struct PlantState {
    Vector eta;      // per physical edge
    Vector omega_g;  // per generator, in generator order
    Vector pM;       // per generator
};

struct PlantDerivatives {
    Vector eta;
    Vector omega_g;
    Vector pM;
};

/// p_e = Y_e sin(eta_e).
Vector line_flows(const Vector& eta, const std::vector<LineParams>& phys_edges);

/// Algebraic load-bus frequencies from the power balance at each load bus.
/// `inflow` is the net line inflow (D p) restricted to the load buses.
Vector load_bus_frequencies(const Vector& inflow, const Vector& pL, const Vector& Lambda);

/// u = k_c (p^c - omega) + pM / k_g - k_c Q'(pM)
double generation_input(double p_c, double omega, double pM, const BusParams& bus);

/// Same as generation_input with Q'(pM) replaced by Q'(pM) - lambda^2 + mu^2.
double generation_input_bounded(double p_c, double omega, double pM, double lambda, double mu,
                                const BusParams& bus);

/// Index bookkeeping and incidence data shared by every plant evaluation.
class PlantModel {
public:
    explicit PlantModel(const NetworkModel& model);

    const NetworkModel& model() const { return *model_; }
    const Matrix& incidence() const { return D_; }
    const std::vector<int>& generators() const { return gens_; }
    const std::vector<int>& loads() const { return loads_; }
    /// Generator position of a bus, -1 for load buses.
    int generator_slot(int bus) const { return gen_slot_[bus]; }
    int n_buses() const { return static_cast<int>(gen_slot_.size()); }
    int n_generators() const { return static_cast<int>(gens_.size()); }
    int n_edges() const { return static_cast<int>(D_.cols()); }

    /// Net line inflow per bus: (D p)_j.
    Vector net_inflow(const Vector& flows) const { return D_ * flows; }

    /// Full per-bus frequency vector with load buses eliminated.
    Vector bus_frequencies(const PlantState& state, const Vector& pL_bus) const;

    /// Per-bus mechanical power with zeros at load buses.
    Vector bus_generation(const Vector& pM) const;

    /// Derivatives for a given generation input u (per generator).
    PlantDerivatives derivatives(const PlantState& state, const Vector& u, const Vector& pL_bus) const;

    /// Largest violation among the five equilibrium conditions. `omega_bus`
    /// carries one value per bus; `p_c` one value per generator.
    double equilibrium_residual(const PlantState& state, const Vector& omega_bus, const Vector& p_c,
                                const Vector& pL_bus) const;
    /// Same, with load-bus frequencies taken from the algebraic balance.
    double equilibrium_residual(const PlantState& state, const Vector& p_c, const Vector& pL_bus) const;

private:
    const NetworkModel* model_;
    Matrix D_;
    std::vector<int> gens_;
    std::vector<int> loads_;
    std::vector<int> gen_slot_;
};

}  // namespace freqctl
