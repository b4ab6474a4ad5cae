#pragma once

// Closed-loop delay differential-algebraic system: plant, controller and
// channels stacked into one state vector and advanced with a fixed step.
// Delayed values are read from histories frozen at the start of each step.

#include "freqctl/channel.hpp"
#include "freqctl/controller.hpp"
#include "freqctl/history.hpp"
#include "freqctl/lyapunov.hpp"
#include "freqctl/opt.hpp"
#include "freqctl/plant.hpp"
#include "freqctl/trajectory.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace freqctl {

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& variable, double t, const std::string& what);
    const std::string& variable() const { return variable_; }
    double time() const { return time_; }

private:
    std::string variable_;
    double time_;
};

enum class Method { rk4, euler };

/// Scattering frames before t = 0: all zero, or the frames the initial
/// state would exchange over undelayed links.
enum class FramePrehistory { zero, initial };

/// Demand change at a time. `apply_configured` switches every bus to its
/// configured pL; otherwise the listed (bus index, value) pairs are set.
struct LoadEvent {
    double time = 0.0;
    bool apply_configured = false;
    std::vector<std::pair<int, double>> set;
};

struct SimConfig {
    double h = 1e-3;
    double t_end = 200.0;
    Method method = Method::rk4;
    int record_every = 100;
    Interpolation interp = Interpolation::linear;
    std::vector<LoadEvent> events;
    double divergence_threshold = 1e3;
    double settle_threshold = 1e-3;
    FramePrehistory frame_prehistory = FramePrehistory::zero;
};

struct ControllerConfig {
    ControllerKind kind = ControllerKind::scatter;
    bool bounds = false;
    bool observer = false;
    double tau_chi = 0.1;
};

/// Offsets of each block in the flat state vector, -1 when absent.
struct StateLayout {
    int eta = -1, omega_g = -1, pM = -1;
    int psi_tail = -1, psi_head = -1, xi = -1;
    int rho_zeta = -1, zeta = -1, rho_p = -1, p_c = -1;
    int rho_pi = -1, pi = -1, rho_phi = -1, phi = -1;
    int lambda = -1, mu = -1, chi = -1, b = -1;
    int size = 0;
    std::vector<std::string> names;  // one label per entry
};

/// Equilibrium values in the same layout as the state, plus the demand
/// vector they belong to.
struct Equilibrium {
    Vector state;
    Vector pL;
    DispatchSolution dispatch;
    FlowSolution flow;
};

class Simulator {
public:
    Simulator(NetworkModel model, ControllerConfig controller, SimConfig sim, std::vector<double> delays,
              DisturbanceSpec disturbance = {});
    // The plant keeps a pointer to model_, so instances stay in place.
    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    const NetworkModel& model() const { return model_; }
    const StateLayout& layout() const { return layout_; }
    const std::vector<DirectedChannel>& channels() const { return channels_; }
    const ControllerConfig& controller() const { return ctrl_; }
    const SimConfig& sim() const { return sim_; }

    /// Flat start: plant and controller at zero, multipliers at one.
    Vector default_initial_state() const;
    void set_initial_state(const Vector& x0);

    /// Demand in force at time t (after every event with time <= t).
    Vector demand_at(double t) const;
    /// Demand after every event, which the equilibrium refers to.
    Vector final_demand() const;

    /// Oracle solution matching the active controller and extensions.
    DispatchSolution oracle() const;
    /// Equilibrium of the closed loop for the final demand. Null-space
    /// constants are taken from `terminal` when given, zero otherwise.
    Equilibrium equilibrium(const Vector* terminal = nullptr) const;

    /// Enables inline Lyapunov diagnostics against the given equilibrium.
    void set_diagnostics(const Equilibrium& eq) { diag_eq_ = eq; }

    Trajectory run();

    /// Right-hand side at (t, x) with the current histories. Exposed for
    /// property tests; `run` drives it internally.
    Vector rhs(double t, const Vector& x);

private:
    void build_layout();
    Vector broadcast_row(const Vector& x) const;
    Vector local_output(const Vector& x, int bus, bool intra) const;
    void receive_all(double t, const Vector& x, Matrix& recv, Matrix* frames_out);
    Vector step(double t, const Vector& x, double h, int depth);
    Vector stage_step(double t, const Vector& x, double h);
    bool multipliers_ok(const Vector& x) const;
    void check_finite(const Vector& x, double t) const;
    void snapshot(long long k, const Vector& x, Trajectory& traj, bool record);
    std::vector<std::string> record_columns() const;
    void init_run();
    Matrix steady_frames(const Vector& x) const;

    NetworkModel model_;
    ControllerConfig ctrl_;
    SimConfig sim_;
    std::vector<double> delays_;
    DisturbanceSpec dist_spec_;

    PlantModel plant_;
    std::vector<DirectedChannel> channels_;
    StateLayout layout_;
    Vector x0_;
    Vector schedule_injection_;
    std::vector<bool> has_min_, has_max_;
    Vector pmin_, pmax_;
    int broadcast_vars_ = 0;
    double max_delay_ = 0.0;

    // run state
    Vector pL_;
    ChannelDisturbance disturbance_;
    UniformHistory raw_;
    std::vector<UniformHistory> frames_;
    std::optional<Equilibrium> diag_eq_;
    std::vector<ChannelStorage> storage_;
    Vector frame_star_;  // per channel, concatenated
    double supply_B_rate_prev_ = 0.0;
    double supply_S_rate_prev_ = 0.0;
    double last_event_time_ = 0.0;
    double last_unsettled_ = 0.0;
    bool any_unsettled_after_event_ = false;
    RunMetrics metrics_;
};

/// Delays per directed channel from a uniform value.
std::vector<double> uniform_delays(const NetworkModel& model, double T);
/// Seeded draws from [lo, hi) per directed channel.
std::vector<double> interval_delays(const NetworkModel& model, double lo, double hi, std::uint64_t seed);

}  // namespace freqctl
