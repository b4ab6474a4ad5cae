#pragma once

// Scenario files: a sectioned text format holding the network, controller,
// delays, disturbance, integration settings, load events, pass criteria and
// output paths. Parsing is strict: unknown sections or keys are errors.

#include "freqctl/system.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace freqctl {

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& message);
    int line() const { return line_; }  // 0 when not tied to a line

private:
    int line_;
};

enum class DelayMode { uniform, interval, explicit_edges };

struct DelaySpec {
    DelayMode mode = DelayMode::uniform;
    double uniform = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::optional<std::uint64_t> seed;
    // comm edge index -> (tail to head, head to tail)
    std::map<int, std::pair<double, double>> per_edge;
};

enum class Expectation { restore, fail };

struct Criteria {
    Expectation expect = Expectation::restore;
    double omega_inf_max = 1e-3;
    std::optional<double> pM_error_max;
    std::optional<double> areaflow_error_max;
    double fail_omega_min = 1e-2;  // asserted-failure scenarios
    bool check_multipliers = false;
};

struct Outputs {
    std::string csv;
    std::string metrics;
    bool diagnostics = false;
};

struct Scenario {
    std::string name;
    NetworkModel model;
    ControllerConfig controller;
    DelaySpec delays;
    DisturbanceSpec disturbance;
    bool disturbance_seeded = false;
    SimConfig sim;
    Criteria criteria;
    Outputs outputs;
};

/// Parses and validates. Overrides are `section.key=value` strings applied
/// before interpretation, e.g. `sim.t_end=50` or `buses.1.pmax=0.6`.
Scenario parse_scenario(const std::string& text, const std::vector<std::string>& overrides = {});
Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});

/// Canonical text form; parse(serialize(s)) reproduces s.
std::string serialize(const Scenario& scenario);

/// Applies one override through the text form.
Scenario with_override(const Scenario& scenario, const std::string& assignment);

/// Per directed channel delays (index 2e + direction).
std::vector<double> resolve_delays(const Scenario& scenario);

/// Builds the simulator the scenario describes.
Simulator make_simulator(const Scenario& scenario);

}  // namespace freqctl
