#pragma once

// Optimization oracle for the generation regulation problems, solved from
// their KKT conditions by bisection on the price. Also constructs the
// equilibrium line angles through a lossless power-flow solve.

#include "freqctl/cost.hpp"
#include "freqctl/network.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace freqctl {

class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DispatchProblem { ogr, ogr2, ogr3 };

struct DispatchSolution {
    DispatchProblem problem = DispatchProblem::ogr;
    Vector pM_star;     // per generator
    Vector beta;        // one price, or one per area for OGR-2
    Vector lambda_bar;  // lower-bound multipliers (OGR-3), zeros otherwise
    Vector mu_bar;      // upper-bound multipliers (OGR-3), zeros otherwise
    bool feasible = true;
    std::vector<std::string> warnings;
};

/// Quadratic costs from the model's bus parameters, one per generator.
std::vector<std::unique_ptr<Cost>> generator_costs(const NetworkModel& model);

DispatchSolution solve_ogr(const NetworkModel& model);
/// General strictly convex costs with a total demand to meet.
DispatchSolution solve_ogr(const std::vector<const Cost*>& costs, double total_load);
DispatchSolution solve_ogr2(const NetworkModel& model);
DispatchSolution solve_ogr3(const NetworkModel& model);

/// Largest violation of stationarity, primal feasibility, dual feasibility
/// and complementary slackness for the solution's problem.
double kkt_residual(const NetworkModel& model, const DispatchSolution& sol);

struct FlowSolution {
    Vector theta;  // bus angles, theta_0 = 0
    Vector eta;    // per physical edge: theta_from - theta_to
    Vector flows;  // Y sin eta
    double residual = 0.0;
    int iterations = 0;
    bool secure = true;  // all |eta| < pi/2
};

/// Lossless flow solve with `injection` = pM - pL per bus (must sum to 0).
/// Newton's method seeded by the linearised (DC) solution.
FlowSolution solve_power_flow(const NetworkModel& model, const Vector& injection);

}  // namespace freqctl
