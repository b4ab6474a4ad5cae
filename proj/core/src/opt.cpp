#include "freqctl/opt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace freqctl {

namespace {

double clamp_optional(double x, const std::optional<double>& lo, const std::optional<double>& hi) {
    if (lo && x < *lo) x = *lo;
    if (hi && x > *hi) x = *hi;
    return x;
}

// Finds beta with total(beta) = target for a nondecreasing total().
double bisect_price(const std::function<double(double)>& total, double target) {
    double lo = -1.0;
    double hi = 1.0;
    for (int grow = 0; total(lo) > target; ++grow) {
        if (grow > 1100) throw InfeasibleError("price bracket did not close from below");
        lo *= 2.0;
    }
    for (int grow = 0; total(hi) < target; ++grow) {
        if (grow > 1100) throw InfeasibleError("price bracket did not close from above");
        hi *= 2.0;
    }
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (total(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    // Pick the endpoint with the smaller balance error.
    return std::abs(total(lo) - target) <= std::abs(total(hi) - target) ? lo : hi;
}

struct GeneratorSet {
    std::vector<int> buses;
    std::vector<std::unique_ptr<Cost>> costs;
};

DispatchSolution dispatch_group(const std::vector<const Cost*>& costs, const std::vector<const BusParams*>& params,
                                double target, bool use_bounds) {
    DispatchSolution sol;
    const auto n = static_cast<Eigen::Index>(costs.size());
    sol.pM_star = Vector::Zero(n);
    sol.lambda_bar = Vector::Zero(n);
    sol.mu_bar = Vector::Zero(n);
    sol.beta = Vector::Zero(1);
    if (n == 0) {
        if (std::abs(target) > 1e-12) throw InfeasibleError("demand without any generator");
        return sol;
    }
    if (use_bounds) {
        double lo_sum = 0.0;
        double hi_sum = 0.0;
        bool lo_finite = true;
        bool hi_finite = true;
        for (const auto* p : params) {
            if (p->pM_min) lo_sum += *p->pM_min; else lo_finite = false;
            if (p->pM_max) hi_sum += *p->pM_max; else hi_finite = false;
        }
        if ((lo_finite && target < lo_sum - 1e-12) || (hi_finite && target > hi_sum + 1e-12))
            throw InfeasibleError("generation bounds cannot meet the demand");
    }
    auto unit = [&](Eigen::Index g, double beta) {
        const double p = costs[g]->gradient_inverse(beta);
        return use_bounds ? clamp_optional(p, params[g]->pM_min, params[g]->pM_max) : p;
    };

    const bool all_quadratic = std::all_of(costs.begin(), costs.end(), [](const Cost* c) {
        return dynamic_cast<const QuadraticCost*>(c) != nullptr;
    });
    double beta = 0.0;
    if (all_quadratic && !use_bounds) {
        double sum_c = 0.0;
        double sum_inv_q = 0.0;
        for (const Cost* c : costs) {
            const auto* quad = static_cast<const QuadraticCost*>(c);
            sum_c += quad->c();
            sum_inv_q += 1.0 / quad->q();
        }
        beta = (target - sum_c) / sum_inv_q;
    } else {
        beta = bisect_price(
            [&](double b) {
                double s = 0.0;
                for (Eigen::Index g = 0; g < n; ++g) s += unit(g, b);
                return s;
            },
            target);
        if (all_quadratic) {
            // Polish: with the active set fixed the price is affine in the demand.
            double fixed = 0.0;
            double sum_c = 0.0;
            double sum_inv_q = 0.0;
            for (Eigen::Index g = 0; g < n; ++g) {
                const auto* quad = static_cast<const QuadraticCost*>(costs[g]);
                const double free_p = quad->gradient_inverse(beta);
                const double p = unit(g, beta);
                if (p != free_p) {
                    fixed += p;
                } else {
                    sum_c += quad->c();
                    sum_inv_q += 1.0 / quad->q();
                }
            }
            if (sum_inv_q > 0.0) {
                const double polished = (target - fixed - sum_c) / sum_inv_q;
                double s = 0.0;
                for (Eigen::Index g = 0; g < n; ++g) s += unit(g, polished);
                if (std::abs(s - target) <= std::abs([&] {
                        double t = 0.0;
                        for (Eigen::Index g = 0; g < n; ++g) t += unit(g, beta);
                        return t;
                    }() - target))
                    beta = polished;
            }
        }
    }
    for (Eigen::Index g = 0; g < n; ++g) {
        sol.pM_star[g] = unit(g, beta);
        if (use_bounds) {
            const double grad = costs[g]->gradient(sol.pM_star[g]);
            if (params[g]->pM_max && sol.pM_star[g] >= *params[g]->pM_max)
                sol.mu_bar[g] = std::max(0.0, beta - grad);
            if (params[g]->pM_min && sol.pM_star[g] <= *params[g]->pM_min)
                sol.lambda_bar[g] = std::max(0.0, grad - beta);
        }
    }
    sol.beta[0] = beta;
    return sol;
}

std::vector<const BusParams*> generator_params(const NetworkModel& model, const std::vector<int>& gens) {
    std::vector<const BusParams*> out;
    for (int j : gens) out.push_back(&model.buses[j]);
    return out;
}

std::vector<const Cost*> raw(const std::vector<std::unique_ptr<Cost>>& costs) {
    std::vector<const Cost*> out;
    for (const auto& c : costs) out.push_back(c.get());
    return out;
}

double total_load(const NetworkModel& model) {
    double s = 0.0;
    for (const auto& b : model.buses) s += b.pL;
    return s;
}

}  // namespace

std::vector<std::unique_ptr<Cost>> generator_costs(const NetworkModel& model) {
    std::vector<std::unique_ptr<Cost>> out;
    for (int j : model.generators())
        out.push_back(std::make_unique<QuadraticCost>(model.buses[j].cost_q, model.buses[j].cost_c));
    return out;
}

DispatchSolution solve_ogr(const std::vector<const Cost*>& costs, double load) {
    std::vector<const BusParams*> none(costs.size(), nullptr);
    auto sol = dispatch_group(costs, none, load, false);
    sol.problem = DispatchProblem::ogr;
    return sol;
}

DispatchSolution solve_ogr(const NetworkModel& model) {
    const auto costs = generator_costs(model);
    return solve_ogr(raw(costs), total_load(model));
}

DispatchSolution solve_ogr3(const NetworkModel& model) {
    const auto gens = model.generators();
    const auto costs = generator_costs(model);
    auto sol = dispatch_group(raw(costs), generator_params(model, gens), total_load(model), true);
    sol.problem = DispatchProblem::ogr3;
    return sol;
}

DispatchSolution solve_ogr2(const NetworkModel& model) {
    const auto gens = model.generators();
    const int K = model.n_areas();
    DispatchSolution sol;
    sol.problem = DispatchProblem::ogr2;
    sol.pM_star = Vector::Zero(static_cast<Eigen::Index>(gens.size()));
    sol.lambda_bar = Vector::Zero(sol.pM_star.size());
    sol.mu_bar = Vector::Zero(sol.pM_star.size());
    sol.beta = Vector::Zero(K);
    if (model.areas.empty()) {
        auto single = solve_ogr(model);
        single.problem = DispatchProblem::ogr2;
        return single;
    }
    double schedule_sum = 0.0;
    for (const auto& a : model.areas) schedule_sum += a.schedule;
    if (std::abs(schedule_sum) > 1e-12)
        throw InfeasibleError("tie-line schedules must sum to zero over all areas");

    const auto area = model.area_of_bus();
    for (int k = 0; k < K; ++k) {
        std::vector<int> members;
        std::vector<std::size_t> slots;
        double load = 0.0;
        for (int j = 0; j < model.n_buses(); ++j)
            if (area[j] == k) load += model.buses[j].pL;
        for (std::size_t g = 0; g < gens.size(); ++g)
            if (area[gens[g]] == k) {
                members.push_back(gens[g]);
                slots.push_back(g);
            }
        // The schedule is the area's net line inflow, so generation covers
        // the area's demand minus what it imports.
        const double target = load - model.areas[k].schedule;
        std::vector<std::unique_ptr<Cost>> costs;
        for (int j : members)
            costs.push_back(std::make_unique<QuadraticCost>(model.buses[j].cost_q, model.buses[j].cost_c));
        if (members.empty() && std::abs(target) > 1e-12)
            throw InfeasibleError("area " + std::to_string(k + 1) + " has demand but no generator");
        auto part = dispatch_group(raw(costs), generator_params(model, members), target, false);
        for (std::size_t m = 0; m < slots.size(); ++m) sol.pM_star[static_cast<Eigen::Index>(slots[m])] = part.pM_star[m];
        sol.beta[k] = part.beta[0];
    }
    return sol;
}

double kkt_residual(const NetworkModel& model, const DispatchSolution& sol) {
    const auto gens = model.generators();
    const auto costs = generator_costs(model);
    const auto area = model.area_of_bus();
    double worst = 0.0;
    const int K = sol.problem == DispatchProblem::ogr2 ? model.n_areas() : 1;
    std::vector<double> balance(static_cast<std::size_t>(K), 0.0);
    for (int j = 0; j < model.n_buses(); ++j) balance[K == 1 ? 0 : area[j]] += model.buses[j].pL;
    if (sol.problem == DispatchProblem::ogr2 && !model.areas.empty())
        for (int k = 0; k < K; ++k) balance[k] -= model.areas[k].schedule;
    for (std::size_t g = 0; g < gens.size(); ++g) {
        const auto gi = static_cast<Eigen::Index>(g);
        const int k = K == 1 ? 0 : area[gens[g]];
        const double p = sol.pM_star[gi];
        balance[k] -= p;
        const double beta = sol.beta[k];
        const double lam = sol.lambda_bar[gi];
        const double mu = sol.mu_bar[gi];
        worst = std::max(worst, std::abs(costs[g]->gradient(p) - beta - lam + mu));
        worst = std::max({worst, -lam, -mu});
        if (sol.problem == DispatchProblem::ogr3) {
            const auto& bus = model.buses[gens[g]];
            if (bus.pM_min) {
                worst = std::max(worst, *bus.pM_min - p);
                worst = std::max(worst, std::abs(lam * (*bus.pM_min - p)));
            } else {
                worst = std::max(worst, std::abs(lam));
            }
            if (bus.pM_max) {
                worst = std::max(worst, p - *bus.pM_max);
                worst = std::max(worst, std::abs(mu * (p - *bus.pM_max)));
            } else {
                worst = std::max(worst, std::abs(mu));
            }
        }
    }
    for (double b : balance) worst = std::max(worst, std::abs(b));
    return worst;
}

FlowSolution solve_power_flow(const NetworkModel& model, const Vector& injection) {
    const int n = model.n_buses();
    if (injection.size() != n) throw std::invalid_argument("injection needs one entry per bus");
    if (std::abs(injection.sum()) > 1e-9) throw InfeasibleError("injections do not balance");
    const Matrix D = incidence_matrix(model.phys_edges, n);
    const auto m = static_cast<Eigen::Index>(model.phys_edges.size());
    Vector Y(m);
    for (Eigen::Index e = 0; e < m; ++e) Y[e] = model.phys_edges[e].Y;

    // Balance at every bus: D (Y sin eta) + injection = 0 with eta = -D^T theta.
    auto mismatch = [&](const Vector& theta) {
        const Vector eta = -D.transpose() * theta;
        return Vector(D * (Y.array() * eta.array().sin()).matrix() + injection);
    };
    FlowSolution sol;
    sol.theta = Vector::Zero(n);
    if (n > 1) {
        const Matrix B = D * Y.asDiagonal() * D.transpose();
        const Matrix Br = B.bottomRightCorner(n - 1, n - 1);
        sol.theta.tail(n - 1) = Br.ldlt().solve(injection.tail(n - 1));
        for (int it = 0; it < 100; ++it) {
            const Vector F = mismatch(sol.theta);
            const double res = F.tail(n - 1).cwiseAbs().maxCoeff();
            sol.iterations = it;
            if (res < 1e-14) break;
            const Vector eta = -D.transpose() * sol.theta;
            const Matrix J = -D * (Y.array() * eta.array().cos()).matrix().asDiagonal() * D.transpose();
            const Vector step = J.bottomRightCorner(n - 1, n - 1).partialPivLu().solve(-F.tail(n - 1));
            sol.theta.tail(n - 1) += step;
            if (step.cwiseAbs().maxCoeff() < 1e-16) break;
        }
    }
    sol.eta = -D.transpose() * sol.theta;
    sol.flows = (Y.array() * sol.eta.array().sin()).matrix();
    sol.residual = mismatch(sol.theta).cwiseAbs().maxCoeff();
    sol.secure = m == 0 || sol.eta.cwiseAbs().maxCoeff() < std::numbers::pi / 2.0;
    if (sol.residual > 1e-8) throw InfeasibleError("power flow did not converge");
    return sol;
}

}  // namespace freqctl
