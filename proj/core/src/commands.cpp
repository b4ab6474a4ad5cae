#include "freqctl/commands.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

namespace freqctl {

namespace {

Scenario load(const std::string& path, const RunOptions& opts) {
    Scenario s = load_scenario(path, opts.overrides);
    if (opts.seed) s = reseeded(std::move(s), *opts.seed);
    return s;
}

void write_file(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw ConfigError(0, "cannot write " + path);
    f << text;
}

std::string yes_no(bool b) { return b ? "true" : "false"; }

}  // namespace

Scenario reseeded(Scenario s, std::uint64_t seed) {
    s.delays.seed = seed;
    s.disturbance.seed = seed;
    s.disturbance_seeded = true;
    return s;
}

Verdict evaluate(const Scenario& s, const RunMetrics& m) {
    const auto& c = s.criteria;
    std::ostringstream why;
    if (c.expect == Expectation::fail) {
        if (m.diverged) return {true, "diverged at t = " + format_number(m.diverged_at)};
        if (m.terminal_omega_inf >= c.fail_omega_min)
            return {true, "terminal |omega| " + format_number(m.terminal_omega_inf) + " >= " + format_number(c.fail_omega_min)};
        return {false, "restored although failure was expected"};
    }
    if (m.diverged) return {false, "diverged at t = " + format_number(m.diverged_at)};
    if (!(m.terminal_omega_inf < c.omega_inf_max)) {
        why << "terminal |omega| " << format_number(m.terminal_omega_inf) << " >= " << format_number(c.omega_inf_max);
        return {false, why.str()};
    }
    if (c.pM_error_max && !(m.terminal_pM_error < *c.pM_error_max)) {
        why << "pM error " << format_number(m.terminal_pM_error) << " >= " << format_number(*c.pM_error_max);
        return {false, why.str()};
    }
    if (c.areaflow_error_max && !(m.terminal_areaflow_error < *c.areaflow_error_max)) {
        why << "area flow error " << format_number(m.terminal_areaflow_error) << " >= "
            << format_number(*c.areaflow_error_max);
        return {false, why.str()};
    }
    if (c.check_multipliers && !(m.min_multiplier > 0.0)) return {false, "multiplier left the positive orthant"};
    return {true, "restored"};
}

RunResult execute(const Scenario& s, bool diagnostics) {
    RunResult out;
    if (!diagnostics) {
        auto sim = make_simulator(s);
        out.trajectory = sim.run();
    } else {
        Vector terminal;
        {
            auto probe = make_simulator(s);
            terminal = probe.run().terminal_state;
        }
        auto sim = make_simulator(s);
        sim.set_diagnostics(sim.equilibrium(&terminal));
        out.trajectory = sim.run();
    }
    out.verdict = evaluate(s, out.trajectory.metrics);
    return out;
}

std::string metrics_text(const RunResult& r) {
    const auto& m = r.trajectory.metrics;
    std::ostringstream os;
    auto vec = [](const Vector& v) {
        std::string s;
        for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_number(v[i]);
        return s;
    };
    os << "t_final = " << format_number(m.t_final) << "\n"
       << "steps = " << m.steps << "\n"
       << "settling_time = " << format_number(m.settling_time) << "\n"
       << "settle_threshold = " << format_number(m.settle_threshold) << "\n"
       << "terminal_omega_inf = " << format_number(m.terminal_omega_inf) << "\n"
       << "terminal_pM = " << vec(m.terminal_pM) << "\n"
       << "oracle_pM = " << vec(m.oracle_pM) << "\n"
       << "terminal_pM_error = " << format_number(m.terminal_pM_error) << "\n";
    if (m.terminal_area_flows.size() > 0)
        os << "terminal_area_flows = " << vec(m.terminal_area_flows) << "\n"
           << "scheduled_area_flows = " << vec(m.scheduled_area_flows) << "\n"
           << "terminal_areaflow_error = " << format_number(m.terminal_areaflow_error) << "\n";
    os << "diverged = " << yes_no(m.diverged) << "\n";
    if (m.diverged) os << "diverged_at = " << format_number(m.diverged_at) << "\n";
    if (std::isfinite(m.min_multiplier)) os << "min_multiplier = " << format_number(m.min_multiplier) << "\n";
    os << "max_abs_eta = " << format_number(m.max_abs_eta) << "\n"
       << "angle_warning = " << yes_no(m.angle_warning) << "\n";
    if (!std::isnan(m.zero_delay_decode_error))
        os << "zero_delay_decode_error = " << format_number(m.zero_delay_decode_error) << "\n";
    if (!std::isnan(m.equilibrium_residual))
        os << "equilibrium_residual = " << format_number(m.equilibrium_residual) << "\n";
    os << "halved_steps = " << m.halved_steps << "\n"
       << "verdict = " << (r.verdict.pass ? "PASS" : "FAIL") << "\n"
       << "reason = " << r.verdict.reason << "\n";
    return os.str();
}

std::string oracle_csv(const Scenario& s) {
    auto sim = make_simulator(s);
    const auto sol = sim.oracle();
    const auto gens = s.model.generators();
    const auto area = s.model.area_of_bus();
    const char* problem = sol.problem == DispatchProblem::ogr ? "ogr" : sol.problem == DispatchProblem::ogr2 ? "ogr2" : "ogr3";
    NetworkModel final_model = s.model;
    const Vector pL = sim.final_demand();
    for (int j = 0; j < final_model.n_buses(); ++j) final_model.buses[j].pL = pL[j];
    const double kkt = kkt_residual(final_model, sol);
    std::ostringstream os;
    os << "problem,bus,area,pM_star,beta,lambda_bar,mu_bar,kkt_residual\n";
    for (std::size_t g = 0; g < gens.size(); ++g) {
        const auto gi = static_cast<Eigen::Index>(g);
        const int k = area[gens[g]];
        const double beta = sol.beta.size() > 1 ? sol.beta[k] : sol.beta[0];
        os << problem << "," << s.model.buses[gens[g]].id << "," << k + 1 << "," << format_number(sol.pM_star[gi]) << ","
           << format_number(beta) << "," << format_number(sol.lambda_bar[gi]) << ","
           << format_number(sol.mu_bar[gi]) << "," << format_number(kkt) << "\n";
    }
    return os.str();
}

int cmd_run(const std::string& path, const RunOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        const Scenario s = load(path, opts);
        const RunResult r = execute(s, opts.diagnostics || s.outputs.diagnostics);
        std::string csv_path = s.outputs.csv;
        std::string metrics_path = s.outputs.metrics;
        if (!opts.out_dir.empty()) {
            const auto base = std::filesystem::path(opts.out_dir) / s.name;
            csv_path = base.string() + ".csv";
            metrics_path = base.string() + ".metrics.txt";
        }
        const std::string metrics = metrics_text(r);
        if (!csv_path.empty()) {
            std::ostringstream csv;
            r.trajectory.write_csv(csv);
            write_file(csv_path, csv.str());
        }
        if (!metrics_path.empty()) write_file(metrics_path, metrics);
        else out << metrics;
        out << (r.verdict.pass ? "PASS " : "FAIL ") << s.name << ": " << r.verdict.reason << "\n";
        return r.verdict.pass ? exit_ok : exit_threshold;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const IntegrationError& e) {
        err << "integration failure: " << e.what() << "\n";
        return exit_integration;
    }
}

int cmd_oracle(const std::string& path, const RunOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        const Scenario s = load(path, opts);
        out << oracle_csv(s);
        return exit_ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << "\n";
        return exit_config;
    }
}

int cmd_sweep(const std::string& path, const std::string& parameter, const std::vector<std::string>& values,
              const RunOptions& opts, unsigned threads, std::ostream& out, std::ostream& err) {
    std::vector<Scenario> runs;
    try {
        const Scenario base = load(path, opts);
        for (const auto& v : values) {
            if (parameter == "seed") {
                std::uint64_t seed = 0;
                try {
                    seed = std::stoull(v);
                } catch (const std::exception&) {
                    throw ConfigError(0, "seed value '" + v + "' is not an integer");
                }
                runs.push_back(reseeded(base, seed));
            } else {
                runs.push_back(with_override(base, parameter + "=" + v));
            }
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    }

    struct Row {
        bool failed = false;
        std::string error;
        RunResult result;
    };
    std::vector<Row> rows(runs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < runs.size(); i = next++) {
            try {
                rows[i].result = execute(runs[i], opts.diagnostics);
            } catch (const std::exception& e) {
                rows[i].failed = true;
                rows[i].error = e.what();
            }
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(runs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    int status = exit_ok;
    out << "value,verdict,terminal_omega_inf,settling_time,terminal_pM_error,terminal_areaflow_error,diverged\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.failed) {
            out << values[i] << ",ERROR,nan,nan,nan,nan,false\n";
            err << "run " << values[i] << ": " << row.error << "\n";
            status = exit_integration;
            continue;
        }
        const auto& m = row.result.trajectory.metrics;
        out << values[i] << "," << (row.result.verdict.pass ? "PASS" : "FAIL") << ","
            << format_number(m.terminal_omega_inf) << "," << format_number(m.settling_time) << ","
            << format_number(m.terminal_pM_error) << "," << format_number(m.terminal_areaflow_error) << ","
            << yes_no(m.diverged) << "\n";
        if (!row.result.verdict.pass && status == exit_ok) status = exit_threshold;
    }
    return status;
}

int cmd_validate(const std::string& path, const RunOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        const Scenario s = load(path, opts);
        make_simulator(s);
        out << "ok " << s.name << ": " << s.model.n_buses() << " buses, " << s.model.phys_edges.size()
            << " lines, " << s.model.comm_edges.size() << " communication links\n";
        return exit_ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    }
}

}  // namespace freqctl
