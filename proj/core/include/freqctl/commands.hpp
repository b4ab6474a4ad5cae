#pragma once

// Subcommand implementations behind the freqctl tool. They write to the
// given streams and return the process exit status.

#include "freqctl/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace freqctl {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_integration = 3, exit_threshold = 4 };

struct RunOptions {
    std::string out_dir;  // overrides [outputs] paths when set
    bool diagnostics = false;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
};

struct Verdict {
    bool pass = false;
    std::string reason;
};

struct RunResult {
    Trajectory trajectory;
    Verdict verdict;
};

/// Reseeds every stochastic element (delay draws, disturbance).
Scenario reseeded(Scenario scenario, std::uint64_t seed);

Verdict evaluate(const Scenario& scenario, const RunMetrics& metrics);

/// One simulation. With diagnostics a first pass fixes the free equilibrium
/// constants and a second pass records the storage functionals.
RunResult execute(const Scenario& scenario, bool diagnostics);

std::string metrics_text(const RunResult& result);
std::string oracle_csv(const Scenario& scenario);

int cmd_run(const std::string& path, const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_oracle(const std::string& path, const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const std::string& path, const std::string& parameter, const std::vector<std::string>& values,
              const RunOptions& opts, unsigned threads, std::ostream& out, std::ostream& err);
int cmd_validate(const std::string& path, const RunOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace freqctl
