#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "detmet/poisson_binomial.hpp"
#include "detmet/synthetic.hpp"

namespace detmet {

// Plain-text key = value configuration ('#' starts a comment). Unknown keys
// are rejected. The resolved configuration is echoed into every report.

struct RunConfig {
    TailMode mode = TailMode::Exact;
    std::int64_t mc_samples = 10'000;
    std::uint64_t seed = 1;
    int threads = 0;

    // simulation parameters
    std::int64_t m = 50'000;
    double pi1 = 0.2;
    int n = 5;
    std::optional<double> epsilon;
    std::string profiles;  // "", "uniform", "fixture", or "csv:<path>"
    std::optional<int> kappa;  // prefix of the profile list
    int replicates = 1'000;
    double delta = 0.0;

    std::string estimators = "naive,adjusted";
    std::optional<std::string> subset_plan;
    std::optional<std::string> out_dir;

    ProbEval prob_eval() const;
    SimConfig sim_config() const;
    bool run_naive() const;
    bool run_adjusted() const;

    /// Key/value echo of every resolved field, insertion order = file order.
    std::map<std::string, std::string> echo() const;
};

RunConfig parse_run_config(const std::string& path);
RunConfig parse_run_config_text(const std::string& text);

}  // namespace detmet
