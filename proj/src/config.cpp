#include "detmet/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "detmet/csv_io.hpp"

namespace detmet {

// shortest representation that parses back to the same double
static std::string echo_double(double v) {
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), v);
    return std::string(buffer, result.ptr);
}

ProbEval RunConfig::prob_eval() const {
    ProbEval eval;
    eval.mode = mode;
    eval.mc.n_samples = mc_samples;
    eval.mc.seed = seed;
    return eval;
}

SimConfig RunConfig::sim_config() const {
    SimConfig cfg;
    cfg.m = m;
    cfg.pi1 = pi1;
    cfg.n = n;
    cfg.epsilon = epsilon;
    cfg.n_replicates = replicates;
    cfg.master_seed = seed;
    cfg.perturbation_delta = delta;
    if (profiles == "fixture") {
        SimConfig fixture = truly_heterogeneous_fixture();
        if (kappa) fixture = fixture_prefix(fixture, *kappa);
        fixture.n_replicates = replicates;
        fixture.master_seed = seed;
        fixture.perturbation_delta = delta;
        return fixture;
    }
    if (profiles.rfind("csv:", 0) == 0) {
        const auto rows = read_profiles_csv(profiles.substr(4));
        cfg.explicit_profiles.clear();
        cfg.detector_names.clear();
        for (const auto& [name, profile] : rows) {
            cfg.detector_names.push_back(name);
            cfg.explicit_profiles.push_back(profile);
        }
        if (kappa) {
            if (*kappa < 1 || *kappa > static_cast<int>(cfg.explicit_profiles.size()))
                throw ConfigError("kappa out of range for the profile list");
            cfg.explicit_profiles.resize(static_cast<std::size_t>(*kappa));
            cfg.detector_names.resize(static_cast<std::size_t>(*kappa));
        }
        cfg.n = static_cast<int>(cfg.explicit_profiles.size());
        cfg.epsilon.reset();
        return cfg;
    }
    if (!profiles.empty() && profiles != "uniform")
        throw ConfigError("unknown profiles source '" + profiles + "'");
    return cfg;
}

bool RunConfig::run_naive() const { return estimators.find("naive") != std::string::npos; }
bool RunConfig::run_adjusted() const { return estimators.find("adjusted") != std::string::npos; }

std::map<std::string, std::string> RunConfig::echo() const {
    std::map<std::string, std::string> kv;
    // worker count is an execution detail, not a numeric input; it stays out
    // of the reproducibility echo
    kv["mode"] = to_string(mode);
    kv["mc_samples"] = std::to_string(mc_samples);
    kv["seed"] = std::to_string(seed);
    kv["m"] = std::to_string(m);
    kv["pi1"] = echo_double(pi1);
    kv["n"] = std::to_string(n);
    if (epsilon) kv["epsilon"] = echo_double(*epsilon);
    if (!profiles.empty()) kv["profiles"] = profiles;
    if (kappa) kv["kappa"] = std::to_string(*kappa);
    kv["replicates"] = std::to_string(replicates);
    kv["delta"] = echo_double(delta);
    kv["estimators"] = estimators;
    if (subset_plan) kv["subset_plan"] = *subset_plan;
    if (out_dir) kv["out_dir"] = *out_dir;
    return kv;
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    T out;
    in >> out;
    if (in.fail() || !in.eof()) throw ConfigError("bad value for '" + key + "': " + value);
    return out;
}

}  // namespace

RunConfig parse_run_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "mode") {
            if (value == "exact") cfg.mode = TailMode::Exact;
            else if (value == "mc" || value == "monte-carlo") cfg.mode = TailMode::MonteCarlo;
            else throw ConfigError("mode must be 'exact' or 'mc'");
        } else if (key == "mc_samples") {
            cfg.mc_samples = parse_number<std::int64_t>(key, value);
        } else if (key == "seed") {
            cfg.seed = parse_number<std::uint64_t>(key, value);
        } else if (key == "threads") {
            cfg.threads = parse_number<int>(key, value);
        } else if (key == "m") {
            cfg.m = parse_number<std::int64_t>(key, value);
        } else if (key == "pi1") {
            cfg.pi1 = parse_number<double>(key, value);
        } else if (key == "n") {
            cfg.n = parse_number<int>(key, value);
        } else if (key == "epsilon") {
            cfg.epsilon = parse_number<double>(key, value);
        } else if (key == "profiles") {
            cfg.profiles = value;
        } else if (key == "kappa") {
            cfg.kappa = parse_number<int>(key, value);
        } else if (key == "replicates") {
            cfg.replicates = parse_number<int>(key, value);
        } else if (key == "delta") {
            cfg.delta = parse_number<double>(key, value);
        } else if (key == "estimators") {
            cfg.estimators = value;
        } else if (key == "subset_plan") {
            cfg.subset_plan = value;
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    return cfg;
}

RunConfig parse_run_config(const std::string& path) {
    return parse_run_config_text(read_file(path));
}

}  // namespace detmet
