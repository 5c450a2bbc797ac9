#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "detmet/types.hpp"
#include "detmet/voting.hpp"

namespace detmet {

// Synthetic datasets with known ground truth. Each replicate places exactly
// round(m * pi1) malicious files at uniformly random indices, then draws every
// label from the detector's Bernoulli rate. All draws go through per-purpose
// derived streams (see rng.hpp), so a dataset depends only on
// (config, master_seed, replicate_index) and regenerates bit-identically.

struct SimConfig {
    std::int64_t m = 50'000;
    double pi1 = 0.2;
    int n = 5;

    /// Rates drawn once per configuration from Uniform(epsilon, epsilon + 0.1)
    /// when no explicit profiles are given.
    std::optional<double> epsilon;
    std::vector<DetectorProfile> explicit_profiles;
    std::vector<std::string> detector_names;  // optional; generated when empty

    int n_replicates = 1'000;
    std::uint64_t master_seed = 1;

    /// Half-width of the per-file rate perturbation; 0 keeps rates constant
    /// across files.
    double perturbation_delta = 0.0;

    std::int64_t malicious_count() const;  // round(m * pi1)
    void validate() const;
};

struct SyntheticDataset {
    LabelMatrix matrix;
    GroundTruth truth;
    std::vector<DetectorProfile> profiles;
    int replicate_index = 0;
};

/// Profiles for the configuration: explicit ones pass through unchanged,
/// otherwise n (fp, fn) pairs are drawn from Uniform(eps, eps + 0.1) on the
/// stream (master_seed, kTagProfiles). Drawn once and reused by every
/// replicate of the configuration.
std::vector<DetectorProfile> draw_profiles(const SimConfig& cfg);

SyntheticDataset generate_replicate(const SimConfig& cfg, const std::vector<DetectorProfile>& profiles,
                                    int replicate_index);

/// Per-file variant: each label's rate is drawn from the uniform interval of
/// half-width delta centered on the detector's rate, with delta shrunk per
/// detector so the interval stays centered and inside [0, 1]. The label draw
/// uses the same stream as the unperturbed generator, so delta = 0 reproduces
/// generate_replicate bit for bit.
SyntheticDataset generate_perturbed(const SimConfig& cfg, const std::vector<DetectorProfile>& profiles,
                                    int replicate_index);

/// Interval half-width actually used for a rate p: min(delta, p, 1 - p).
double effective_delta(double rate, double delta);

/// Shipped 47-detector benchmark: population fraction 0.58579 over 100,000
/// files, detectors ordered by decreasing miss rate (the first eight above
/// 0.5), miss rates spanning (0.00238, 0.998) and false-positive rates
/// spanning (0.000617, 0.256) with the two scales trading off. Prefix
/// selection of the first kappa detectors reproduces the panel-size sweeps.
SimConfig truly_heterogeneous_fixture();

/// First kappa detectors of a config's profile list (fixture ordering).
SimConfig fixture_prefix(const SimConfig& fixture, int kappa);

}  // namespace detmet
