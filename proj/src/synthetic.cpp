#include "detmet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "detmet/rng.hpp"

namespace detmet {

std::int64_t SimConfig::malicious_count() const {
    return std::llround(static_cast<double>(m) * pi1);
}

void SimConfig::validate() const {
    if (m < 1) throw InvalidInput("file count must be >= 1");
    if (!within(pi1, 0, 1)) throw InvalidInput("population fraction outside [0,1]");
    if (n < 1) throw InvalidInput("detector count must be >= 1");
    if (n_replicates < 1) throw InvalidInput("replicate count must be >= 1");
    if (perturbation_delta < 0.0) throw InvalidInput("perturbation delta must be >= 0");
    if (!explicit_profiles.empty()) {
        if (static_cast<int>(explicit_profiles.size()) != n)
            throw InvalidInput("explicit profile count does not match detector count");
        for (const auto& p : explicit_profiles)
            if (!within(p.fp, 0, 1) || !within(p.fn, 0, 1))
                throw InvalidInput("profile rate outside [0,1]");
    } else {
        if (!epsilon) throw InvalidInput("either explicit profiles or epsilon must be set");
        if (*epsilon < 0.0 || *epsilon + 0.1 > 1.0)
            throw InvalidInput("epsilon range [eps, eps+0.1] must stay inside [0,1]");
    }
}

std::vector<DetectorProfile> draw_profiles(const SimConfig& cfg) {
    cfg.validate();
    if (!cfg.explicit_profiles.empty()) return cfg.explicit_profiles;
    Rng rng(derive(cfg.master_seed, kTagProfiles));
    std::vector<DetectorProfile> profiles(static_cast<std::size_t>(cfg.n));
    for (auto& p : profiles) {
        p.fp = rng.uniform(*cfg.epsilon, *cfg.epsilon + 0.1);
        p.fn = rng.uniform(*cfg.epsilon, *cfg.epsilon + 0.1);
    }
    return profiles;
}

static GroundTruth draw_truth(const SimConfig& cfg, int replicate_index) {
    const std::int64_t m = cfg.m;
    const std::int64_t m1 = cfg.malicious_count();
    Rng rng(derive_path(cfg.master_seed,
                        {kTagReplicate, static_cast<std::uint64_t>(replicate_index), kTagTruth}));
    // Partial Fisher-Yates: the first m1 slots end up holding the malicious
    // indices, drawn uniformly without replacement.
    std::vector<std::int64_t> indices(static_cast<std::size_t>(m));
    std::iota(indices.begin(), indices.end(), 0);
    GroundTruth truth;
    truth.truth = BinaryArray::Zero(m);
    for (std::int64_t i = 0; i < m1; ++i) {
        const std::uint64_t pick = i + rng.next_below(static_cast<std::uint64_t>(m - i));
        std::swap(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(pick)]);
        truth.truth[indices[static_cast<std::size_t>(i)]] = 1;
    }
    return truth;
}

double effective_delta(double rate, double delta) {
    return std::min({delta, rate, 1.0 - rate});
}

static SyntheticDataset generate(const SimConfig& cfg, const std::vector<DetectorProfile>& profiles,
                                 int replicate_index, bool perturbed) {
    cfg.validate();
    if (static_cast<int>(profiles.size()) != cfg.n)
        throw InvalidInput("profile count does not match configured detector count");

    SyntheticDataset ds;
    ds.replicate_index = replicate_index;
    ds.profiles = profiles;
    ds.truth = draw_truth(cfg, replicate_index);

    const std::uint64_t rep_base =
        derive_path(cfg.master_seed, {kTagReplicate, static_cast<std::uint64_t>(replicate_index)});
    const std::uint64_t label_base = derive(rep_base, kTagLabel);
    const std::uint64_t perturb_base = derive(rep_base, kTagPerturb);

    LabelStorage labels(cfg.m, cfg.n);
    const LabelCell* truth = ds.truth.truth.data();
    for (int j = 0; j < cfg.n; ++j) {
        const DetectorProfile& prof = profiles[static_cast<std::size_t>(j)];
        // Label rate by true class: malicious files fire at 1 - fn, benign at fp.
        const double rate_by_class[2] = {prof.fp, 1.0 - prof.fn};
        const std::uint64_t label_col = derive(label_base, static_cast<std::uint64_t>(j));
        LabelCell* col = labels.col(j).data();
        if (!perturbed || cfg.perturbation_delta == 0.0) {
            for (std::int64_t i = 0; i < cfg.m; ++i) {
                Rng cell(derive(label_col, static_cast<std::uint64_t>(i)));
                col[i] = cell.next_double() < rate_by_class[truth[i]] ? 1 : 0;
            }
        } else {
            const std::uint64_t perturb_col = derive(perturb_base, static_cast<std::uint64_t>(j));
            const double width_by_class[2] = {
                effective_delta(prof.fp, cfg.perturbation_delta),
                effective_delta(prof.fn, cfg.perturbation_delta),
            };
            for (std::int64_t i = 0; i < cfg.m; ++i) {
                Rng wobble(derive(perturb_col, static_cast<std::uint64_t>(i)));
                const double width = width_by_class[truth[i]];
                const double shift = width * (2.0 * wobble.next_double() - 1.0);
                // The shift applies to the error rate itself; for malicious
                // files the firing rate is 1 - (fn + shift).
                const double rate = truth[i] ? 1.0 - (prof.fn + shift) : prof.fp + shift;
                Rng cell(derive(label_col, static_cast<std::uint64_t>(i)));
                col[i] = cell.next_double() < rate ? 1 : 0;
            }
        }
    }
    std::vector<std::string> names = cfg.detector_names;
    ds.matrix = LabelMatrix::from_labels(std::move(labels), std::move(names));
    return ds;
}

SyntheticDataset generate_replicate(const SimConfig& cfg, const std::vector<DetectorProfile>& profiles,
                                    int replicate_index) {
    return generate(cfg, profiles, replicate_index, false);
}

SyntheticDataset generate_perturbed(const SimConfig& cfg, const std::vector<DetectorProfile>& profiles,
                                    int replicate_index) {
    return generate(cfg, profiles, replicate_index, true);
}

namespace {

constexpr std::uint64_t kFixtureSeed = 42424247;

struct Pin {
    int slot;  // 1-based rank
    double value;
};

// Fill unpinned slots by uniform draws inside the bracketing pinned values.
// `increasing` selects the sort direction between consecutive pins.
std::vector<double> fill_between_pins(const std::vector<Pin>& pins, int count, bool increasing,
                                      std::uint64_t stream) {
    std::vector<double> values(static_cast<std::size_t>(count), -1.0);
    for (const auto& pin : pins) values[static_cast<std::size_t>(pin.slot - 1)] = pin.value;
    Rng rng(stream);
    for (std::size_t a = 0; a + 1 < pins.size(); ++a) {
        const int lo_slot = pins[a].slot;
        const int hi_slot = pins[a + 1].slot;
        const int gap = hi_slot - lo_slot - 1;
        if (gap <= 0) continue;
        const double lo = std::min(pins[a].value, pins[a + 1].value);
        const double hi = std::max(pins[a].value, pins[a + 1].value);
        std::vector<double> draws(static_cast<std::size_t>(gap));
        for (auto& d : draws) d = rng.uniform(lo, hi);
        std::sort(draws.begin(), draws.end());
        if (!increasing) std::reverse(draws.begin(), draws.end());
        for (int g = 0; g < gap; ++g)
            values[static_cast<std::size_t>(lo_slot + g)] = draws[static_cast<std::size_t>(g)];
    }
    return values;
}

}  // namespace

SimConfig truly_heterogeneous_fixture() {
    constexpr int n = 47;
    // Miss rates, ranked decreasing: eight detectors above 0.5, the five
    // benchmark anchors at slots 3/13/23/33/43, and the range ends at slots
    // 1 and 47.
    const std::vector<Pin> fn_pins = {
        {1, 0.998}, {2, 0.921}, {3, 0.828}, {4, 0.732}, {5, 0.718},  {6, 0.648},  {7, 0.606},
        {8, 0.515}, {13, 0.339}, {23, 0.126}, {33, 0.044}, {43, 0.0173}, {47, 0.00238},
    };
    std::vector<double> fn_values =
        fill_between_pins(fn_pins, n, /*increasing=*/false, derive_path(kFixtureSeed, {1}));
    // False-positive rates, broadly increasing with rank (detectors trade one
    // error off against the other); the global minimum sits at slot 3, so
    // slots 1-2 draw from the bracket above it.
    const std::vector<Pin> fp_pins = {
        {3, 0.000617}, {13, 0.00938}, {23, 0.0952}, {33, 0.19}, {43, 0.227}, {47, 0.256},
    };
    std::vector<double> fp_values =
        fill_between_pins(fp_pins, n, /*increasing=*/true, derive_path(kFixtureSeed, {2}));
    {
        Rng rng(derive_path(kFixtureSeed, {3}));
        double first = rng.uniform(0.000617, 0.00938);
        double second = rng.uniform(0.000617, 0.00938);
        if (first > second) std::swap(first, second);
        fp_values[0] = first;
        fp_values[1] = second;
    }

    SimConfig cfg;
    cfg.m = 100'000;
    cfg.pi1 = 0.58579;
    cfg.n = n;
    cfg.n_replicates = 1'000;
    cfg.explicit_profiles.resize(n);
    cfg.detector_names.resize(n);
    for (int j = 0; j < n; ++j) {
        cfg.explicit_profiles[static_cast<std::size_t>(j)] =
            DetectorProfile{fp_values[static_cast<std::size_t>(j)], fn_values[static_cast<std::size_t>(j)]};
        cfg.detector_names[static_cast<std::size_t>(j)] =
            "det" + std::string(j + 1 < 10 ? "0" : "") + std::to_string(j + 1);
    }
    return cfg;
}

SimConfig fixture_prefix(const SimConfig& fixture, int kappa) {
    if (kappa < 1 || kappa > fixture.n) throw InvalidInput("prefix size out of range");
    SimConfig cfg = fixture;
    cfg.n = kappa;
    cfg.explicit_profiles.assign(fixture.explicit_profiles.begin(),
                                 fixture.explicit_profiles.begin() + kappa);
    if (!fixture.detector_names.empty())
        cfg.detector_names.assign(fixture.detector_names.begin(),
                                  fixture.detector_names.begin() + kappa);
    return cfg;
}

}  // namespace detmet
