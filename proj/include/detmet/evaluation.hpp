#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "detmet/poisson_binomial.hpp"
#include "detmet/synthetic.hpp"
#include "detmet/types.hpp"

namespace detmet {

// Replicated estimation runs against known truth, bias/RAB aggregation, and
// detector-subset sweeps. Aggregation is a sum reduction over per-replicate
// slots filled in index order, so reports are identical for any worker count.

/// Aggregated accuracy of one estimator for one target quantity.
struct QuantityReport {
    std::string metric;          // "pi1", "fp", "fn", "ppv", "npv"
    int detector = -1;           // -1 for pi1
    EstimateKind kind = EstimateKind::Naive;
    double true_value = 0.0;
    bool truth_available = true;  // false when the true quantity is undefined
    std::int64_t n_used = 0;         // replicates where the estimate was available
    std::int64_t n_unavailable = 0;  // replicates where it was not
    std::int64_t n_fallback = 0;     // adjusted entries that fell back to naive
    double mean_estimate = 0.0;
    double mean_bias = 0.0;      // mean_estimate - true_value
    double mean_abs_dev = 0.0;   // mean |estimate - true_value|
    double var_estimate = 0.0;   // sample variance over replicates
    bool rab_available = false;  // false when true_value == 0
    double rab_percent = 0.0;    // |mean_bias| / true_value * 100
};

/// Relative absolute bias in percent; unavailable when the true value is 0
/// (the raw bias stays reported).
struct RabValue {
    bool available = false;
    double percent = 0.0;
};

RabValue relative_absolute_bias(double mean_bias, double true_value);

struct ExperimentReport {
    SimConfig config;
    TailMode mode = TailMode::Exact;
    std::int64_t mc_samples = 0;
    int replicates = 0;
    std::vector<QuantityReport> quantities;
    // raw per-replicate estimate sets, kept only when requested
    std::vector<MetricEstimates> naive_replicates;
    std::vector<MetricEstimates> adjusted_replicates;

    const QuantityReport* find(const std::string& metric, int detector, EstimateKind kind) const;
    /// Mean over detectors of |mean bias| for one metric and kind.
    double mean_abs_bias_over_detectors(const std::string& metric, EstimateKind kind) const;
};

struct ReplicatedRunRequest {
    SimConfig cfg;
    bool run_naive = true;
    bool run_adjusted = true;
    bool keep_replicates = false;  // retain per-replicate estimates for plot series
    ProbEval eval;
    int threads = 0;  // 0 = hardware concurrency
};

/// Generate cfg.n_replicates datasets, estimate each, and aggregate deviations
/// from the known truth. Per-replicate estimator unavailability is counted,
/// never fatal.
ExperimentReport run_replicated(const ReplicatedRunRequest& request);

/// Probability the voted label matches the truth under the given estimates:
/// pi1 * p11 + (1 - pi1) * p00, with the vote probabilities evaluated at the
/// estimated rates.
double agreement_probability(double pi1_hat, const Eigen::ArrayXd& fp_hat,
                             const Eigen::ArrayXd& fn_hat, const ProbEval& eval = {});

/// Ordered, strictly nested detector subsets to vote and estimate over.
struct SubsetPlan {
    std::vector<std::vector<int>> subsets;  // 0-based column indices
    std::uint64_t seed = 0;                 // used by random augmentation

    void validate(int n_detectors) const;  // nesting + bounds
};

/// Directive form of a plan: an explicit base set, then growth steps that are
/// either explicit detector lists or "+k" random augmentations, optionally
/// closed by the full set. resolve() materializes indices against a matrix,
/// drawing random additions from (seed, kTagSubset, step).
struct SubsetPlanSpec {
    struct Step {
        std::vector<std::string> named;  // detector names or numeric indices
        int random_add = 0;              // used when named is empty
        bool all = false;
    };
    std::vector<Step> steps;  // first step is the base subset
    std::uint64_t seed = 0;

    SubsetPlan resolve(const LabelMatrix& matrix) const;
};

/// Estimates for one subset of one matrix; bias fields appear only when truth
/// was supplied.
struct SubsetReport {
    std::vector<int> detector_indices;
    MetricEstimates naive;
    MetricEstimates adjusted;
    std::optional<double> agreement;  // from adjusted rates when available
};

std::vector<SubsetReport> subset_sweep(const LabelMatrix& matrix, const SubsetPlan& plan,
                                       const ProbEval& eval = {});

}  // namespace detmet
