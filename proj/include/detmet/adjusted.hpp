#pragma once

#include <cstdint>
#include <vector>

#include "detmet/asymptotics.hpp"
#include "detmet/poisson_binomial.hpp"
#include "detmet/types.hpp"
#include "detmet/voting.hpp"

namespace detmet {

// Bias-corrected estimators. The voted-fraction estimator is corrected by
// moment matching against the vote sensitivity/false-alarm pair; the
// per-detector error rates solve a 2x2 linear system built from leave-one-out
// vote tails; PPV/NPV follow algebraically from the corrected values.

/// Moment-matched population fraction: (pi1_naive - p01) / (p11 - p01),
/// clamped to [0, 1]. When |p11 - p01| < 1e-6 the equation carries no
/// information and the naive value is returned flagged.
Estimate adjust_pi1(double pi1_naive, double p11_est, double p01_est);

/// Rounded class sizes implied by an adjusted fraction. Rounding is
/// half-away-from-zero.
struct AdjustedCounts {
    std::int64_t m1_hat = 0;
    std::int64_t m0_hat = 0;

    static AdjustedCounts from_pi1(double pi1_hat, std::int64_t m);
};

/// Coefficients of the linear system in (fp_j, fn_j):
///   a11 * fp - a12 * fn = b1
///   a21 * fp - a22 * fn = b2
struct AdjustmentSystem {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0, b1 = 0, b2 = 0;

    static AdjustmentSystem build(double fp_naive, double fn_naive, const AdjustedCounts& counts,
                                  const ConditionalVoteProbs& cond);
};

/// Leave-one-out tails for detector j with the other detectors' rates taken
/// from the naive estimates. Requires n >= 2 and all naive fp/fn available.
ConditionalVoteProbs alpha_beta(const MetricEstimates& naive, int j, const ProbEval& eval = {});

struct AdjustedRates {
    Estimate fp;
    Estimate fn;
};

/// Solve the 2x2 system by direct elimination; solutions are clamped
/// componentwise to [0, 1] (flagged when clamping changed them). A determinant
/// below 1e-10 relative to the coefficient scale falls back to the naive pair,
/// flagged.
AdjustedRates adjust_fp_fn(const Estimate& fp_naive, const Estimate& fn_naive,
                           const AdjustedCounts& counts, const ConditionalVoteProbs& cond);

struct AdjustedTrust {
    Estimate ppv;
    Estimate npv;
};

/// PPV/NPV from the corrected values:
///   ppv = pi*(1-fn) / (pi*(1-fn) + (1-pi)*fp)
///   npv = (1-pi)*(1-fp) / ((1-pi)*(1-fp) + pi*fn)
/// Zero denominators mark the entry unavailable.
AdjustedTrust adjust_ppv_npv(double pi1_hat, double fp_hat, double fn_hat);

/// Full single-pass pipeline: naive estimates -> vote probabilities at the
/// naive rates -> adjusted fraction and class sizes -> per-detector
/// leave-one-out tails, linear solve, and PPV/NPV. Unavailability of any
/// input propagates to the entries that need it. Requires n >= 2.
MetricEstimates full_adjust(const LabelMatrix& matrix, const ProbEval& eval = {});

/// Same pipeline starting from precomputed votes/naive estimates (the matrix
/// itself is no longer needed at this point).
MetricEstimates full_adjust_from_naive(const MetricEstimates& naive, std::int64_t m,
                                       const ProbEval& eval = {});

}  // namespace detmet
