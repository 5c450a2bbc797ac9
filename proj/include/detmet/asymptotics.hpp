#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "detmet/poisson_binomial.hpp"
#include "detmet/types.hpp"

namespace detmet {

// Asymptotic moments of the plug-in estimators. Conditioned on the true class
// of a file, the per-detector counts (z01, z00, z10, z11) restricted to that
// class are multinomial; each plug-in estimator is a smooth ratio of cell
// sums, so its large-sample mean and variance follow from the multinomial
// moments (mu = m_c p, sigma^2 = m_c p (1-p), cov = -m_c p p') by
// linearization.

/// Probabilities of the four (vote, label) cells for one detector, given the
/// file's true class. Cells sum to 1.
struct ConditionalCellProbs {
    double p01 = 0.0;
    double p00 = 0.0;
    double p10 = 0.0;
    double p11 = 0.0;

    double sum() const { return p01 + p00 + p10 + p11; }
};

/// Leave-one-out vote tails conditioned on the true class, for detector j:
///   trailing '1' = the sum over other detectors stays below (n-2)/2,
///   trailing '2' = it stays below n/2.
/// alpha conditions on a malicious file (success rates 1 - fn_k), beta on a
/// benign file (success rates fp_k). By threshold nesting, alpha1 <= alpha2
/// and beta1 <= beta2.
struct ConditionalVoteProbs {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
};

/// The four leave-one-out tails for detector j under the given error rates.
/// Requires n >= 2.
ConditionalVoteProbs leave_one_out_tails(const Eigen::ArrayXd& fp, const Eigen::ArrayXd& fn,
                                         int j, const ProbEval& eval = {});

/// Cell probabilities for detector j given true class c (0 benign,
/// 1 malicious). Requires n >= 2.
ConditionalCellProbs cell_probs(const std::vector<DetectorProfile>& profiles, int j, int c,
                                const ProbEval& eval = {});

/// Large-sample mean and variance of the voted-fraction estimator:
///   mean = pi1*p11 + (1-pi1)*p01
///   sigma1^2 = [pi1*p11*(1-p11) + (1-pi1)*p01*(1-p01)] / m
struct VotedFractionMoments {
    double mean = 0.0;
    double var = 0.0;
};

VotedFractionMoments voted_fraction_moments(double pi1, std::int64_t m, double p11, double p01);

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;
    bool available = false;
};

/// Moments for one detector: per-cell multinomial moments for both classes,
/// and the linearized (mean, variance) of each plug-in estimator. An
/// estimator whose cell-mean denominator vanishes is marked unavailable.
struct AsymptoticMoments {
    std::int64_t m0 = 0;
    std::int64_t m1 = 0;
    ConditionalCellProbs cells_benign;     // class c = 0
    ConditionalCellProbs cells_malicious;  // class c = 1

    MeanVar fp;   // estimator z01/(z01+z00)
    MeanVar fn;   // estimator z10/(z10+z11)
    MeanVar ppv;  // estimator z11/(z11+z01)
    MeanVar npv;  // estimator z00/(z00+z10)

    double mu(int c, double cell_prob) const { return (c == 1 ? m1 : m0) * cell_prob; }
    double sigma_sq(int c, double cell_prob) const {
        return (c == 1 ? m1 : m0) * cell_prob * (1.0 - cell_prob);
    }
    double rho(int c, double cell_prob_a, double cell_prob_b) const {
        return -static_cast<double>(c == 1 ? m1 : m0) * cell_prob_a * cell_prob_b;
    }
};

/// Requires m0, m1 >= 1 and n >= 2.
AsymptoticMoments detector_estimator_moments(const std::vector<DetectorProfile>& profiles, int j,
                                   std::int64_t m0, std::int64_t m1, const ProbEval& eval = {});

}  // namespace detmet
