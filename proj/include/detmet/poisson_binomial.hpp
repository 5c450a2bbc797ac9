#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>

#include "detmet/types.hpp"

namespace detmet {

// Probabilities of sums of independent, non-identically distributed Bernoulli
// variables (Poisson-binomial). Two evaluation routes are provided: an exact
// dynamic-programming pmf, and seeded Monte Carlo sampling. Voting thresholds
// are half-integers (n/2, (n-2)/2), so tail queries carry 2*M as an integer
// and every comparison against an integer sum is exact.

/// Tail event over an integer-valued sum S.
struct TailQuery {
    enum class Direction { AtMost, Less, AtLeast };

    Direction direction = Direction::AtMost;
    std::int64_t twice_threshold = 0;  // 2*M

    static TailQuery at_most(double m) { return make(Direction::AtMost, m); }
    static TailQuery less(double m) { return make(Direction::Less, m); }
    static TailQuery at_least(double m) { return make(Direction::AtLeast, m); }

    bool satisfied_by(std::int64_t sum) const {
        switch (direction) {
            case Direction::AtMost: return 2 * sum <= twice_threshold;
            case Direction::Less: return 2 * sum < twice_threshold;
            case Direction::AtLeast: return 2 * sum >= twice_threshold;
        }
        return false;
    }

private:
    static TailQuery make(Direction d, double m);
};

struct McConfig {
    std::int64_t n_samples = 10'000;
    std::uint64_t seed = 0;
};

enum class TailMode { Exact, MonteCarlo };

const char* to_string(TailMode mode);

/// How tail probabilities inside the estimators are evaluated. Exact is the
/// default; Monte Carlo reproduces the sampling route with the given budget.
struct ProbEval {
    TailMode mode = TailMode::Exact;
    McConfig mc;

    double tail(const Eigen::ArrayXd& probs, TailQuery query) const;
};

/// Exact pmf of S = sum of Bernoulli(probs[j]): result[s] = Pr(S = s),
/// s = 0..k, by the one-pass convolution over trials. Sums to 1 within 1e-12.
Eigen::ArrayXd exact_poisson_binomial_pmf(const Eigen::ArrayXd& probs);

/// Tail mass of a pmf vector under the query.
double pmf_tail(const Eigen::ArrayXd& pmf, TailQuery query);

/// Exact tail probability: DP pmf then tail mass.
double exact_tail_probability(const Eigen::ArrayXd& probs, TailQuery query);

/// Monte Carlo tail estimate: draw cfg.n_samples label vectors, output the
/// fraction satisfying the query. Sample l uses the stream derived from
/// (cfg.seed, kTagMcSample, l), so the result is identical however samples
/// are scheduled.
double mc_tail_probability(const Eigen::ArrayXd& probs, TailQuery query, const McConfig& cfg);

/// Probability that at least half of n homogeneous detectors with miss rate
/// p_minus flag a malicious file: upper tail of Binomial(n, 1 - p_minus) at
/// n/2, ties included. Computed as a direct binomial sum, independent of the
/// DP route.
double homogeneous_p11(int n, double p_minus);

/// Bracketing of the heterogeneous vote sensitivity by the homogeneous case:
/// lower bound uses max miss rate, upper bound uses min miss rate.
std::pair<double, double> heterogeneous_p11_bounds(const Eigen::ArrayXd& fn_rates);

/// Conditional vote probabilities p_ab = Pr(vote = b | truth = a).
struct VoteProbs {
    double p11 = 0.0;  // vote malicious given malicious
    double p01 = 0.0;  // vote malicious given benign
    double p00 = 0.0;  // = 1 - p01
    double p10 = 0.0;  // = 1 - p11
};

/// p11 from success probabilities (1 - fn_j), p01 from fp_j, both as the
/// at-least-n/2 tail; complements filled exactly.
VoteProbs vote_correct_probs(const Eigen::ArrayXd& fp, const Eigen::ArrayXd& fn,
                             const ProbEval& eval = {});

VoteProbs vote_correct_probs(const std::vector<DetectorProfile>& profiles,
                             const ProbEval& eval = {});

}  // namespace detmet
