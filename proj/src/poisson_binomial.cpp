#include "detmet/poisson_binomial.hpp"

#include <cmath>

#include "detmet/rng.hpp"

namespace detmet {

TailQuery TailQuery::make(Direction d, double m) {
    TailQuery q;
    q.direction = d;
    const double doubled = 2.0 * m;
    q.twice_threshold = static_cast<std::int64_t>(std::llround(doubled));
    if (std::abs(doubled - static_cast<double>(q.twice_threshold)) > 1e-9)
        throw InvalidInput("tail threshold must be a multiple of 0.5");
    return q;
}

const char* to_string(TailMode mode) {
    return mode == TailMode::Exact ? "exact" : "mc";
}

double ProbEval::tail(const Eigen::ArrayXd& probs, TailQuery query) const {
    return mode == TailMode::Exact ? exact_tail_probability(probs, query)
                                   : mc_tail_probability(probs, query, mc);
}

static void check_probs(const Eigen::ArrayXd& probs) {
    for (Eigen::Index j = 0; j < probs.size(); ++j)
        if (!(probs[j] >= 0.0 && probs[j] <= 1.0))
            throw InvalidInput("Bernoulli probability outside [0,1]");
}

Eigen::ArrayXd exact_poisson_binomial_pmf(const Eigen::ArrayXd& probs) {
    check_probs(probs);
    const Eigen::Index k = probs.size();
    Eigen::ArrayXd pmf = Eigen::ArrayXd::Zero(k + 1);
    pmf[0] = 1.0;
    for (Eigen::Index j = 0; j < k; ++j) {
        const double p = probs[j];
        // In-place downward update: pmf[s] after trial j depends on pmf[s]
        // and pmf[s-1] from before it.
        for (Eigen::Index s = j + 1; s >= 1; --s) pmf[s] = pmf[s] * (1.0 - p) + pmf[s - 1] * p;
        pmf[0] *= 1.0 - p;
    }
    return pmf;
}

double pmf_tail(const Eigen::ArrayXd& pmf, TailQuery query) {
    double mass = 0.0;
    for (Eigen::Index s = 0; s < pmf.size(); ++s)
        if (query.satisfied_by(s)) mass += pmf[s];
    return mass;
}

double exact_tail_probability(const Eigen::ArrayXd& probs, TailQuery query) {
    return pmf_tail(exact_poisson_binomial_pmf(probs), query);
}

double mc_tail_probability(const Eigen::ArrayXd& probs, TailQuery query, const McConfig& cfg) {
    check_probs(probs);
    if (cfg.n_samples < 1) throw InvalidInput("Monte Carlo sample count must be >= 1");
    const std::uint64_t base = derive(cfg.seed, kTagMcSample);
    std::int64_t hits = 0;
    for (std::int64_t l = 0; l < cfg.n_samples; ++l) {
        Rng rng(derive(base, static_cast<std::uint64_t>(l)));
        std::int64_t sum = 0;
        for (Eigen::Index j = 0; j < probs.size(); ++j)
            if (rng.next_double() < probs[j]) ++sum;
        if (query.satisfied_by(sum)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(cfg.n_samples);
}

double homogeneous_p11(int n, double p_minus) {
    if (n < 1) throw InvalidInput("detector count must be >= 1");
    if (!(p_minus >= 0.0 && p_minus <= 1.0)) throw InvalidInput("miss rate outside [0,1]");
    const double hit = 1.0 - p_minus;
    // Upper binomial tail from k0 = smallest k with 2k >= n.
    const int k0 = (n + 1) / 2;
    double coeff = 1.0;  // C(n, k) built multiplicatively from k = 0
    for (int k = 1; k <= k0; ++k) coeff = coeff * (n - k + 1) / k;
    double tail = 0.0;
    double binom = coeff;
    for (int k = k0; k <= n; ++k) {
        tail += binom * std::pow(hit, k) * std::pow(p_minus, n - k);
        binom = binom * (n - k) / (k + 1);
    }
    return tail < 0.0 ? 0.0 : (tail > 1.0 ? 1.0 : tail);
}

std::pair<double, double> heterogeneous_p11_bounds(const Eigen::ArrayXd& fn_rates) {
    if (fn_rates.size() < 1) throw InvalidInput("need at least one miss rate");
    check_probs(fn_rates);
    const int n = static_cast<int>(fn_rates.size());
    const double lower = homogeneous_p11(n, fn_rates.maxCoeff());
    const double upper = homogeneous_p11(n, fn_rates.minCoeff());
    return {lower, upper};
}

VoteProbs vote_correct_probs(const Eigen::ArrayXd& fp, const Eigen::ArrayXd& fn,
                             const ProbEval& eval) {
    if (fp.size() != fn.size() || fp.size() < 1)
        throw InvalidInput("false positive / false negative vectors must match and be non-empty");
    const double half_n = static_cast<double>(fp.size()) / 2.0;
    const TailQuery at_least_half = TailQuery::at_least(half_n);
    // distinct sample sub-streams per class so the two tails stay independent
    ProbEval eval_malicious = eval;
    eval_malicious.mc.seed = derive(eval.mc.seed, 1);
    ProbEval eval_benign = eval;
    eval_benign.mc.seed = derive(eval.mc.seed, 0);
    VoteProbs probs;
    probs.p11 = eval_malicious.tail(1.0 - fn, at_least_half);
    probs.p01 = eval_benign.tail(fp, at_least_half);
    probs.p10 = 1.0 - probs.p11;
    probs.p00 = 1.0 - probs.p01;
    return probs;
}

VoteProbs vote_correct_probs(const std::vector<DetectorProfile>& profiles, const ProbEval& eval) {
    return vote_correct_probs(fp_rates(profiles), fn_rates(profiles), eval);
}

}  // namespace detmet
