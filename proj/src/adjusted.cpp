#include "detmet/adjusted.hpp"

#include <cmath>

#include "detmet/naive.hpp"

namespace detmet {

Estimate adjust_pi1(double pi1_naive, double p11_est, double p01_est) {
    const double spread = p11_est - p01_est;
    if (std::abs(spread) < 1e-6) {
        // The moment equation degenerates; keep the naive value, flagged.
        Estimate e = Estimate::of(pi1_naive);
        e.fell_back_to_naive = true;
        return e;
    }
    const double raw = (pi1_naive - p01_est) / spread;
    Estimate e = Estimate::of(clamp01(raw));
    e.clamped = raw != e.value;
    return e;
}

AdjustedCounts AdjustedCounts::from_pi1(double pi1_hat, std::int64_t m) {
    AdjustedCounts counts;
    counts.m1_hat = std::llround(static_cast<double>(m) * pi1_hat);
    if (counts.m1_hat < 0) counts.m1_hat = 0;
    if (counts.m1_hat > m) counts.m1_hat = m;
    counts.m0_hat = m - counts.m1_hat;
    return counts;
}

AdjustmentSystem AdjustmentSystem::build(double fp_naive, double fn_naive,
                                         const AdjustedCounts& counts,
                                         const ConditionalVoteProbs& cond) {
    const auto m0 = static_cast<double>(counts.m0_hat);
    const auto m1 = static_cast<double>(counts.m1_hat);
    AdjustmentSystem sys;
    sys.a11 = m0 * cond.beta1 * (1.0 - fp_naive) + m0 * cond.beta2 * fp_naive;
    sys.a12 = m1 * cond.alpha1 * (1.0 - fp_naive) + m1 * cond.alpha2 * fp_naive;
    sys.a21 = m0 * (1.0 - cond.beta2) * (1.0 - fn_naive) + m0 * (1.0 - cond.beta1) * fn_naive;
    sys.a22 = m1 * (1.0 - cond.alpha2) * (1.0 - fn_naive) + m1 * (1.0 - cond.alpha1) * fn_naive;
    sys.b1 = m0 * cond.beta2 * fp_naive - m1 * cond.alpha1 * (1.0 - fp_naive);
    sys.b2 = m0 * (1.0 - cond.beta2) * (1.0 - fn_naive) - m1 * (1.0 - cond.alpha1) * fn_naive;
    return sys;
}

ConditionalVoteProbs alpha_beta(const MetricEstimates& naive, int j, const ProbEval& eval) {
    if (!naive.all_fp_available() || !naive.all_fn_available())
        throw InvalidInput("leave-one-out tails need every naive fp/fn estimate");
    const int n = naive.detectors();
    Eigen::ArrayXd fp(n), fn(n);
    for (int k = 0; k < n; ++k) {
        fp[k] = naive.fp[static_cast<std::size_t>(k)].value;
        fn[k] = naive.fn[static_cast<std::size_t>(k)].value;
    }
    return leave_one_out_tails(fp, fn, j, eval);
}

AdjustedRates adjust_fp_fn(const Estimate& fp_naive, const Estimate& fn_naive,
                           const AdjustedCounts& counts, const ConditionalVoteProbs& cond) {
    AdjustedRates rates;
    if (!fp_naive.available || !fn_naive.available) return rates;  // both unavailable
    const AdjustmentSystem sys = AdjustmentSystem::build(fp_naive.value, fn_naive.value, counts, cond);
    // det of [a11, -a12; a21, -a22]
    const double det = sys.a12 * sys.a21 - sys.a11 * sys.a22;
    const double scale = std::abs(sys.a11 * sys.a22) + std::abs(sys.a12 * sys.a21);
    if (std::abs(det) < 1e-10 * std::max(scale, 1.0)) {
        rates.fp = fp_naive;
        rates.fn = fn_naive;
        rates.fp.fell_back_to_naive = true;
        rates.fn.fell_back_to_naive = true;
        return rates;
    }
    const double fp_raw = (sys.a12 * sys.b2 - sys.a22 * sys.b1) / det;
    const double fn_raw = (sys.a11 * sys.b2 - sys.a21 * sys.b1) / det;
    rates.fp = Estimate::of(clamp01(fp_raw));
    rates.fp.clamped = rates.fp.value != fp_raw;
    rates.fn = Estimate::of(clamp01(fn_raw));
    rates.fn.clamped = rates.fn.value != fn_raw;
    return rates;
}

AdjustedTrust adjust_ppv_npv(double pi1_hat, double fp_hat, double fn_hat) {
    AdjustedTrust trust;
    const double ppv_num = pi1_hat * (1.0 - fn_hat);
    const double ppv_den = ppv_num + (1.0 - pi1_hat) * fp_hat;
    trust.ppv = ppv_den == 0.0 ? Estimate::unavailable() : Estimate::of(ppv_num / ppv_den);
    const double npv_num = (1.0 - pi1_hat) * (1.0 - fp_hat);
    const double npv_den = npv_num + pi1_hat * fn_hat;
    trust.npv = npv_den == 0.0 ? Estimate::unavailable() : Estimate::of(npv_num / npv_den);
    return trust;
}

MetricEstimates full_adjust_from_naive(const MetricEstimates& naive, std::int64_t m,
                                       const ProbEval& eval) {
    const int n = naive.detectors();
    if (n < 2) throw InvalidInput("adjustment needs at least 2 detectors");
    MetricEstimates adj;
    adj.kind = EstimateKind::Adjusted;
    adj.fp.assign(static_cast<std::size_t>(n), Estimate::unavailable());
    adj.fn.assign(static_cast<std::size_t>(n), Estimate::unavailable());
    adj.ppv.assign(static_cast<std::size_t>(n), Estimate::unavailable());
    adj.npv.assign(static_cast<std::size_t>(n), Estimate::unavailable());

    if (!naive.pi1.available || !naive.all_fp_available() || !naive.all_fn_available())
        return adj;  // nothing recoverable without the full naive set

    Eigen::ArrayXd fp_naive(n), fn_naive(n);
    for (int k = 0; k < n; ++k) {
        fp_naive[k] = naive.fp[static_cast<std::size_t>(k)].value;
        fn_naive[k] = naive.fn[static_cast<std::size_t>(k)].value;
    }
    const VoteProbs vote = vote_correct_probs(fp_naive, fn_naive, eval);
    adj.pi1 = adjust_pi1(naive.pi1.value, vote.p11, vote.p01);
    // A single-class count (m0_hat or m1_hat = 0) zeroes one column pair of
    // every per-detector system, so those solves hit the singular fallback.
    const AdjustedCounts counts = AdjustedCounts::from_pi1(adj.pi1.value, m);
    for (int j = 0; j < n; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        const ConditionalVoteProbs cond = alpha_beta(naive, j, eval);
        const AdjustedRates rates = adjust_fp_fn(naive.fp[sj], naive.fn[sj], counts, cond);
        adj.fp[sj] = rates.fp;
        adj.fn[sj] = rates.fn;
        if (rates.fp.available && rates.fn.available) {
            const AdjustedTrust trust = adjust_ppv_npv(adj.pi1.value, rates.fp.value, rates.fn.value);
            adj.ppv[sj] = trust.ppv;
            adj.npv[sj] = trust.npv;
        }
    }
    return adj;
}

MetricEstimates full_adjust(const LabelMatrix& matrix, const ProbEval& eval) {
    const VoteResult votes = majority_vote(matrix);
    const MetricEstimates naive = naive_estimates(matrix, votes);
    return full_adjust_from_naive(naive, matrix.files(), eval);
}

}  // namespace detmet
