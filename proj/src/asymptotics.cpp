#include "detmet/asymptotics.hpp"

#include "detmet/rng.hpp"

namespace detmet {

static Eigen::ArrayXd drop_index(const Eigen::ArrayXd& v, int j) {
    Eigen::ArrayXd out(v.size() - 1);
    Eigen::Index w = 0;
    for (Eigen::Index k = 0; k < v.size(); ++k)
        if (k != j) out[w++] = v[k];
    return out;
}

ConditionalVoteProbs leave_one_out_tails(const Eigen::ArrayXd& fp, const Eigen::ArrayXd& fn,
                                         int j, const ProbEval& eval) {
    const auto n = fp.size();
    if (n != fn.size()) throw InvalidInput("rate vectors must have equal length");
    if (n < 2) throw InvalidInput("leave-one-out tails need at least 2 detectors");
    if (j < 0 || j >= n) throw InvalidInput("detector index out of range");
    // The full-vote thresholds n/2 and (n-2)/2 apply to the sum over the
    // other n-1 detectors depending on detector j's own label.
    const TailQuery below_low = TailQuery::less(static_cast<double>(n - 2) / 2.0);
    const TailQuery below_high = TailQuery::less(static_cast<double>(n) / 2.0);
    const Eigen::ArrayXd hit_others = 1.0 - drop_index(fn, j);
    const Eigen::ArrayXd fp_others = drop_index(fp, j);
    ConditionalVoteProbs cond;
    if (eval.mode == TailMode::Exact) {
        // One pmf per class serves both thresholds.
        const Eigen::ArrayXd pmf_mal = exact_poisson_binomial_pmf(hit_others);
        const Eigen::ArrayXd pmf_ben = exact_poisson_binomial_pmf(fp_others);
        cond.alpha1 = pmf_tail(pmf_mal, below_low);
        cond.alpha2 = pmf_tail(pmf_mal, below_high);
        cond.beta1 = pmf_tail(pmf_ben, below_low);
        cond.beta2 = pmf_tail(pmf_ben, below_high);
    } else {
        McConfig mc = eval.mc;
        mc.seed = derive_path(eval.mc.seed, {static_cast<std::uint64_t>(j), 1});
        cond.alpha1 = mc_tail_probability(hit_others, below_low, mc);
        cond.alpha2 = mc_tail_probability(hit_others, below_high, mc);
        mc.seed = derive_path(eval.mc.seed, {static_cast<std::uint64_t>(j), 0});
        cond.beta1 = mc_tail_probability(fp_others, below_low, mc);
        cond.beta2 = mc_tail_probability(fp_others, below_high, mc);
    }
    return cond;
}

ConditionalCellProbs cell_probs(const std::vector<DetectorProfile>& profiles, int j, int c,
                                const ProbEval& eval) {
    if (c != 0 && c != 1) throw InvalidInput("true class must be 0 or 1");
    const Eigen::ArrayXd fp = fp_rates(profiles);
    const Eigen::ArrayXd fn = fn_rates(profiles);
    const ConditionalVoteProbs cond = leave_one_out_tails(fp, fn, j, eval);
    // Cell = own-label probability times the matching leave-one-out tail.
    // Voting malicious with own label 1 needs the others at >= (n-2)/2;
    // with own label 0 it needs them at >= n/2.
    ConditionalCellProbs cells;
    if (c == 1) {
        const double hit = 1.0 - profiles[static_cast<std::size_t>(j)].fn;
        const double miss = profiles[static_cast<std::size_t>(j)].fn;
        cells.p01 = hit * cond.alpha1;
        cells.p00 = miss * cond.alpha2;
        cells.p10 = miss * (1.0 - cond.alpha2);
        cells.p11 = hit * (1.0 - cond.alpha1);
    } else {
        const double flag = profiles[static_cast<std::size_t>(j)].fp;
        const double pass = 1.0 - profiles[static_cast<std::size_t>(j)].fp;
        cells.p01 = flag * cond.beta1;
        cells.p00 = pass * cond.beta2;
        cells.p10 = pass * (1.0 - cond.beta2);
        cells.p11 = flag * (1.0 - cond.beta1);
    }
    return cells;
}

VotedFractionMoments voted_fraction_moments(double pi1, std::int64_t m, double p11, double p01) {
    if (m < 1) throw InvalidInput("file count must be >= 1");
    if (!within(pi1, 0, 1) || !within(p11, 0, 1) || !within(p01, 0, 1))
        throw InvalidInput("probability outside [0,1]");
    VotedFractionMoments out;
    out.mean = pi1 * p11 + (1.0 - pi1) * p01;
    out.var =
        (pi1 * p11 * (1.0 - p11) + (1.0 - pi1) * p01 * (1.0 - p01)) / static_cast<double>(m);
    return out;
}

// Linearized moments of R = A / (A + B), where A and B are each the sum of
// one multinomial cell count over the two independent classes. With
// D = E[A] + E[B], dR/dA = E[B]/D^2 and dR/dB = -E[A]/D^2, and the per-class
// multinomial moments give
//   Var(R) ~= sum_c [ (dR/dA)^2 var_c(A) + 2 (dR/dA)(dR/dB) cov_c(A,B)
//                     + (dR/dB)^2 var_c(B) ].
static MeanVar ratio_moments(double m0, double m1, double cell_a_benign, double cell_a_malicious,
                             double cell_b_benign, double cell_b_malicious) {
    const double mu_a = m1 * cell_a_malicious + m0 * cell_a_benign;
    const double mu_b = m1 * cell_b_malicious + m0 * cell_b_benign;
    const double total = mu_a + mu_b;
    if (total <= 0.0) return MeanVar{};
    MeanVar out;
    out.available = true;
    out.mean = mu_a / total;
    const double da = mu_b / (total * total);
    const double db = -mu_a / (total * total);
    double var = 0.0;
    const double mc[2] = {m0, m1};
    const double pa[2] = {cell_a_benign, cell_a_malicious};
    const double pb[2] = {cell_b_benign, cell_b_malicious};
    for (int c = 0; c < 2; ++c) {
        const double var_a = mc[c] * pa[c] * (1.0 - pa[c]);
        const double var_b = mc[c] * pb[c] * (1.0 - pb[c]);
        const double cov_ab = -mc[c] * pa[c] * pb[c];
        var += da * da * var_a + 2.0 * da * db * cov_ab + db * db * var_b;
    }
    out.var = var < 0.0 ? 0.0 : var;
    return out;
}

AsymptoticMoments detector_estimator_moments(const std::vector<DetectorProfile>& profiles, int j,
                                   std::int64_t m0, std::int64_t m1, const ProbEval& eval) {
    if (m0 < 1 || m1 < 1) throw InvalidInput("class sizes must be >= 1");
    AsymptoticMoments out;
    out.m0 = m0;
    out.m1 = m1;
    out.cells_benign = cell_probs(profiles, j, 0, eval);
    out.cells_malicious = cell_probs(profiles, j, 1, eval);
    const auto& b = out.cells_benign;
    const auto& m = out.cells_malicious;
    const auto m0d = static_cast<double>(m0);
    const auto m1d = static_cast<double>(m1);
    out.fp = ratio_moments(m0d, m1d, b.p01, m.p01, b.p00, m.p00);
    out.fn = ratio_moments(m0d, m1d, b.p10, m.p10, b.p11, m.p11);
    out.ppv = ratio_moments(m0d, m1d, b.p11, m.p11, b.p01, m.p01);
    out.npv = ratio_moments(m0d, m1d, b.p00, m.p00, b.p10, m.p10);
    return out;
}

}  // namespace detmet
