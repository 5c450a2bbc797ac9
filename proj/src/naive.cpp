#include "detmet/naive.hpp"

namespace detmet {

std::vector<ZCounts> z_counts(const LabelMatrix& matrix, const VoteResult& votes) {
    const Eigen::Index m = matrix.files();
    const Eigen::Index n = matrix.detectors();
    if (votes.files() != m) throw InvalidInput("vote result does not match matrix row count");
    std::vector<ZCounts> counts(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        const LabelCell* col = matrix.labels.col(j).data();
        const LabelCell* vote = votes.votes.data();
        std::int64_t cell[2][2] = {{0, 0}, {0, 0}};  // [vote][label]
        for (Eigen::Index i = 0; i < m; ++i) ++cell[vote[i]][col[i]];
        auto& z = counts[static_cast<std::size_t>(j)];
        z.z00 = cell[0][0];
        z.z01 = cell[0][1];
        z.z10 = cell[1][0];
        z.z11 = cell[1][1];
    }
    return counts;
}

static Estimate ratio(std::int64_t num, std::int64_t den) {
    if (den == 0) return Estimate::unavailable();
    return Estimate::of(static_cast<double>(num) / static_cast<double>(den));
}

MetricEstimates naive_estimates_from_counts(std::int64_t voted_malicious, std::int64_t m,
                                            const std::vector<ZCounts>& counts) {
    MetricEstimates est;
    est.kind = EstimateKind::Naive;
    est.pi1 = Estimate::of(static_cast<double>(voted_malicious) / static_cast<double>(m));
    est.fp.reserve(counts.size());
    est.fn.reserve(counts.size());
    est.ppv.reserve(counts.size());
    est.npv.reserve(counts.size());
    for (const auto& z : counts) {
        est.fp.push_back(ratio(z.z01, z.z01 + z.z00));
        est.fn.push_back(ratio(z.z10, z.z10 + z.z11));
        est.ppv.push_back(ratio(z.z11, z.z11 + z.z01));
        est.npv.push_back(ratio(z.z00, z.z00 + z.z10));
    }
    return est;
}

MetricEstimates naive_estimates(const LabelMatrix& matrix, const VoteResult& votes) {
    const auto tally = count_voted(votes);
    return naive_estimates_from_counts(tally.voted_malicious, matrix.files(),
                                       z_counts(matrix, votes));
}

}  // namespace detmet
