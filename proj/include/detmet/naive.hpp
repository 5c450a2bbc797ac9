#pragma once

#include <vector>

#include "detmet/types.hpp"
#include "detmet/voting.hpp"

namespace detmet {

/// Per-detector 2x2 contingency of (voted label, detector label): z_ab counts
/// files with vote a and label b. The four cells partition the m files.
struct ZCounts {
    std::int64_t z01 = 0;  // voted benign, labeled malicious
    std::int64_t z00 = 0;  // voted benign, labeled benign
    std::int64_t z10 = 0;  // voted malicious, labeled benign
    std::int64_t z11 = 0;  // voted malicious, labeled malicious

    std::int64_t total() const { return z01 + z00 + z10 + z11; }
};

/// One pass over the matrix; votes must come from the same matrix.
std::vector<ZCounts> z_counts(const LabelMatrix& matrix, const VoteResult& votes);

/// Plug-in estimators treating the voted label as truth:
///   pi1  = (# voted malicious) / m
///   fp_j = z01 / (z01 + z00)     fn_j = z10 / (z10 + z11)
///   ppv_j = z11 / (z11 + z01)    npv_j = z00 / (z00 + z10)
/// A zero denominator marks that entry unavailable instead of inventing a value.
MetricEstimates naive_estimates(const LabelMatrix& matrix, const VoteResult& votes);

MetricEstimates naive_estimates_from_counts(std::int64_t voted_malicious, std::int64_t m,
                                            const std::vector<ZCounts>& counts);

}  // namespace detmet
