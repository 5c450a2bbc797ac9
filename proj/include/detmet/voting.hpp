#pragma once

#include "detmet/types.hpp"

namespace detmet {

/// Majority vote over detectors: votes[i] = 1 iff sum_j labels(i,j) >= n/2.
/// The comparison is 2*count >= n in integers, so even-n ties resolve to 1
/// without any floating point involved.
VoteResult majority_vote(const LabelMatrix& matrix);

struct VoteTally {
    std::int64_t voted_benign = 0;
    std::int64_t voted_malicious = 0;
};

VoteTally count_voted(const VoteResult& votes);

}  // namespace detmet
