#include "detmet/voting.hpp"

namespace detmet {

VoteResult majority_vote(const LabelMatrix& matrix) {
    const Eigen::Index m = matrix.files();
    const Eigen::Index n = matrix.detectors();
    VoteResult result;
    result.vote_counts = CountArray::Zero(m);
    // Column-by-column accumulation keeps the walk contiguous.
    for (Eigen::Index j = 0; j < n; ++j) {
        const LabelCell* col = matrix.labels.col(j).data();
        int* counts = result.vote_counts.data();
        for (Eigen::Index i = 0; i < m; ++i) counts[i] += col[i];
    }
    result.votes.resize(m);
    const auto threshold = static_cast<int>(n);
    for (Eigen::Index i = 0; i < m; ++i)
        result.votes[i] = static_cast<LabelCell>(2 * result.vote_counts[i] >= threshold ? 1 : 0);
    return result;
}

VoteTally count_voted(const VoteResult& votes) {
    VoteTally tally;
    for (Eigen::Index i = 0; i < votes.votes.size(); ++i) {
        if (votes.votes[i]) ++tally.voted_malicious;
        else ++tally.voted_benign;
    }
    return tally;
}

}  // namespace detmet
