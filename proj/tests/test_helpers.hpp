#pragma once

// Test-only oracles, kept independent of the library code paths they check:
// brute-force enumeration over all label vectors, and a Pascal-triangle
// binomial pmf.

#include <Eigen/Dense>

#include <initializer_list>
#include <vector>

#include "detmet/asymptotics.hpp"
#include "detmet/poisson_binomial.hpp"
#include "detmet/types.hpp"

namespace detmet::testing {

inline LabelMatrix matrix_from_rows(std::initializer_list<std::initializer_list<int>> rows) {
    const auto m = static_cast<Eigen::Index>(rows.size());
    const auto n = static_cast<Eigen::Index>(rows.begin()->size());
    LabelStorage labels(m, n);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (int cell : row) labels(i, j++) = static_cast<LabelCell>(cell);
        ++i;
    }
    return LabelMatrix::from_labels(std::move(labels));
}

inline Eigen::ArrayXd probs(std::initializer_list<double> values) {
    Eigen::ArrayXd out(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) out[i++] = v;
    return out;
}

/// Exact tail probability by enumerating all 2^k outcomes.
inline double enumerate_tail(const Eigen::ArrayXd& p, const TailQuery& query) {
    const int k = static_cast<int>(p.size());
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
        double weight = 1.0;
        std::int64_t sum = 0;
        for (int j = 0; j < k; ++j) {
            if (mask & (1u << j)) {
                weight *= p[j];
                ++sum;
            } else {
                weight *= 1.0 - p[j];
            }
        }
        if (query.satisfied_by(sum)) total += weight;
    }
    return total;
}

/// Cell probabilities by enumerating all 2^n full label vectors and voting
/// them; independent of the leave-one-out factorization.
inline ConditionalCellProbs enumerate_cell_probs(const std::vector<DetectorProfile>& profiles,
                                                 int j, int c) {
    const int n = static_cast<int>(profiles.size());
    ConditionalCellProbs cells;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        double weight = 1.0;
        int sum = 0;
        for (int k = 0; k < n; ++k) {
            const double fire = c == 1 ? 1.0 - profiles[static_cast<std::size_t>(k)].fn
                                       : profiles[static_cast<std::size_t>(k)].fp;
            if (mask & (1u << k)) {
                weight *= fire;
                ++sum;
            } else {
                weight *= 1.0 - fire;
            }
        }
        const int vote = 2 * sum >= n ? 1 : 0;
        const int label = (mask >> j) & 1u;
        if (vote == 0 && label == 1) cells.p01 += weight;
        else if (vote == 0 && label == 0) cells.p00 += weight;
        else if (vote == 1 && label == 0) cells.p10 += weight;
        else cells.p11 += weight;
    }
    return cells;
}

/// Binomial(k, p) pmf from Pascal's-triangle coefficients and pow terms; a
/// different route than the convolution DP and the multiplicative tail sum.
inline Eigen::ArrayXd binomial_pmf_pascal(int k, double p) {
    std::vector<double> coeff(static_cast<std::size_t>(k) + 1, 0.0);
    coeff[0] = 1.0;
    for (int row = 1; row <= k; ++row)
        for (int s = row; s >= 1; --s) coeff[static_cast<std::size_t>(s)] += coeff[static_cast<std::size_t>(s - 1)];
    Eigen::ArrayXd pmf(k + 1);
    for (int s = 0; s <= k; ++s)
        pmf[s] = coeff[static_cast<std::size_t>(s)] * std::pow(p, s) * std::pow(1.0 - p, k - s);
    return pmf;
}

}  // namespace detmet::testing
