#pragma once

// Independent reference computations used by the tests. Deliberately naive.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace oracle {

/// U of `a`: pairs with a > b plus half the ties, by direct pair counting.
inline double pair_count_u(std::span<const double> a, std::span<const double> b) {
    double u = 0.0;
    for (double x : a) {
        for (double y : b) {
            if (x > y) u += 1.0;
            else if (x == y) u += 0.5;
        }
    }
    return u;
}

/// Two-sided permutation p-value of Mann-Whitney U by enumerating every way
/// of splitting the pooled sample into groups of |a| and |b|.
inline double enumerated_two_sided_p(std::span<const double> a, std::span<const double> b) {
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::size_t n = a.size();
    const std::size_t total = pooled.size();
    const double observed = pair_count_u(a, b);

    std::vector<bool> pick(total, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n), true);
    double le = 0.0;
    double ge = 0.0;
    double count = 0.0;
    // prev_permutation over a sorted-descending mask visits every subset once.
    do {
        std::vector<double> x;
        std::vector<double> y;
        for (std::size_t i = 0; i < total; ++i) (pick[i] ? x : y).push_back(pooled[i]);
        const double u = pair_count_u(x, y);
        if (u <= observed + 1e-12) le += 1.0;
        if (u >= observed - 1e-12) ge += 1.0;
        count += 1.0;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return std::min(1.0, 2.0 * std::min(le, ge) / count);
}

/// Binomial coefficient as a double.
inline double choose(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

}  // namespace oracle
