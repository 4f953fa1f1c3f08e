#include "perfdrift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace perfdrift::stats {

std::vector<double> rank_with_ties(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) {
            ++j;
        }
        // positions i..j-1 hold ranks i+1..j
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            ranks[order[k]] = rank;
        }
        i = j;
    }
    return ranks;
}

double normal_sf(double z) {
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

std::vector<double> u_null_counts(std::size_t n, std::size_t m) {
    // table[i][j][u]: arrangements of i first-sample and j second-sample
    // distinct values with statistic u. Placing the largest value in the
    // first sample adds j to U.
    std::vector<std::vector<std::vector<double>>> table(n + 1, std::vector<std::vector<double>>(m + 1));
    for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t j = 0; j <= m; ++j) {
            auto& cell = table[i][j];
            cell.assign(i * j + 1, 0.0);
            if (i == 0 || j == 0) {
                cell[0] = 1.0;
                continue;
            }
            const auto& with_first = table[i - 1][j];
            for (std::size_t u = 0; u < with_first.size(); ++u) {
                cell[u + j] += with_first[u];
            }
            const auto& with_second = table[i][j - 1];
            for (std::size_t u = 0; u < with_second.size(); ++u) {
                cell[u] += with_second[u];
            }
        }
    }
    return table[n][m];
}

namespace {

double clamp_probability(double p) {
    return std::clamp(p, 0.0, 1.0);
}

double exact_p(double u, std::size_t n, std::size_t m, Alternative alternative) {
    const auto counts = u_null_counts(n, m);
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    // u is an integer in the untied case.
    const auto k = static_cast<std::size_t>(std::llround(u));
    double lower = 0.0;  // P(U <= u)
    double upper = 0.0;  // P(U >= u)
    for (std::size_t v = 0; v < counts.size(); ++v) {
        if (v <= k) lower += counts[v];
        if (v >= k) upper += counts[v];
    }
    lower /= total;
    upper /= total;
    switch (alternative) {
        case Alternative::Greater: return clamp_probability(upper);
        case Alternative::Less: return clamp_probability(lower);
        case Alternative::TwoSided: break;
    }
    return clamp_probability(2.0 * std::min(lower, upper));
}

double approx_p(double u, double n, double m, double tie_sum, Alternative alternative) {
    const double big_n = n + m;
    const double mean = 0.5 * n * m;
    double variance = n * m / 12.0 * ((big_n + 1.0) - tie_sum / (big_n * (big_n - 1.0)));
    if (!(variance > 0.0)) {
        return 1.0;
    }
    const double sd = std::sqrt(variance);
    switch (alternative) {
        case Alternative::Greater: return clamp_probability(normal_sf((u - mean - 0.5) / sd));
        case Alternative::Less: return clamp_probability(normal_sf((mean - u - 0.5) / sd));
        case Alternative::TwoSided: break;
    }
    const double extreme = std::max(u, n * m - u);
    return clamp_probability(2.0 * normal_sf((extreme - mean - 0.5) / sd));
}

}  // namespace

UTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b, Alternative alternative,
                           std::optional<UMethod> method) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("mann_whitney_u needs two non-empty samples");
    }
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    const std::size_t big_n = n + m;

    std::vector<double> pooled;
    pooled.reserve(big_n);
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = rank_with_ties(pooled);

    const double rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);

    UTestResult result;
    result.u_statistic = rank_sum_a - dn * (dn + 1.0) / 2.0;

    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_sum = 0.0;
    bool has_ties = false;
    for (std::size_t i = 0; i < big_n;) {
        std::size_t j = i + 1;
        while (j < big_n && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        if (j - i > 1) has_ties = true;
        tie_sum += t * t * t - t;
        i = j;
    }
    const double dbig = static_cast<double>(big_n);
    result.tie_correction = big_n > 1 ? 1.0 - tie_sum / (dbig * dbig * dbig - dbig) : 1.0;

    if (method == UMethod::ExactPermutation && has_ties) {
        throw std::invalid_argument("exact Mann-Whitney p-value needs untied samples");
    }
    const bool exact = method ? *method == UMethod::ExactPermutation : (!has_ties && big_n <= kExactMaxCombined);
    if (exact) {
        result.method = UMethod::ExactPermutation;
        result.p_value = exact_p(result.u_statistic, n, m, alternative);
    } else {
        result.method = UMethod::NormalApprox;
        result.p_value = approx_p(result.u_statistic, dn, dm, tie_sum, alternative);
    }
    return result;
}

}  // namespace perfdrift::stats
