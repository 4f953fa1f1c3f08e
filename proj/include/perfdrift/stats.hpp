#pragma once

// Mann-Whitney U test: average-rank tie handling, exact null distribution
// for small untied samples, tie-corrected normal approximation otherwise.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace perfdrift::stats {

enum class Alternative { TwoSided, Greater, Less };

enum class UMethod { ExactPermutation, NormalApprox };

struct UTestResult {
    /// U of the first sample: pairs (a, b) with a > b, ties counting one half.
    double u_statistic = 0.0;
    double p_value = 1.0;
    UMethod method = UMethod::NormalApprox;
    /// 1 - sum(t^3 - t) / (N^3 - N); 1 when there are no ties.
    double tie_correction = 1.0;
};

/// Largest combined sample size for which exact p-values are computed.
inline constexpr std::size_t kExactMaxCombined = 16;

/// Ranks 1..n; tied values share the mean of the ranks they span.
std::vector<double> rank_with_ties(std::span<const double> values);

/// Throws std::invalid_argument if either sample is empty. `method` overrides
/// the automatic choice; forcing the exact method on tied samples throws.
UTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                           Alternative alternative = Alternative::TwoSided,
                           std::optional<UMethod> method = std::nullopt);

/// Number of ways each U value in 0..n*m arises when n of n+m distinct
/// ranks go to the first sample.
std::vector<double> u_null_counts(std::size_t n, std::size_t m);

/// Upper tail of the standard normal.
double normal_sf(double z);

}  // namespace perfdrift::stats
