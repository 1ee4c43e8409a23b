/// @file significance.hpp
/// @brief Paired bootstrap resampling with a one-sided t-test.

#pragma once

#include <cstdint>
#include <vector>

namespace medtrap::analytics {

struct BootstrapResult {
    std::vector<double> mean_a;  // per run
    std::vector<double> mean_b;
    double t = 0.0;
    double p = 0.5;  // one-sided, alternative: a > b
    std::size_t subset_size = 0;
};

/// Upper-tail probability P(T > t) for Student's t with `df` degrees of freedom.
double one_sided_p(double t, double df);

/// Draws `runs` subsets of round(fraction·n) items without replacement, using
/// the same indices for both systems, and tests whether the mean of `a`
/// exceeds that of `b` with a one-sided paired t-test over the per-run means.
/// Zero variance across runs gives p = 0.5 for a zero mean difference and the
/// limiting value (smallest positive double or its complement) otherwise.
BootstrapResult bootstrap_significance(const std::vector<double>& a, const std::vector<double>& b,
                                       double fraction = 0.8, int runs = 10, std::uint64_t rng_seed = 0);

}  // namespace medtrap::analytics
