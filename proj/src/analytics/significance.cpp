/// @file significance.cpp

#include "medtrap/analytics/significance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "medtrap/core/rng.hpp"

namespace medtrap::analytics {

namespace {

constexpr double kTinyP = std::numeric_limits<double>::min();

double clamp_open(double p) { return std::clamp(p, kTinyP, 1.0 - std::numeric_limits<double>::epsilon()); }

}  // namespace

double one_sided_p(double t, double df) {
    if (!(df > 0)) throw std::invalid_argument("one_sided_p: df must be positive");
    const boost::math::students_t dist(df);
    return boost::math::cdf(boost::math::complement(dist, t));
}

BootstrapResult bootstrap_significance(const std::vector<double>& a, const std::vector<double>& b, double fraction,
                                       int runs, std::uint64_t rng_seed) {
    if (a.size() != b.size()) throw std::invalid_argument("bootstrap_significance: score vectors differ in length");
    if (a.empty()) throw std::invalid_argument("bootstrap_significance: empty score vectors");
    if (runs < 2) throw std::invalid_argument("bootstrap_significance: runs must be >= 2");
    if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("bootstrap_significance: fraction must be in (0,1]");

    const auto n = a.size();
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
    Rng rng(rng_seed);
    std::vector<std::size_t> idx(n);

    BootstrapResult out;
    out.subset_size = k;
    for (int r = 0; r < runs; ++r) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.uniform_index(n - i)]);
        double sa = 0.0, sb = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            sa += a[idx[i]];
            sb += b[idx[i]];
        }
        out.mean_a.push_back(sa / static_cast<double>(k));
        out.mean_b.push_back(sb / static_cast<double>(k));
    }

    std::vector<double> d(static_cast<std::size_t>(runs));
    for (std::size_t r = 0; r < d.size(); ++r) d[r] = out.mean_a[r] - out.mean_b[r];
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(runs);
    double ss = 0.0;
    for (double x : d) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(runs - 1));
    const double scale = std::max(1.0, std::abs(mean));
    if (sd <= 1e-12 * scale) {
        out.t = mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mean);
        out.p = mean > 0.0 ? kTinyP : (mean < 0.0 ? 1.0 - std::numeric_limits<double>::epsilon() : 0.5);
        if (std::abs(mean) <= 1e-12) out.p = 0.5;
        return out;
    }
    out.t = mean / (sd / std::sqrt(static_cast<double>(runs)));
    out.p = clamp_open(one_sided_p(out.t, runs - 1.0));
    return out;
}

}  // namespace medtrap::analytics
