/// @file delta.cpp

#include "medtrap/analytics/delta.hpp"

#include <cmath>
#include <stdexcept>

namespace medtrap::analytics {

double relative_delta_exact(double static_avg, double dynamic) {
    if (!(static_avg > 0.0)) throw std::invalid_argument("relative_delta: static average must be positive");
    return 100.0 * (dynamic - static_avg) / static_avg;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

double relative_delta(double static_avg, double dynamic) { return round2(relative_delta_exact(static_avg, dynamic)); }

}  // namespace medtrap::analytics
