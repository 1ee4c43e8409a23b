/// @file delta.hpp
/// @brief Relative change of a dynamic score against a static average.

#pragma once

namespace medtrap::analytics {

/// 100·(dynamic − static_avg)/static_avg. Requires static_avg > 0.
double relative_delta_exact(double static_avg, double dynamic);

/// Rounds half away from zero to two decimals.
double round2(double x);

/// relative_delta_exact rounded to two decimals for reporting.
double relative_delta(double static_avg, double dynamic);

}  // namespace medtrap::analytics
