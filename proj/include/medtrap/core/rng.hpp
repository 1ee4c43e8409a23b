/// @file rng.hpp
/// @brief Portable seeded randomness.
///
/// std::mt19937_64 output is fixed by the standard but the std distributions
/// are not, so index sampling is done here to keep runs reproducible across
/// standard libraries.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace medtrap {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Child stream keyed by a label, independent of draw order elsewhere.
    static Rng derive(std::uint64_t seed, std::string_view label);

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::size_t uniform_index(std::size_t n);

    /// Uniform real in [0, 1).
    double uniform01();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(i)]);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace medtrap
