#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "wmlab/profiles.hpp"

namespace wmlab::test {

/// Profiles are cheap but used by many tests; solve each (d, n) once per process.
inline const SelfSimilarProfile& profile(int d, int n) {
    static std::map<std::pair<int, int>, SelfSimilarProfile> cache;
    auto it = cache.find({d, n});
    if (it == cache.end()) it = cache.emplace(std::pair{d, n}, find_profile(Dimension(d), n)).first;
    return it->second;
}

/// f_0 written out independently of the library: 2 arctan(y / sqrt(d - 2)).
inline double f0(int d, double y) { return 2.0 * std::atan(y / std::sqrt(d - 2.0)); }
inline double f0p(int d, double y) {
    const double a = std::sqrt(d - 2.0);
    return 2.0 * a / (a * a + y * y);
}
inline double f0pp(int d, double y) {
    const double a = std::sqrt(d - 2.0);
    return -4.0 * a * y / ((a * a + y * y) * (a * a + y * y));
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace wmlab::test
