#pragma once

#include <cmath>
#include <string>

#include "wmlab/error.hpp"

namespace wmlab {

/// Spatial dimension of the equivariant wave map problem.
///
/// Any d >= 3 is accepted; the solvers are validated for 3 <= d <= 6 and
/// `validated()` reports whether d lies in that window.
class Dimension {
public:
    explicit Dimension(int d) : d_(d) {
        if (d < 3) {
            throw ValidationError("dimension must be >= 3, got " + std::to_string(d));
        }
    }

    int value() const noexcept { return d_; }
    double as_double() const noexcept { return static_cast<double>(d_); }
    bool validated() const noexcept { return d_ <= 6; }

    /// Shooting parameter f_0'(0) = 2/sqrt(d-2) of the explicit solution.
    double c0() const noexcept { return 2.0 / std::sqrt(d_ - 2.0); }

    friend bool operator==(Dimension a, Dimension b) noexcept { return a.d_ == b.d_; }

private:
    int d_;
};

}  // namespace wmlab
