#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

#include "jacobi_scatter/error.hpp"

namespace jacobi_scatter {

/// J_0(x), …, J_nmax(x) for x ≥ 0 by Miller's backward recurrence,
/// normalized with J_0 + 2 Σ_k J_{2k} = 1.
inline std::vector<double> bessel_j_sequence(double x, long nmax) {
    if (x < 0.0 || !std::isfinite(x)) throw ValidationError("bessel_j_sequence: x must be finite and non-negative");
    if (nmax < 0) throw ValidationError("bessel_j_sequence: nmax must be non-negative");
    std::vector<double> out(static_cast<std::size_t>(nmax + 1), 0.0);
    if (x < 1e-300) {
        out[0] = 1.0;
        return out;
    }
    const double top = std::max(static_cast<double>(nmax), x);
    long start = static_cast<long>(top + 60.0 + 6.0 * std::sqrt(top));
    if (start % 2) ++start;

    std::vector<double> j(static_cast<std::size_t>(start + 2), 0.0);
    j[static_cast<std::size_t>(start + 1)] = 0.0;
    j[static_cast<std::size_t>(start)] = 1e-300;
    for (long k = start; k >= 1; --k) {
        const auto ku = static_cast<std::size_t>(k);
        j[ku - 1] = (2.0 * static_cast<double>(k) / x) * j[ku] - j[ku + 1];
        if (std::abs(j[ku - 1]) > 1e250) {
            for (std::size_t i = ku - 1; i <= static_cast<std::size_t>(start); ++i) j[i] *= 1e-250;
        }
    }
    double norm = j[0];
    for (long k = 2; k <= start; k += 2) norm += 2.0 * j[static_cast<std::size_t>(k)];
    for (long n = 0; n <= nmax; ++n) out[static_cast<std::size_t>(n)] = j[static_cast<std::size_t>(n)] / norm;
    return out;
}

/// J_n(x) for integer n of either sign, read from a precomputed sequence.
class BesselTable {
public:
    BesselTable(double x, long nmax) : x_(x), values_(bessel_j_sequence(x, nmax)) {}

    double x() const { return x_; }
    long nmax() const { return static_cast<long>(values_.size()) - 1; }

    double operator()(long n) const {
        const long a = std::labs(n);
        if (a > nmax()) throw ValidationError("BesselTable: order outside the precomputed range");
        const double v = values_[static_cast<std::size_t>(a)];
        return (n < 0 && (a % 2)) ? -v : v;
    }

private:
    double x_;
    std::vector<double> values_;
};

} // namespace jacobi_scatter
