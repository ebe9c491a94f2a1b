#pragma once

// Globally adaptive Gauss–Kronrod (7/15) quadrature for matrix-valued
// integrands on a finite interval.

#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <sstream>
#include <vector>

#include "jacobi_scatter/core.hpp"

namespace jacobi_scatter {

namespace detail {

// Kronrod abscissae (positive half, descending) and weights; every other
// abscissa is a Gauss point.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

} // namespace detail

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    int max_intervals = 2000;
};

struct QuadratureResult {
    CMatrix value;
    double error_estimate;
    int intervals;
};

/// ∫_a^b f(x) dx for f returning rows×cols complex matrices. Error estimates
/// use the operator norm of the Kronrod–Gauss difference.
inline QuadratureResult integrate_gk15(const std::function<CMatrix(double)>& f, double a, double b,
                                       const QuadratureOptions& opts = {}) {
    struct Piece {
        double a, b;
        CMatrix value;
        double err;
        bool operator<(const Piece& o) const { return err < o.err; }
    };
    auto rule = [&](double lo, double hi) {
        const double c = 0.5 * (lo + hi);
        const double h = 0.5 * (hi - lo);
        const CMatrix fc = f(c);
        CMatrix k = detail::kWgk[7] * fc;
        CMatrix g = detail::kWg[3] * fc;
        for (int i = 0; i < 7; ++i) {
            const double dx = h * detail::kXgk[static_cast<std::size_t>(i)];
            const CMatrix s = f(c - dx) + f(c + dx);
            k += detail::kWgk[static_cast<std::size_t>(i)] * s;
            if (i % 2 == 1) g += detail::kWg[static_cast<std::size_t>(i / 2)] * s;
        }
        k *= h;
        g *= h;
        return Piece{lo, hi, k, op_norm(k - g)};
    };

    std::priority_queue<Piece> heap;
    heap.push(rule(a, b));
    CMatrix total = heap.top().value;
    double err = heap.top().err;
    int count = 1;
    while (err > std::max(opts.abs_tol, opts.rel_tol * op_norm(total))) {
        if (count >= opts.max_intervals) {
            std::ostringstream os;
            os << "quadrature did not converge on [" << a << ", " << b << "] (error estimate " << err << ")";
            throw NumericalError(os.str());
        }
        Piece worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Piece left = rule(worst.a, mid);
        Piece right = rule(mid, worst.b);
        heap.push(left);
        heap.push(right);
        ++count;
        // Recompute totals from the heap contents to avoid cancellation drift.
        auto copy = heap;
        std::vector<CMatrix> parts;
        err = 0.0;
        while (!copy.empty()) {
            parts.push_back(copy.top().value);
            err += copy.top().err;
            copy.pop();
        }
        total = pairwise_sum(parts, total.rows());
    }
    return {total, err, count};
}

} // namespace jacobi_scatter
