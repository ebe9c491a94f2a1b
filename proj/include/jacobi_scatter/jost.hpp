#pragma once

// Jost solutions of u(n+1) + u(n−1) + V(n)u(n) = E u(n), E = z + 1/z.
//
// Two independent constructions are provided:
//   * jost_volterra: exact one-sided substitution in the summation equation
//       u_+^z(n) = z^n I − Σ_{j>n} S^z(j−n) V(j) u_+^z(j)
//     (and its mirror for u_-^{1/z}), which is finite for finitely supported V;
//   * jost_series: the transmutation representation
//       u_±^{z^{±1}}(n) = z^{±n} (I + Σ_{m≥1} B_m^±(n) z^m)
//     with coefficients from transmutation_coeffs.
// solve_cauchy propagates arbitrary initial data with transfer matrices.

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jacobi_scatter/core.hpp"
#include "jacobi_scatter/potential.hpp"

namespace jacobi_scatter {

enum class Direction { plus, minus };

inline const char* to_string(Direction d) { return d == Direction::plus ? "plus" : "minus"; }

struct Window {
    long lo;
    long hi;
    bool contains(long n) const { return n >= lo && n <= hi; }
};

/// [min supp − margin, max supp + margin].
inline Window default_window(const Potential& v, long margin = 50) {
    return {v.min_support() - margin, v.max_support() + margin};
}

// ---------------------------------------------------------------------------
// Transfer matrices and the Cauchy problem
// ---------------------------------------------------------------------------

/// 𝒯^E(n) = [[E − V(n), −I], [I, 0]].
inline CMatrix transfer_matrix(const Potential& v, Complex E, long n) {
    const auto L = v.dim();
    CMatrix t = CMatrix::Zero(2 * L, 2 * L);
    t.topLeftCorner(L, L) = E * identity(L) - v(n);
    t.topRightCorner(L, L) = -identity(L);
    t.bottomLeftCorner(L, L) = identity(L);
    return t;
}

/// 𝒥 = [[0, −I], [I, 0]].
inline CMatrix symplectic_j(Eigen::Index L) {
    CMatrix j = CMatrix::Zero(2 * L, 2 * L);
    j.topRightCorner(L, L) = -identity(L);
    j.bottomLeftCorner(L, L) = identity(L);
    return j;
}

/// Unique solution with u(n0) = A0, u(n0+1) = B0 on the window. Forward steps
/// use 𝒯^E(n); backward steps use 𝒯^E(n)^{-1} = 𝒥 𝒯^{Ē}(n)* 𝒥*.
inline MatrixSeq solve_cauchy(const Potential& v, Complex E, long n0, const CMatrix& A0, const CMatrix& B0,
                              Window w) {
    const auto L = v.dim();
    if (!w.contains(n0) || !w.contains(n0 + 1))
        throw ValidationError("solve_cauchy: window must contain n0 and n0+1");
    if (A0.rows() != L || A0.cols() != L || B0.rows() != L || B0.cols() != L)
        throw ValidationError("solve_cauchy: initial data dimension mismatch");

    MatrixSeq u(w.lo, w.hi, L);
    u.set(n0, A0);
    u.set(n0 + 1, B0);

    // Φ(n) = (u(n+1); u(n)).
    CMatrix phi(2 * L, L);
    phi << B0, A0;
    for (long n = n0 + 1; n < w.hi; ++n) {
        phi = transfer_matrix(v, E, n) * phi;
        u.set(n + 1, phi.topRows(L));
    }
    const CMatrix J = symplectic_j(L);
    phi << B0, A0;
    for (long n = n0; n > w.lo; --n) {
        // Φ(n−1) = 𝒯^E(n)^{-1} Φ(n)
        const CMatrix tinv = J * transfer_matrix(v, std::conj(E), n).adjoint() * J.adjoint();
        phi = tinv * phi;
        u.set(n - 1, phi.bottomRows(L));
    }
    return u;
}

/// max over interior n of ‖u(n+1) + u(n−1) + (V(n) − E)u(n)‖ / (1 + local scale),
/// where the local scale is the largest of ‖u(n−1)‖, ‖u(n)‖, ‖u(n+1)‖.
inline double difference_residual(const Potential& v, Complex E, const MatrixSeq& u) {
    double worst = 0.0;
    for (long n = u.lo() + 1; n < u.hi(); ++n) {
        const CMatrix r = u(n + 1) + u(n - 1) + (v(n) - E * identity(v.dim())) * u(n);
        const double scale = std::max({op_norm(u(n - 1)), op_norm(u(n)), op_norm(u(n + 1))});
        worst = std::max(worst, op_norm(r) / (1.0 + scale));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Scalar kernel S^z(n)
// ---------------------------------------------------------------------------

/// Below this |z² − 1| the kernel is summed term by term.
inline constexpr double kSKernelSwitch = 1e-6;

/// S^z(n) = (z^n − z^{−n}) / (z − z^{−1}), with S^{±1}(n) = (±1)^{n+1} n.
inline Complex s_kernel(Complex z, long n) {
    if (z == Complex{0.0, 0.0}) throw ValidationError("s_kernel: z = 0 is outside the domain");
    if (n == 0) return 0.0;
    if (n < 0) return -s_kernel(z, -n);
    if (z == Complex{1.0, 0.0}) return static_cast<double>(n);
    if (z == Complex{-1.0, 0.0}) return (n % 2 == 1 ? 1.0 : -1.0) * static_cast<double>(n);
    if (std::abs(z * z - 1.0) < kSKernelSwitch) {
        // z^{n−1} + z^{n−3} + … + z^{−(n−1)}: regular at z = ±1.
        const Complex z2inv = 1.0 / (z * z);
        Complex term = std::pow(z, static_cast<double>(n - 1));
        Complex acc = 0.0;
        for (long j = 0; j < n; ++j) {
            acc += term;
            term *= z2inv;
        }
        return acc;
    }
    const Complex zn = std::pow(z, static_cast<double>(n));
    return (zn - 1.0 / zn) / (z - 1.0 / z);
}

// ---------------------------------------------------------------------------
// Jost solutions
// ---------------------------------------------------------------------------

struct JostOptions {
    /// Circle points within this angular distance of ±1 are rejected.
    double edge_exclusion = 1e-3;
};

/// plus: u = u_+^z, normalized so u(n) ≈ z^n as n → +∞.
/// minus: u = u_-^{1/z}, normalized so u(n) ≈ z^{−n} as n → −∞.
struct JostSolution {
    Direction direction;
    SpectralPoint point;
    MatrixSeq values;

    const CMatrix& operator()(long n) const { return values(n); }

    /// Free-normalized form ũ(n) = z^{∓n} u(n).
    CMatrix tilde(long n) const {
        const double e = direction == Direction::plus ? -static_cast<double>(n) : static_cast<double>(n);
        return std::pow(point.z, e) * values(n);
    }
};

/// Rejects z = 0, z = ±1 and circle points inside the excluded arcs.
inline SpectralPoint checked_jost_point(Complex z, const JostOptions& opts) {
    if (z == Complex{0.0, 0.0}) throw ValidationError("jost: z = 0 is excluded");
    const SpectralPoint p = SpectralPoint::from_z(z);
    if (std::abs(p.z - 1.0) < 1e-15 || std::abs(p.z + 1.0) < 1e-15)
        throw ValidationError("jost: z = " + format_complex(p.z) + " is a band edge (z = ±1 excluded)");
    if (p.on_circle()) {
        const double arg = std::abs(std::arg(p.z));
        const double dist = std::min(arg, kPi - arg);
        if (dist < opts.edge_exclusion)
            throw ValidationError("jost: z = " + format_complex(p.z) +
                                  " lies within the band-edge exclusion arc around ±1 (radius " +
                                  std::to_string(opts.edge_exclusion) + ")");
    }
    return p;
}

inline void check_window_covers_support(const Potential& v, Window w, const char* who) {
    if (w.hi < w.lo) throw ValidationError(std::string(who) + ": empty window");
    if (!v.empty() && (w.lo > v.min_support() || w.hi < v.max_support()))
        throw ValidationError(std::string(who) + ": window [" + std::to_string(w.lo) + ", " +
                              std::to_string(w.hi) + "] does not cover the support [" +
                              std::to_string(v.min_support()) + ", " + std::to_string(v.max_support()) + "]");
}

/// Exact substitution in the summation equation. For plus, u(n) = z^n I for
/// n ≥ max supp V and each earlier u(n) only uses u(j), j > n. Minus mirrors.
inline JostSolution jost_volterra(const Potential& v, Complex z, Direction dir, Window w,
                                  const JostOptions& opts = {}) {
    const SpectralPoint p = checked_jost_point(z, opts);
    check_window_covers_support(v, w, "jost_volterra");
    const auto L = v.dim();
    const Complex zz = p.z;
    MatrixSeq u(w.lo, w.hi, L);
    const auto& sites = v.sites();

    if (dir == Direction::plus) {
        for (long n = w.hi; n >= w.lo; --n) {
            CMatrix val = std::pow(zz, static_cast<double>(n)) * identity(L);
            for (auto it = sites.rbegin(); it != sites.rend() && it->n > n; ++it)
                val.noalias() -= s_kernel(zz, it->n - n) * (it->value * u(it->n));
            u.set(n, std::move(val));
        }
    } else {
        // u_-^{1/z}(n) = z^{−n} I + Σ_{j<n} S^{1/z}(j−n) V(j) u(j), and S^{1/z} = S^z.
        for (long n = w.lo; n <= w.hi; ++n) {
            CMatrix val = std::pow(zz, -static_cast<double>(n)) * identity(L);
            for (auto it = sites.begin(); it != sites.end() && it->n < n; ++it)
                val.noalias() += s_kernel(zz, it->n - n) * (it->value * u(it->n));
            u.set(n, std::move(val));
        }
    }
    return JostSolution{dir, p, std::move(u)};
}

// ---------------------------------------------------------------------------
// Transmutation coefficients
// ---------------------------------------------------------------------------

/// B_m^±(n) for n in a window, m = 0..M(n). Coefficients with larger m are
/// exactly zero: for plus, M(n) = 2·max(0, max supp − n) + 2; minus mirrors.
class TransmutationTable {
public:
    TransmutationTable(Direction dir, Window w, Eigen::Index dim, std::vector<std::vector<CMatrix>> coeffs)
        : dir_(dir), window_(w), dim_(dim), coeffs_(std::move(coeffs)) {}

    Direction direction() const { return dir_; }
    Window window() const { return window_; }
    Eigen::Index dim() const { return dim_; }

    /// Coefficients B_0..B_{M(n)} at site n.
    const std::vector<CMatrix>& at(long n) const {
        if (!window_.contains(n))
            throw ValidationError("transmutation table: n=" + std::to_string(n) + " outside window");
        return coeffs_[static_cast<std::size_t>(n - window_.lo)];
    }

    /// B_m(n), zero beyond the stored truncation index.
    CMatrix coeff(long n, long m) const {
        const auto& c = at(n);
        if (m < 0 || m >= static_cast<long>(c.size())) return zeros(dim_);
        return c[static_cast<std::size_t>(m)];
    }

    /// Σ_{m≥1} ‖B_m(n)‖.
    double coefficient_mass(long n) const {
        const auto& c = at(n);
        double acc = 0.0;
        for (std::size_t m = 1; m < c.size(); ++m) acc += op_norm(c[m]);
        return acc;
    }

    /// ũ(n) = I + Σ B_m(n) z^m as a polynomial series in z.
    WienerSeries tilde_series(long n) const { return WienerSeries(0, at(n), dim_); }

private:
    Direction dir_;
    Window window_;
    Eigen::Index dim_;
    std::vector<std::vector<CMatrix>> coeffs_;
};

/// Truncation index for plus at site n given the largest support index.
inline long transmutation_order(long support_edge, long n) { return 2 * std::max(0L, support_edge - n) + 2; }

namespace detail {

/// Plus-direction recursion on sites [lo, hi]:
///   B_1(n) = −Σ_{ℓ>n} V(ℓ),  B_2(n) = −Σ_{ℓ>n} V(ℓ)B_1(ℓ),
///   B_{m+2}(n) = −Σ_{ℓ>n} V(ℓ)B_{m+1}(ℓ) + B_m(n+1).
inline std::vector<std::vector<CMatrix>> transmutation_plus(const Potential& v, long lo, long hi) {
    const auto L = v.dim();
    const long top = std::max(hi, v.max_support());
    const long bottom = std::min(lo, top);
    const std::size_t count = static_cast<std::size_t>(top - bottom + 1);
    std::vector<std::vector<CMatrix>> table(count);
    // running[m] = Σ_{ℓ>n} V(ℓ) B_m(ℓ)
    std::vector<CMatrix> running;
    const long edge = v.max_support();

    for (long n = top; n >= bottom; --n) {
        const std::size_t idx = static_cast<std::size_t>(n - bottom);
        if (n < top) {
            // Fold site n+1 into the running sums.
            const CMatrix& vn1 = v(n + 1);
            if (!vn1.isZero(0.0)) {
                const auto& prev = table[idx + 1];
                if (running.size() < prev.size()) running.resize(prev.size(), zeros(L));
                for (std::size_t m = 0; m < prev.size(); ++m) running[m].noalias() += vn1 * prev[m];
            }
        }
        const long M = v.empty() ? 0 : transmutation_order(edge, n);
        std::vector<CMatrix> b(static_cast<std::size_t>(M + 1), zeros(L));
        b[0] = identity(L);
        auto run = [&](long m) -> CMatrix {
            return m < static_cast<long>(running.size()) ? running[static_cast<std::size_t>(m)] : zeros(L);
        };
        if (M >= 1) b[1] = -run(0);
        if (M >= 2) b[2] = -run(1);
        const std::vector<CMatrix>* next = n < top ? &table[idx + 1] : nullptr;
        for (long m = 1; m + 2 <= M; ++m) {
            CMatrix val = -run(m + 1);
            if (next && m < static_cast<long>(next->size())) val += (*next)[static_cast<std::size_t>(m)];
            b[static_cast<std::size_t>(m + 2)] = std::move(val);
        }
        table[idx] = std::move(b);
    }
    std::vector<std::vector<CMatrix>> out;
    for (long n = lo; n <= hi; ++n) out.push_back(table[static_cast<std::size_t>(n - bottom)]);
    return out;
}

} // namespace detail

/// Exact finite recursion for B_m^±(n). The minus table is the plus table of
/// the reflected potential read at −n, i.e.
///   B_{m+2}^-(n) = −Σ_{ℓ<n} V(ℓ)B_{m+1}^-(ℓ) + B_m^-(n−1).
inline TransmutationTable transmutation_coeffs(const Potential& v, Direction dir, Window w) {
    if (w.hi < w.lo) throw ValidationError("transmutation_coeffs: empty window");
    if (dir == Direction::plus) return TransmutationTable(dir, w, v.dim(), detail::transmutation_plus(v, w.lo, w.hi));
    auto mirrored = detail::transmutation_plus(v.reflected(), -w.hi, -w.lo);
    std::reverse(mirrored.begin(), mirrored.end());
    return TransmutationTable(dir, w, v.dim(), std::move(mirrored));
}

/// z^{±n} (I + Σ_{m≥1} B_m^±(n) z^m).
inline CMatrix jost_series(const TransmutationTable& table, Complex z, long n) {
    if (z == Complex{0.0, 0.0}) throw ValidationError("jost_series: z = 0 is excluded");
    if (std::abs(z) > 1.0 + kCircleTol) throw ValidationError("jost_series: |z| > 1");
    const auto& b = table.at(n);
    CMatrix acc = b.back();
    for (std::size_t m = b.size() - 1; m-- > 0;) {
        acc *= z;
        acc += b[m];
    }
    const double e = table.direction() == Direction::plus ? static_cast<double>(n) : -static_cast<double>(n);
    return std::pow(z, e) * acc;
}

/// Whole-window convenience wrapper around jost_series.
inline JostSolution jost_series_solution(const TransmutationTable& table, Complex z, const JostOptions& opts = {}) {
    const SpectralPoint p = checked_jost_point(z, opts);
    const Window w = table.window();
    MatrixSeq u(w.lo, w.hi, table.dim());
    for (long n = w.lo; n <= w.hi; ++n) u.set(n, jost_series(table, p.z, n));
    return JostSolution{table.direction(), p, std::move(u)};
}

} // namespace jacobi_scatter
