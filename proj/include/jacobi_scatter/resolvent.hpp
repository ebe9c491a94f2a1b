#pragma once

// Green functions [R_H(E)]_{s,r} from Jost solutions and inverse Wronskians,
// their boundary values on (−2, 2), weighted resolvent norms and Hölder
// diagnostics for the limiting absorption principle.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "jacobi_scatter/core.hpp"
#include "jacobi_scatter/jost.hpp"
#include "jacobi_scatter/oracle.hpp"
#include "jacobi_scatter/potential.hpp"
#include "jacobi_scatter/scattering.hpp"

namespace jacobi_scatter {

enum class Side { plus, minus };

inline const char* to_string(Side s) { return s == Side::plus ? "plus" : "minus"; }

struct ResolventOptions {
    JostOptions jost{};
    double max_condition = 1e12;
    /// Real energies outside [−2, 2] closer than this to an eigenvalue of the
    /// truncated operator are rejected.
    double eigen_margin = 1e-6;
    long prescreen_N = 200;
    bool prescreen = true;
};

/// Spectral parameter for an energy: r(E) off [−2, 2], r_±(E) inside.
inline SpectralPoint resolvent_point(Complex E, Side side) {
    return inverse_zhukovsky(E, side == Side::plus ? Branch::plus : Branch::minus);
}

/// Kernel at a spectral parameter ζ in the closed disk (ζ ≠ 0, ±1):
///   s ≥ r:  −i u_+^ζ(s) W(u_-^{1/ζ̄}, u_+^ζ)^{-1} u_-^{1/ζ̄}(r)*
///   s < r:   i u_-^{1/ζ}(s) W(u_+^{ζ̄}, u_-^{1/ζ})^{-1} u_+^{ζ̄}(r)*
/// For |ζ| < 1 this is the resolvent at E = J(ζ); for |ζ| = 1 it is the
/// boundary value from the side that ζ = r_±(E) selects.
class ResolventKernel {
public:
    ResolventKernel(const Potential& v, Complex zeta, Window w, const ResolventOptions& opts = {})
        : dim_(v.dim()) {
        point_ = checked_jost_point(zeta, opts.jost);
        window_ = Window{std::min(w.lo, v.min_support() - 1), std::max(w.hi, v.max_support() + 2)};
        const Complex z = point_.z;
        const Complex zb = std::conj(z);
        a_ = jost_volterra(v, z, Direction::plus, window_, opts.jost).values;    // u_+^ζ
        b_ = jost_volterra(v, zb, Direction::minus, window_, opts.jost).values;  // u_-^{1/ζ̄}
        c_ = jost_volterra(v, z, Direction::minus, window_, opts.jost).values;   // u_-^{1/ζ}
        d_ = jost_volterra(v, zb, Direction::plus, window_, opts.jost).values;   // u_+^{ζ̄}
        const long site = v.max_support() + 1;
        const CMatrix w1 = wronskian(b_, a_, site);
        const CMatrix w2 = wronskian(d_, c_, site);
        auto i1 = try_inverse(w1, opts.max_condition);
        auto i2 = try_inverse(w2, opts.max_condition);
        if (!i1 || !i2 || cancels(w1, b_, a_, site, opts.max_condition) ||
            cancels(w2, d_, c_, site, opts.max_condition)) {
            std::ostringstream os;
            os << "resolvent: Wronskian is singular at z = " << format_complex(z) << ", E = " << format_complex(point_.E)
               << " (eigenvalue or resonance proximity)";
            throw NumericalError(os.str());
        }
        w1inv_ = std::move(*i1);
        w2inv_ = std::move(*i2);
    }

    const SpectralPoint& point() const { return point_; }
    Window window() const { return window_; }
    Eigen::Index dim() const { return dim_; }

    CMatrix operator()(long s, long r) const {
        if (!window_.contains(s) || !window_.contains(r))
            throw ValidationError("resolvent kernel: (s, r) = (" + std::to_string(s) + ", " + std::to_string(r) +
                                  ") outside the precomputed window");
        if (s >= r) return -kI * a_(s) * w1inv_ * b_(r).adjoint();
        return kI * c_(s) * w2inv_ * d_(r).adjoint();
    }

private:
    // W(u, v) nearly zero relative to the products it is formed from; catches
    // singular scalar Wronskians, whose condition number is always 1.
    static bool cancels(const CMatrix& w, const MatrixSeq& u, const MatrixSeq& v, long n, double max_condition) {
        const double scale = op_norm(u(n + 1)) * op_norm(v(n)) + op_norm(u(n)) * op_norm(v(n + 1));
        const Eigen::JacobiSVD<CMatrix> svd(w);
        return svd.singularValues()(svd.singularValues().size() - 1) * max_condition < scale;
    }

    Eigen::Index dim_;
    SpectralPoint point_;
    Window window_;
    MatrixSeq a_, b_, c_, d_;
    CMatrix w1inv_, w2inv_;
};

/// Rejects real energies outside the band that sit on the truncated operator's
/// point spectrum.
inline void prescreen_energy(const Potential& v, Complex E, const ResolventOptions& opts) {
    if (!opts.prescreen || E.imag() != 0.0 || std::abs(E.real()) <= 2.0) return;
    for (const auto& ev : oracle_point_spectrum(v, opts.prescreen_N))
        if (std::abs(ev.value - E.real()) < opts.eigen_margin) {
            std::ostringstream os;
            os << "green_kernel: E = " << E.real() << " is within " << opts.eigen_margin << " of the eigenvalue "
               << ev.value;
            throw NumericalError(os.str());
        }
}

/// [R_H(E)]_{s,r} for E off [−2, 2].
inline CMatrix green_kernel(const Potential& v, Complex E, long s, long r, const ResolventOptions& opts = {}) {
    if (E.imag() == 0.0 && std::abs(E.real()) <= 2.0)
        throw ValidationError("green_kernel: E = " + format_complex(E) + " lies on [−2, 2]; use green_boundary");
    const SpectralPoint p = inverse_zhukovsky(E);
    prescreen_energy(v, E, opts);
    const ResolventKernel k(v, p.z, Window{std::min(s, r), std::max(s, r)}, opts);
    return k(s, r);
}

/// Boundary values [R_H(E ± i0)]_{s,r}, E ∈ (−2, 2), through the scattering
/// representation. With w = r_±(E):
///   s ≥ r:  w^{s−r}/(w − 1/w) ũ_+^w(s) T_+^w ũ_-^w(r)*
///   s < r:  w^{r−s}/(w − 1/w) ũ_-^{1/w}(s) T_-^w ũ_+^{1/w}(r)*
class BoundaryKernel {
public:
    BoundaryKernel(const Potential& v, double E, Side side, Window w, const ResolventOptions& opts = {}) {
        if (!(std::abs(E) < 2.0)) throw ValidationError("green_boundary: E must lie in (−2, 2)");
        point_ = resolvent_point(Complex{E, 0.0}, side);
        ScatteringOptions so;
        so.jost = opts.jost;
        so.max_condition = opts.max_condition;
        sample_ = std::make_unique<ScatteringSample>(scattering_sample(v, point_.z, w, so));
    }

    const SpectralPoint& point() const { return point_; }
    const ScatteringData& scattering() const { return sample_->data; }

    CMatrix operator()(long s, long r) const {
        const Complex w = point_.z;
        const auto& j = sample_->jost;
        const auto& d = sample_->data;
        const Complex denom = w - 1.0 / w;
        if (s >= r) {
            const Complex ph = std::pow(w, static_cast<double>(s - r)) / denom;
            return ph * j.plus_z.tilde(s) * d.Tplus * j.minus_z.tilde(r).adjoint();
        }
        const Complex ph = std::pow(w, static_cast<double>(r - s)) / denom;
        return ph * j.minus_zinv.tilde(s) * d.Tminus * j.plus_zinv.tilde(r).adjoint();
    }

private:
    SpectralPoint point_;
    std::unique_ptr<ScatteringSample> sample_;
};

inline CMatrix green_boundary(const Potential& v, double E, Side side, long s, long r,
                              const ResolventOptions& opts = {}) {
    const BoundaryKernel k(v, E, side, Window{std::min(s, r), std::max(s, r)}, opts);
    return k(s, r);
}

/// max over the window interior of
///   ‖R_{s+1,r} + R_{s−1,r} + (V(s) − E)R_{s,r} − δ_{s,r} I‖.
template <class Kernel>
double green_difference_residual(const Potential& v, Complex E, const Kernel& k, Window w) {
    double worst = 0.0;
    const auto L = v.dim();
    for (long r = w.lo; r <= w.hi; ++r)
        for (long s = w.lo + 1; s < w.hi; ++s) {
            CMatrix res = k(s + 1, r) + k(s - 1, r) + (v(s) - E * identity(L)) * k(s, r);
            if (s == r) res -= identity(L);
            worst = std::max(worst, op_norm(res));
        }
    return worst;
}

// ---------------------------------------------------------------------------
// Weighted resolvent norms
// ---------------------------------------------------------------------------

/// Σ_{r∈ℤ} (1 + |r|)^{−2α} = 2ζ(2α) − 1.
inline double weight_constant(double alpha) {
    if (!(alpha > 0.5)) throw ValidationError("weight_constant: alpha must exceed 1/2");
    return 2.0 * std::riemann_zeta(2.0 * alpha) - 1.0;
}

/// Σ_{|r|>N} (1 + |r|)^{−2α}.
inline double weight_tail(double alpha, long N) {
    double head = 0.0;
    for (long r = -N; r <= N; ++r) head += std::pow(1.0 + static_cast<double>(std::abs(r)), -2.0 * alpha);
    return std::max(0.0, weight_constant(alpha) - head);
}

/// Dense matrix [(1+|s|)^{−α} R_{s,r} (1+|r|)^{−α}] over s, r ∈ [−N, N].
template <class Kernel>
CMatrix weighted_kernel_matrix(const Kernel& k, Eigen::Index L, double alpha, long N) {
    const Eigen::Index size = (2 * N + 1) * L;
    CMatrix m(size, size);
    for (long s = -N; s <= N; ++s) {
        const double ws = std::pow(1.0 + static_cast<double>(std::abs(s)), -alpha);
        for (long r = -N; r <= N; ++r) {
            const double wr = std::pow(1.0 + static_cast<double>(std::abs(r)), -alpha);
            m.block((s + N) * L, (r + N) * L, L, L) = (ws * wr) * k(s, r);
        }
    }
    return m;
}

inline double largest_singular_value(const CMatrix& m) {
    Eigen::BDCSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

struct WeightedNormReport {
    double norm;            // ‖T_{−α} R T_{−α}‖ on the window
    double sup_kernel;      // max ‖R_{s,r}‖ on the window
    double bound;           // C(α)·sup_kernel
    double tail_weight;     // Σ_{|r|>N} (1+|r|)^{−2α}
};

inline ResolventKernel kernel_for_energy(const Potential& v, Complex E, Side side, long N,
                                         const ResolventOptions& opts) {
    const SpectralPoint p = resolvent_point(E, side);
    if (!p.on_circle()) prescreen_energy(v, E, opts);
    return ResolventKernel(v, p.z, Window{-N - 1, N + 1}, opts);
}

inline WeightedNormReport weighted_resolvent_norm(const Potential& v, Complex E, Side side, double alpha, long N,
                                                  const ResolventOptions& opts = {}) {
    if (!(alpha > 0.5)) throw ValidationError("weighted_resolvent_norm: alpha must exceed 1/2");
    if (N < 0) throw ValidationError("weighted_resolvent_norm: window must be non-negative");
    const ResolventKernel k = kernel_for_energy(v, E, side, N, opts);
    double sup = 0.0;
    for (long s = -N; s <= N; ++s)
        for (long r = -N; r <= N; ++r) sup = std::max(sup, op_norm(k(s, r)));
    const double norm = largest_singular_value(weighted_kernel_matrix(k, v.dim(), alpha, N));
    return {norm, sup, weight_constant(alpha) * sup, weight_tail(alpha, N)};
}

// ---------------------------------------------------------------------------
// Hölder diagnostic
// ---------------------------------------------------------------------------

struct HolderPair {
    Complex E;
    Complex E0;
    double difference;   // ‖T_{−α}(R(E) − R(E0))T_{−α}‖
    double separation;   // |r_±(E) − r_±(E0)|
    double scaled_sep;   // separation^{min(ρ,1)}
    double ratio;
};

struct HolderReport {
    double alpha;
    double rho;
    std::vector<HolderPair> pairs;
    double max_ratio = 0.0;
    double fitted_exponent = std::numeric_limits<double>::quiet_NaN();
};

struct HolderGrid {
    Side side = Side::plus;
    std::vector<std::pair<Complex, Complex>> pairs;  // (E, E0)
};

/// Base points spread evenly over [a, b] (count `bases`) and offsets h_j
/// geometric in [h_min, h_max] (count `offsets`); pairs (E0 + h_j, E0).
/// Doubling `bases − 1` and `offsets − 1` gives a nested refinement.
inline HolderGrid ladder_grid(double a, double b, int bases, int offsets, double h_min = 1e-4, double h_max = 1e-1,
                              Side side = Side::plus) {
    if (bases < 1 || offsets < 1) throw ValidationError("ladder_grid: counts must be positive");
    HolderGrid g;
    g.side = side;
    for (int i = 0; i < bases; ++i) {
        const double e0 = bases == 1 ? 0.5 * (a + b) : a + (b - a) * i / (bases - 1);
        for (int j = 0; j < offsets; ++j) {
            const double t = offsets == 1 ? 1.0 : static_cast<double>(j) / (offsets - 1);
            const double h = h_min * std::pow(h_max / h_min, t);
            g.pairs.emplace_back(Complex{e0 + h, 0.0}, Complex{e0, 0.0});
        }
    }
    return g;
}

struct HolderOptions {
    ResolventOptions resolvent{};
    double sep_min = 1e-4;
    double sep_max = 1e-1;
};

/// ratio = ‖T_{−α}(R^±(E) − R^±(E0))T_{−α}‖ / |r_±(E) − r_±(E0)|^{min(ρ,1)};
/// the exponent is the slope of log(difference) against log(separation)
/// after removing per-E0 means.
inline HolderReport holder_diagnostic(const Potential& v, const HolderGrid& grid, double alpha, double rho, long N,
                                      const HolderOptions& opts = {}) {
    if (!(rho >= 0.0)) throw ValidationError("holder_diagnostic: rho must be non-negative");
    if (!(alpha > rho + 0.5)) throw ValidationError("holder_diagnostic: need alpha > rho + 1/2");
    HolderReport rep;
    rep.alpha = alpha;
    rep.rho = rho;
    const double expo = std::min(rho, 1.0);

    std::deque<std::pair<Complex, CMatrix>> cache;  // stable references
    auto weighted = [&](Complex E) -> const CMatrix& {
        for (const auto& [e, m] : cache)
            if (e == E) return m;
        const ResolventKernel k = kernel_for_energy(v, E, grid.side, N, opts.resolvent);
        cache.emplace_back(E, weighted_kernel_matrix(k, v.dim(), alpha, N));
        return cache.back().second;
    };

    // Group by base energy for the regression.
    std::vector<Complex> groups;
    std::vector<std::size_t> group_of;
    for (const auto& [E, E0] : grid.pairs) {
        const double sep = std::abs(resolvent_point(E, grid.side).z - resolvent_point(E0, grid.side).z);
        HolderPair p{E, E0, 0.0, sep, std::pow(sep, expo), 0.0};
        if (E == E0) {
            rep.pairs.push_back(p);
            continue;
        }
        const CMatrix diff = weighted(E) - weighted(E0);
        p.difference = largest_singular_value(diff);
        p.ratio = p.difference / p.scaled_sep;
        rep.max_ratio = std::max(rep.max_ratio, p.ratio);
        rep.pairs.push_back(p);
        if (sep >= opts.sep_min * (1 - 1e-9) && sep <= opts.sep_max * (1 + 1e-9) && p.difference > 0.0) {
            auto it = std::find(groups.begin(), groups.end(), E0);
            if (it == groups.end()) {
                groups.push_back(E0);
                it = groups.end() - 1;
            }
            group_of.push_back(static_cast<std::size_t>(it - groups.begin()));
        } else {
            group_of.push_back(std::numeric_limits<std::size_t>::max());
        }
    }

    // Within-group least squares.
    std::vector<double> mx(groups.size(), 0.0), my(groups.size(), 0.0);
    std::vector<int> cnt(groups.size(), 0);
    std::size_t gi = 0;
    std::vector<std::pair<std::size_t, std::size_t>> used;  // (pair index, group)
    for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
        if (rep.pairs[i].E == rep.pairs[i].E0) continue;
        const std::size_t g = group_of[gi++];
        if (g == std::numeric_limits<std::size_t>::max()) continue;
        used.emplace_back(i, g);
        mx[g] += std::log(rep.pairs[i].separation);
        my[g] += std::log(rep.pairs[i].difference);
        ++cnt[g];
    }
    double sxx = 0.0, sxy = 0.0;
    for (auto [i, g] : used) {
        const double x = std::log(rep.pairs[i].separation) - mx[g] / cnt[g];
        const double y = std::log(rep.pairs[i].difference) - my[g] / cnt[g];
        sxx += x * x;
        sxy += x * y;
    }
    if (sxx > 0.0) rep.fitted_exponent = sxy / sxx;
    return rep;
}

} // namespace jacobi_scatter
