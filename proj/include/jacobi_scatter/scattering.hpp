#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jacobi_scatter/core.hpp"
#include "jacobi_scatter/jost.hpp"
#include "jacobi_scatter/potential.hpp"

namespace jacobi_scatter {

/// W(u, v)(n) = i (u(n+1)* v(n) − u(n)* v(n+1)).
inline CMatrix wronskian(const MatrixSeq& u, const MatrixSeq& v, long n) {
    if (!u.contains(n) || !u.contains(n + 1) || !v.contains(n) || !v.contains(n + 1))
        throw ValidationError("wronskian: n=" + std::to_string(n) + " and n+1 must lie in both windows");
    return kI * (u(n + 1).adjoint() * v(n) - u(n).adjoint() * v(n + 1));
}

/// max_n ‖W(u,v)(n) − W(u,v)(lo)‖ over the common window.
inline double wronskian_constancy_check(const MatrixSeq& u, const MatrixSeq& v) {
    const long lo = std::max(u.lo(), v.lo());
    const long hi = std::min(u.hi(), v.hi());
    if (hi - lo < 1) throw ValidationError("wronskian_constancy_check: windows overlap in fewer than two sites");
    const CMatrix w0 = wronskian(u, v, lo);
    double worst = 0.0;
    for (long n = lo + 1; n < hi; ++n) worst = std::max(worst, op_norm(wronskian(u, v, n) - w0));
    return worst;
}

/// ν^z = i / (z − z^{−1}).
inline Complex nu(Complex z) { return kI / (z - 1.0 / z); }

struct ScatteringOptions {
    JostOptions jost{};
    /// M_± with larger condition number is treated as singular.
    double max_condition = 1e12;
};

/// The four Jost solutions attached to a circle point z:
///   plus_z      = u_+^z,       plus_zinv  = u_+^{1/z} (plus at z̄),
///   minus_zinv  = u_-^{1/z}   (minus at z), minus_z = u_-^z (minus at z̄).
struct CircleJost {
    JostSolution plus_z;
    JostSolution plus_zinv;
    JostSolution minus_zinv;
    JostSolution minus_z;
};

inline CircleJost circle_jost(const Potential& v, Complex z, Window w, const JostOptions& opts) {
    const Complex zb = std::conj(z);
    return CircleJost{jost_volterra(v, z, Direction::plus, w, opts), jost_volterra(v, zb, Direction::plus, w, opts),
                      jost_volterra(v, z, Direction::minus, w, opts), jost_volterra(v, zb, Direction::minus, w, opts)};
}

/// Window that covers the support plus one extra site on each side, and any
/// requested extra window.
inline Window scattering_window(const Potential& v, std::optional<Window> extra = std::nullopt) {
    Window w{v.min_support() - 1, v.max_support() + 2};
    if (extra) {
        w.lo = std::min(w.lo, extra->lo);
        w.hi = std::max(w.hi, extra->hi);
    }
    return w;
}

struct ScatteringData {
    SpectralPoint point;
    CMatrix Mplus, Nplus, Mminus, Nminus;
    CMatrix Tplus, Tminus, Rplus, Rminus;
    Complex nu;
    /// det W(u_-^z, u_+^z) and det W(u_+^{1/z}, u_-^{1/z}).
    Complex detW_plus, detW_minus;
};

namespace detail {

inline ScatteringData scattering_from_jost(const CircleJost& j, long site, double max_cond) {
    ScatteringData d;
    d.point = j.plus_z.point;
    const Complex z = d.point.z;
    d.nu = nu(z);
    const CMatrix Wp = wronskian(j.minus_z.values, j.plus_z.values, site);
    const CMatrix Wm = wronskian(j.plus_zinv.values, j.minus_zinv.values, site);
    d.Mplus = d.nu * Wp;
    d.Nplus = -d.nu * wronskian(j.minus_zinv.values, j.plus_z.values, site);
    d.Mminus = -d.nu * Wm;
    d.Nminus = d.nu * wronskian(j.plus_z.values, j.minus_zinv.values, site);
    d.detW_plus = Wp.determinant();
    d.detW_minus = Wm.determinant();
    auto tp = try_inverse(d.Mplus, max_cond);
    auto tm = try_inverse(d.Mminus, max_cond);
    if (!tp || !tm) {
        std::ostringstream os;
        os << "scattering: M" << (!tp ? "+" : "-") << " is not invertible at z = " << format_complex(z)
           << " (condition number " << condition_number(!tp ? d.Mplus : d.Mminus) << ")";
        throw NumericalError(os.str());
    }
    d.Tplus = *tp;
    d.Tminus = *tm;
    d.Rplus = -d.Nplus * d.Tplus;
    d.Rminus = -d.Nminus * d.Tminus;
    return d;
}

} // namespace detail

/// M_±, N_±, T_±, R_± and ν at a circle point z ≠ ±1. Wronskians are taken at
/// n = max supp V + 1.
inline ScatteringData scattering_matrices(const Potential& v, Complex z, const ScatteringOptions& opts = {}) {
    const SpectralPoint p = checked_jost_point(z, opts.jost);
    if (!p.on_circle()) throw ValidationError("scattering_matrices: z must lie on the unit circle");
    const Window w = scattering_window(v);
    const CircleJost j = circle_jost(v, p.z, w, opts.jost);
    return detail::scattering_from_jost(j, v.max_support() + 1, opts.max_condition);
}

/// Scattering data together with the Jost solutions it was built from.
struct ScatteringSample {
    CircleJost jost;
    ScatteringData data;
};

inline ScatteringSample scattering_sample(const Potential& v, Complex z, Window extra, const ScatteringOptions& opts = {}) {
    const SpectralPoint p = checked_jost_point(z, opts.jost);
    if (!p.on_circle()) throw ValidationError("scattering_sample: z must lie on the unit circle");
    const Window w = scattering_window(v, extra);
    CircleJost j = circle_jost(v, p.z, w, opts.jost);
    ScatteringData d = detail::scattering_from_jost(j, v.max_support() + 1, opts.max_condition);
    return ScatteringSample{std::move(j), std::move(d)};
}

/// max over the window of the defining relations
///   u_+^z T_+ = u_-^z − u_-^{1/z} R_+,   u_-^{1/z} T_- = u_+^{1/z} − u_+^z R_-,
/// each normalized by 1 + ‖u‖ at the site.
inline double scattering_relation_residual(const ScatteringSample& s) {
    const auto& j = s.jost;
    const auto& d = s.data;
    const MatrixSeq& up = j.plus_z.values;
    double worst = 0.0;
    for (long n = up.lo(); n <= up.hi(); ++n) {
        const CMatrix r1 = j.plus_z(n) * d.Tplus - j.minus_z(n) + j.minus_zinv(n) * d.Rplus;
        const CMatrix r2 = j.minus_zinv(n) * d.Tminus - j.plus_zinv(n) + j.plus_z(n) * d.Rminus;
        const double scale = 1.0 + std::max(op_norm(j.minus_z(n)), op_norm(j.plus_zinv(n)));
        worst = std::max({worst, op_norm(r1) / scale, op_norm(r2) / scale});
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Genericity
// ---------------------------------------------------------------------------

struct GenericityOptions {
    double edge_exclusion = 1e-3;
    double det_threshold = 1e-8;
};

struct EdgeProbe {
    Complex z;
    double distance;  // angular distance to the nearer of ±1
    double abs_det_plus;
    double abs_det_minus;
};

struct GenericityReport {
    bool generic = true;
    double min_abs_det = std::numeric_limits<double>::infinity();
    Complex argmin{1.0, 0.0};
    std::size_t points = 0;
    /// Samples approaching ±1 at 100×, 10× and 1× the exclusion radius.
    std::vector<EdgeProbe> edge_probes;
};

/// Grid-based evidence that W(u_-^z, u_+^z) and W(u_+^{1/z}, u_-^{1/z}) stay
/// invertible on the circle outside the arcs around ±1.
inline GenericityReport is_generic(const Potential& v, std::size_t grid_size, const GenericityOptions& opts = {}) {
    if (grid_size < 4) throw ValidationError("is_generic: grid must have at least 4 points");
    GenericityReport rep;
    const Window w = scattering_window(v);
    const long site = v.max_support() + 1;
    JostOptions jo;
    jo.edge_exclusion = opts.edge_exclusion;

    auto dets = [&](Complex z) {
        const CircleJost j = circle_jost(v, z, w, jo);
        const double dp = std::abs(wronskian(j.minus_z.values, j.plus_z.values, site).determinant());
        const double dm = std::abs(wronskian(j.plus_zinv.values, j.minus_zinv.values, site).determinant());
        return std::pair{dp, dm};
    };
    auto consider = [&](Complex z, double dp, double dm) {
        ++rep.points;
        const double m = std::min(dp, dm);
        if (m < rep.min_abs_det) {
            rep.min_abs_det = m;
            rep.argmin = z;
        }
    };

    for (std::size_t i = 0; i < grid_size; ++i) {
        const double theta = -kPi + 2.0 * kPi * (static_cast<double>(i) + 0.5) / static_cast<double>(grid_size);
        const double dist = std::min(std::abs(theta), kPi - std::abs(theta));
        if (dist < opts.edge_exclusion) continue;
        const Complex z = std::polar(1.0, theta);
        const auto [dp, dm] = dets(z);
        consider(z, dp, dm);
    }
    for (double factor : {100.0, 10.0, 1.0}) {
        const double d = std::min(factor * opts.edge_exclusion * (1.0 + 1e-9), kPi / 4);
        for (double theta : {d, -d, kPi - d, -kPi + d}) {
            const Complex z = std::polar(1.0, theta);
            const auto [dp, dm] = dets(z);
            rep.edge_probes.push_back({z, d, dp, dm});
            consider(z, dp, dm);
        }
    }
    rep.generic = rep.min_abs_det > opts.det_threshold;
    return rep;
}

} // namespace jacobi_scatter
