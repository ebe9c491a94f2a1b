#pragma once

// Spectral density f_{s,r} on the circle, the spectral measure of intervals in
// (−2, 2), and the kernel of e^{−itH}P_ac by two independent routes.
//
// With z = e^{−ik}:
//   s ≥ r:  f_{s,r}(z) = ũ_+^z(s) T_+^z ũ_-^z(r)*
//   s < r:  f_{s,r}(z) = ũ_-^{1/z}(s) T_-^z ũ_+^{1/z}(r)*
//   [e^{−itH}P_ac]_{s,r} = (1/2π) ∫_{−π}^{π} e^{−2it cos k − i|s−r|k} f_{s,r}(e^{−ik}) dk.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <unsupported/Eigen/FFT>
#include <vector>

#include "jacobi_scatter/bessel.hpp"
#include "jacobi_scatter/core.hpp"
#include "jacobi_scatter/jost.hpp"
#include "jacobi_scatter/parallel.hpp"
#include "jacobi_scatter/potential.hpp"
#include "jacobi_scatter/quadrature.hpp"
#include "jacobi_scatter/scattering.hpp"

namespace jacobi_scatter {

enum class EvolutionMethod { kgrid, fourier_bessel };

inline const char* to_string(EvolutionMethod m) { return m == EvolutionMethod::kgrid ? "kgrid" : "fourier_bessel"; }

/// Offset periodic grid k_j = −π + (j + 1/2)·2π/K; never hits k = 0 or ±π.
inline double offset_grid_point(std::size_t j, std::size_t K) {
    return -kPi + (static_cast<double>(j) + 0.5) * 2.0 * kPi / static_cast<double>(K);
}

namespace detail {

// Grid sampling runs right up to the band edges; only z = ±1 itself is refused.
inline ScatteringOptions sampling_options() {
    ScatteringOptions o;
    o.jost.edge_exclusion = 0.0;
    return o;
}

inline CMatrix density_from_sample(const ScatteringSample& smp, long s, long r) {
    const auto& j = smp.jost;
    if (s >= r) return j.plus_z.tilde(s) * smp.data.Tplus * j.minus_z.tilde(r).adjoint();
    return j.minus_zinv.tilde(s) * smp.data.Tminus * j.plus_zinv.tilde(r).adjoint();
}

inline WienerSeries elementwise_adjoint(const std::vector<CMatrix>& c, Eigen::Index dim) {
    std::vector<CMatrix> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].adjoint();
    return WienerSeries(0, std::move(out), dim);
}

} // namespace detail

/// f_{s,r}(e^{−ik}) straight from Volterra Jost solutions and Wronskians.
inline CMatrix spectral_density_at(const Potential& v, long s, long r, double k) {
    const Complex z = std::polar(1.0, -k);
    const ScatteringSample smp =
        scattering_sample(v, z, Window{std::min(s, r), std::max(s, r)}, detail::sampling_options());
    return detail::density_from_sample(smp, s, r);
}

/// Scattering samples on a fixed k grid, reusable across (s, r) in a window.
class DensitySampler {
public:
    DensitySampler(const Potential& v, std::vector<double> ks, Window w) : ks_(std::move(ks)) {
        samples_.resize(ks_.size());
        parallel_for(ks_.size(), [&](std::size_t i) {
            samples_[i] = std::make_unique<ScatteringSample>(
                scattering_sample(v, std::polar(1.0, -ks_[i]), w, detail::sampling_options()));
        });
    }

    const std::vector<double>& ks() const { return ks_; }

    std::vector<CMatrix> values(long s, long r) const {
        std::vector<CMatrix> out;
        out.reserve(samples_.size());
        for (const auto& smp : samples_) out.push_back(detail::density_from_sample(*smp, s, r));
        return out;
    }

private:
    std::vector<double> ks_;
    std::vector<std::unique_ptr<ScatteringSample>> samples_;
};

struct SpectralDensity {
    long s = 0;
    long r = 0;
    /// Pointwise form: f(e^{−ik}) at each k.
    std::vector<double> ks;
    std::vector<CMatrix> values;
    /// Series form: f(z) = Σ a_m z^m.
    std::optional<WienerSeries> series;
};

inline SpectralDensity spectral_density(const Potential& v, long s, long r, const std::vector<double>& ks) {
    SpectralDensity d;
    d.s = s;
    d.r = r;
    d.ks = ks;
    const DensitySampler sampler(v, ks, Window{std::min(s, r), std::max(s, r)});
    d.values = sampler.values(s, r);
    return d;
}

// ---------------------------------------------------------------------------
// Series model
// ---------------------------------------------------------------------------

struct SpectralModelOptions {
    std::size_t fft_size = 4096;
    double tail_tol = 1e-12;
    /// Sites that series queries may touch besides the support neighbourhood.
    std::optional<Window> window;
    /// Circle grid for the genericity check; 0 skips it.
    std::size_t genericity_grid = 256;
};

/// T_±^z as Fourier series Σ a_m z^m from FFT samples, together with the
/// transmutation polynomials; produces f_{s,r} as a finite series.
class SpectralModel {
public:
    explicit SpectralModel(const Potential& v, const SpectralModelOptions& opts = {}) : v_(v), opts_(opts) {
        if (opts.fft_size < 16 || (opts.fft_size & (opts.fft_size - 1)) != 0)
            throw ValidationError("spectral model: FFT size must be a power of two ≥ 16");
        const long margin = 2;
        window_ = Window{v.min_support() - margin, v.max_support() + margin};
        if (opts.window) {
            window_.lo = std::min(window_.lo, opts.window->lo);
            window_.hi = std::max(window_.hi, opts.window->hi);
        }
        plus_ = std::make_shared<TransmutationTable>(transmutation_coeffs(v, Direction::plus, window_));
        minus_ = std::make_shared<TransmutationTable>(transmutation_coeffs(v, Direction::minus, window_));
        if (opts.genericity_grid > 0) genericity_ = is_generic(v, opts.genericity_grid);
        build_t_series();
    }

    const Potential& potential() const { return v_; }
    Window window() const { return window_; }
    Eigen::Index dim() const { return v_.dim(); }
    const WienerSeries& t_plus() const { return tplus_; }
    const WienerSeries& t_minus() const { return tminus_; }
    /// ℓ¹ mass removed when trimming the T series.
    double t_tail() const { return t_tail_; }
    const std::optional<GenericityReport>& genericity() const { return genericity_; }

    /// Largest |m| carried by the T series.
    long t_width() const {
        return std::max({std::labs(tplus_.m_min()), std::labs(tplus_.m_max()), std::labs(tminus_.m_min()),
                         std::labs(tminus_.m_max())});
    }

    /// ũ_+^z(n) coefficients; equal to I beyond the support.
    WienerSeries plus_poly(long n) const {
        if (n > window_.hi) return WienerSeries::constant(identity(dim()));
        return plus_->tilde_series(checked(n, "plus"));
    }
    /// ũ_-^{1/z}(n) coefficients; equal to I before the support.
    WienerSeries minus_poly(long n) const {
        if (n < window_.lo) return WienerSeries::constant(identity(dim()));
        return minus_->tilde_series(checked(n, "minus"));
    }

    /// Right factor shared by all s ≥ r: T_+ ũ_-^z(r)*.
    WienerSeries right_plus(long r) const {
        const auto q = minus_poly(r);
        return wiener_product(tplus_, detail::elementwise_adjoint(q.coeffs(), dim()));
    }
    /// Right factor shared by all s < r: T_- ũ_+^{1/z}(r)*.
    WienerSeries right_minus(long r) const {
        const auto q = plus_poly(r);
        return wiener_product(tminus_, detail::elementwise_adjoint(q.coeffs(), dim()));
    }

    WienerSeries density_series(long s, long r) const {
        if (s >= r) return wiener_product(plus_poly(s), right_plus(r));
        return wiener_product(minus_poly(s), right_minus(r));
    }

    /// Largest |m| of f_{s,r}'s series (a bound, without forming it).
    long density_width(long s, long r) const {
        const long ps = static_cast<long>((s >= r ? plus_poly(s) : minus_poly(s)).coeffs().size()) - 1;
        const long pr = static_cast<long>((s >= r ? minus_poly(r) : plus_poly(r)).coeffs().size()) - 1;
        return ps + pr + t_width();
    }

private:
    long checked(long n, const char* which) const {
        if (!window_.contains(n))
            throw ValidationError(std::string("spectral model: ") + which + " coefficients at n=" + std::to_string(n) +
                                  " lie outside the model window [" + std::to_string(window_.lo) + ", " +
                                  std::to_string(window_.hi) + "]");
        return n;
    }

    void build_t_series() {
        const std::size_t K = opts_.fft_size;
        const auto L = dim();
        std::vector<CMatrix> tp(K), tm(K);
        const ScatteringOptions so = detail::sampling_options();
        parallel_for(K, [&](std::size_t j) {
            const ScatteringData d = scattering_matrices(v_, std::polar(1.0, -offset_grid_point(j, K)), so);
            tp[j] = d.Tplus;
            tm[j] = d.Tminus;
        });
        tplus_ = fourier_series(tp, L);
        tminus_ = fourier_series(tm, L);
        t_tail_ = tplus_.trim(opts_.tail_tol) + tminus_.trim(opts_.tail_tol);
    }

    // a_m = (1/K) Σ_j F(z_j) e^{imk_j} for m ∈ [−K/2, K/2).
    static WienerSeries fourier_series(const std::vector<CMatrix>& samples, Eigen::Index L) {
        const std::size_t K = samples.size();
        const long half = static_cast<long>(K / 2);
        std::vector<CMatrix> coeffs(K, zeros(L));
        Eigen::FFT<double> fft;
        std::vector<Complex> in(K), out(K);
        const double k0 = offset_grid_point(0, K);
        for (Eigen::Index a = 0; a < L; ++a)
            for (Eigen::Index b = 0; b < L; ++b) {
                for (std::size_t j = 0; j < K; ++j) in[j] = samples[j](a, b);
                fft.inv(out, in);
                for (long m = -half; m < half; ++m) {
                    const std::size_t idx = static_cast<std::size_t>(m < 0 ? m + static_cast<long>(K) : m);
                    coeffs[static_cast<std::size_t>(m + half)](a, b) = out[idx] * std::polar(1.0, m * k0);
                }
            }
        return WienerSeries(-half, std::move(coeffs), L);
    }

    Potential v_;
    SpectralModelOptions opts_;
    Window window_;
    std::shared_ptr<TransmutationTable> plus_, minus_;
    WienerSeries tplus_, tminus_;
    double t_tail_ = 0.0;
    std::optional<GenericityReport> genericity_;
};

inline SpectralDensity spectral_density(const SpectralModel& model, long s, long r) {
    SpectralDensity d;
    d.s = s;
    d.r = r;
    d.series = model.density_series(s, r);
    return d;
}

/// sup over s, r ∈ [lo, hi] of wiener_norm(f_{s,r}).
inline double density_wiener_sup(const SpectralModel& model, long lo, long hi) {
    double worst = 0.0;
    for (long r = lo; r <= hi; ++r) {
        const WienerSeries rp = model.right_plus(r);
        const WienerSeries rm = model.right_minus(r);
        for (long s = lo; s <= hi; ++s) {
            const WienerSeries f = s >= r ? wiener_product(model.plus_poly(s), rp) : wiener_product(model.minus_poly(s), rm);
            worst = std::max(worst, wiener_norm(f));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Spectral measure
// ---------------------------------------------------------------------------

/// E_H([a, b])_{s,r} = (1/2π) ∫_{k_b}^{k_a} (z^d f_{s,r}(z) + z^{−d} f_{s,r}(1/z)) dk,
/// z = e^{−ik}, E = 2 cos k, d = |s − r|.
inline QuadratureResult spectral_measure_detailed(const Potential& v, double a, double b, long s, long r,
                                                  const QuadratureOptions& qopts = {}) {
    if (!(a > -2.0 && b < 2.0 && a < b)) throw ValidationError("spectral_measure: need −2 < a < b < 2");
    const double ka = std::acos(a / 2.0);
    const double kb = std::acos(b / 2.0);
    const double d = static_cast<double>(std::labs(s - r));
    const Window w{std::min(s, r), std::max(s, r)};
    const ScatteringOptions so = detail::sampling_options();
    auto integrand = [&](double k) -> CMatrix {
        const Complex z = std::polar(1.0, -k);
        const auto s1 = scattering_sample(v, z, w, so);
        const auto s2 = scattering_sample(v, std::conj(z), w, so);
        return (std::pow(z, d) * detail::density_from_sample(s1, s, r) +
                std::pow(z, -d) * detail::density_from_sample(s2, s, r)) /
               (2.0 * kPi);
    };
    return integrate_gk15(integrand, kb, ka, qopts);
}

inline CMatrix spectral_measure(const Potential& v, double a, double b, long s, long r,
                                const QuadratureOptions& qopts = {}) {
    return spectral_measure_detailed(v, a, b, s, r, qopts).value;
}

// ---------------------------------------------------------------------------
// Evolution kernel
// ---------------------------------------------------------------------------

/// Σ_m a_m (−i)^{m+d} J_{m+d}(2t).
inline CMatrix bessel_contract(const WienerSeries& f, long d, const BesselTable& J) {
    static constexpr Complex kMinusIPow[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    std::vector<CMatrix> terms;
    terms.reserve(f.coeffs().size());
    for (long m = f.m_min(); m <= f.m_max(); ++m) {
        const long order = m + d;
        const double j = J(order);
        if (j == 0.0) continue;
        const Complex ph = kMinusIPow[((order % 4) + 4) % 4];
        terms.push_back((ph * j) * f.coeffs()[static_cast<std::size_t>(m - f.m_min())]);
    }
    return pairwise_sum(terms, f.dim());
}

inline BesselTable bessel_for(double t, long max_order) { return BesselTable(2.0 * t, max_order + 8); }

inline long kgrid_size(double t, long bandwidth) {
    return static_cast<long>(std::ceil(64.0 + 16.0 * t)) + 2 * bandwidth;
}

/// Trapezoid on the offset grid with pointwise densities.
inline CMatrix evolution_kernel_kgrid(const Potential& v, double t, long s, long r, long bandwidth) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("evolution_kernel: t must be finite and ≥ 0");
    const long d = std::labs(s - r);
    const auto K = static_cast<std::size_t>(kgrid_size(t, bandwidth + d));
    std::vector<double> ks(K);
    for (std::size_t j = 0; j < K; ++j) ks[j] = offset_grid_point(j, K);
    const DensitySampler sampler(v, ks, Window{std::min(s, r), std::max(s, r)});
    const auto f = sampler.values(s, r);
    std::vector<CMatrix> terms(K);
    for (std::size_t j = 0; j < K; ++j)
        terms[j] = std::polar(1.0, -2.0 * t * std::cos(ks[j]) - static_cast<double>(d) * ks[j]) * f[j];
    return pairwise_sum(terms, v.dim()) / static_cast<double>(K);
}

inline CMatrix evolution_kernel_bessel(const SpectralModel& model, double t, long s, long r) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("evolution_kernel: t must be finite and ≥ 0");
    const long d = std::labs(s - r);
    const WienerSeries f = model.density_series(s, r);
    const long top = std::max(std::labs(f.m_min() + d), std::labs(f.m_max() + d));
    return bessel_contract(f, d, bessel_for(t, top));
}

inline CMatrix evolution_kernel(const SpectralModel& model, double t, long s, long r, EvolutionMethod method) {
    if (method == EvolutionMethod::fourier_bessel) return evolution_kernel_bessel(model, t, s, r);
    return evolution_kernel_kgrid(model.potential(), t, s, r, model.density_width(s, r));
}

inline SpectralModelOptions model_options_for(long s, long r) {
    SpectralModelOptions o;
    o.window = Window{std::min(s, r), std::max(s, r)};
    return o;
}

inline CMatrix evolution_kernel(const Potential& v, double t, long s, long r, EvolutionMethod method) {
    const SpectralModel model(v, model_options_for(s, r));
    return evolution_kernel(model, t, s, r, method);
}

struct EvolutionComparison {
    CMatrix kgrid;
    CMatrix fourier_bessel;
    double relative_difference;
};

/// Both routes; CrossCheckError when they differ by more than tol relative
/// to max(1, ‖kernel‖).
inline EvolutionComparison evolution_kernel_both(const SpectralModel& model, double t, long s, long r,
                                                 double tol = 1e-8) {
    EvolutionComparison c;
    c.kgrid = evolution_kernel(model, t, s, r, EvolutionMethod::kgrid);
    c.fourier_bessel = evolution_kernel(model, t, s, r, EvolutionMethod::fourier_bessel);
    c.relative_difference =
        op_norm(c.kgrid - c.fourier_bessel) / std::max(1.0, op_norm(c.fourier_bessel));
    if (c.relative_difference > tol) {
        std::ostringstream os;
        os << "evolution_kernel: kgrid and fourier_bessel differ by " << c.relative_difference << " (tolerance " << tol
           << ") at t=" << t << ", s=" << s << ", r=" << r;
        throw CrossCheckError(os.str());
    }
    return c;
}

// ---------------------------------------------------------------------------
// Dispersive decay
// ---------------------------------------------------------------------------

struct DecayFit {
    std::vector<double> times;
    std::vector<double> sup_norms;
    std::vector<long> argmax_s;
    std::vector<long> argmax_r;
    double slope = std::numeric_limits<double>::quiet_NaN();
    double c_fit = 0.0;
};

struct DecayOptions {
    /// Source sites r; default is the support with two sites of margin.
    std::vector<long> sources;
    /// Only the ray offsets s − r with |s − r| ≤ ray_factor·t are scanned.
    double ray_factor = 2.5;
};

inline std::vector<long> default_decay_sources(const Potential& v) {
    std::vector<long> out;
    for (long r = v.min_support() - 2; r <= v.max_support() + 2; ++r) out.push_back(r);
    return out;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

/// Geometric grid of `samples` times in [tmin, tmax].
inline std::vector<double> geometric_times(double tmin, double tmax, std::size_t samples) {
    if (!(tmin > 0.0 && tmax >= tmin) || samples < 1) throw ValidationError("time grid: need 0 < tmin ≤ tmax");
    std::vector<double> t(samples);
    for (std::size_t i = 0; i < samples; ++i)
        t[i] = samples == 1 ? tmin : tmin * std::pow(tmax / tmin, static_cast<double>(i) / (samples - 1));
    return t;
}

/// sup over r in the source set and s − r ∈ [−⌈2.5t⌉, ⌈2.5t⌉] ∩ [−window, window]
/// of ‖[e^{−itH}P_ac]_{s,r}‖, by the Bessel route. The slope is fitted over
/// the last decade of times; c_fit = max_t sup·(1+t)^{1/3}.
inline DecayFit dispersive_decay_fit(const SpectralModel& model, const std::vector<double>& times, long window,
                                     const DecayOptions& opts = {}) {
    if (times.empty()) throw ValidationError("dispersive_decay_fit: empty time grid");
    for (std::size_t i = 0; i < times.size(); ++i)
        if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1])))
            throw ValidationError("dispersive_decay_fit: times must be positive and increasing");
    if (window < 0) throw ValidationError("dispersive_decay_fit: window must be non-negative");
    const auto& v = model.potential();
    const std::vector<long> sources = opts.sources.empty() ? default_decay_sources(v) : opts.sources;

    // Per-source right factors; left polynomials are I away from the support.
    struct Source {
        long r;
        WienerSeries rp, rm;
    };
    std::vector<Source> src;
    long width = 0;
    for (long r : sources) {
        Source s{r, model.right_plus(r), model.right_minus(r)};
        width = std::max({width, std::labs(s.rp.m_min()), std::labs(s.rp.m_max()), std::labs(s.rm.m_min()),
                          std::labs(s.rm.m_max())});
        src.push_back(std::move(s));
    }
    const Window mw = model.window();
    long poly = 0;
    for (long n = mw.lo; n <= mw.hi; ++n)
        poly = std::max({poly, static_cast<long>(model.plus_poly(n).coeffs().size()),
                         static_cast<long>(model.minus_poly(n).coeffs().size())});

    DecayFit fit;
    fit.times = times;
    fit.sup_norms.assign(times.size(), 0.0);
    fit.argmax_s.assign(times.size(), 0);
    fit.argmax_r.assign(times.size(), 0);
    parallel_for(times.size(), [&](std::size_t ti) {
        const double t = times[ti];
        const long reach = std::min(window, static_cast<long>(std::ceil(opts.ray_factor * t)));
        const BesselTable J = bessel_for(t, reach + width + poly);
        double best = -1.0;
        long bs = 0, br = 0;
        for (const auto& so : src) {
            const long r = so.r;
            for (long d = -reach; d <= reach; ++d) {
                const long s = r + d;
                WienerSeries f;
                if (s >= r) {
                    f = s > mw.hi ? so.rp : wiener_product(model.plus_poly(s), so.rp);
                } else {
                    f = s < mw.lo ? so.rm : wiener_product(model.minus_poly(s), so.rm);
                }
                const double n = op_norm(bessel_contract(f, std::labs(d), J));
                if (n > best) {
                    best = n;
                    bs = s;
                    br = r;
                }
            }
        }
        fit.sup_norms[ti] = best;
        fit.argmax_s[ti] = bs;
        fit.argmax_r[ti] = br;
    });

    const double tmax = times.back();
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < times.size(); ++i) {
        fit.c_fit = std::max(fit.c_fit, fit.sup_norms[i] * std::cbrt(1.0 + times[i]));
        if (times[i] >= tmax / 10.0 * (1.0 - 1e-12) && fit.sup_norms[i] > 0.0) {
            xs.push_back(times[i]);
            ys.push_back(fit.sup_norms[i]);
        }
    }
    fit.slope = loglog_slope(xs, ys);
    return fit;
}

} // namespace jacobi_scatter
