#pragma once

// Complex L×L matrix helpers, matrix sequences on a window of ℤ, the
// Zhukovsky parametrization E = z + 1/z and finite Wiener-algebra series.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "jacobi_scatter/error.hpp"

namespace jacobi_scatter {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = std::numbers::pi;

inline std::string format_complex(Complex z) {
    std::ostringstream os;
    os.precision(10);
    os << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
    return os.str();
}

inline CMatrix identity(Eigen::Index dim) { return CMatrix::Identity(dim, dim); }
inline CMatrix zeros(Eigen::Index dim) { return CMatrix::Zero(dim, dim); }

/// Operator (spectral) norm: the largest singular value.
inline double op_norm(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    if (a.rows() == 1 && a.cols() == 1) return std::abs(a(0, 0));
    Eigen::JacobiSVD<CMatrix> svd(a);
    return svd.singularValues()(0);
}

inline double hermitian_defect(const CMatrix& a) { return op_norm(a - a.adjoint()); }

/// Total check, never throws: non-square or non-finite input is simply not Hermitian.
inline bool is_hermitian(const CMatrix& a, double rel_tol = 1e-12) {
    if (a.rows() != a.cols() || !a.allFinite()) return false;
    return hermitian_defect(a) <= rel_tol * (1.0 + op_norm(a));
}

/// Ratio of extreme singular values; +inf for exactly singular matrices.
inline double condition_number(const CMatrix& a) {
    Eigen::JacobiSVD<CMatrix> svd(a);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

/// Inverse when the condition number stays below `max_cond`, nullopt otherwise.
inline std::optional<CMatrix> try_inverse(const CMatrix& a, double max_cond = 1e12) {
    if (a.rows() != a.cols() || !a.allFinite()) return std::nullopt;
    if (!(condition_number(a) <= max_cond)) return std::nullopt;
    return a.partialPivLu().inverse();
}

/// Pairwise (tree) summation; the result does not depend on how callers
/// split work across threads.
template <class T>
T pairwise_sum(std::span<const T> terms, const T& zero) {
    if (terms.empty()) return zero;
    if (terms.size() == 1) return terms[0];
    if (terms.size() <= 8) {
        T acc = terms[0];
        for (std::size_t i = 1; i < terms.size(); ++i) acc = acc + terms[i];
        return acc;
    }
    const std::size_t half = terms.size() / 2;
    return pairwise_sum<T>(terms.first(half), zero) + pairwise_sum<T>(terms.subspan(half), zero);
}

inline CMatrix pairwise_sum(const std::vector<CMatrix>& terms, Eigen::Index dim) {
    // Materialize through a recursive helper to avoid Eigen expression templates
    // leaking out of the generic version.
    struct Rec {
        static CMatrix run(const std::vector<CMatrix>& t, std::size_t lo, std::size_t hi, Eigen::Index d) {
            if (hi == lo) return zeros(d);
            if (hi - lo <= 8) {
                CMatrix acc = t[lo];
                for (std::size_t i = lo + 1; i < hi; ++i) acc += t[i];
                return acc;
            }
            const std::size_t mid = lo + (hi - lo) / 2;
            CMatrix a = run(t, lo, mid, d);
            a += run(t, mid, hi, d);
            return a;
        }
    };
    return Rec::run(terms, 0, terms.size(), dim);
}

/// A matrix-valued sequence n ↦ u(n) on the inclusive window [lo, hi].
class MatrixSeq {
public:
    MatrixSeq() = default;

    MatrixSeq(long lo, long hi, Eigen::Index dim) : lo_(lo), hi_(hi), dim_(dim) {
        if (hi < lo) throw ValidationError("MatrixSeq: empty window");
        if (dim < 1) throw ValidationError("MatrixSeq: dimension must be positive");
        values_.assign(static_cast<std::size_t>(hi - lo + 1), zeros(dim));
    }

    long lo() const { return lo_; }
    long hi() const { return hi_; }
    Eigen::Index dim() const { return dim_; }
    std::size_t size() const { return values_.size(); }
    bool contains(long n) const { return n >= lo_ && n <= hi_; }

    const CMatrix& operator()(long n) const { return values_[index(n)]; }
    CMatrix& operator()(long n) { return values_[index(n)]; }

    void set(long n, CMatrix value) {
        if (value.rows() != dim_ || value.cols() != dim_)
            throw ValidationError("MatrixSeq: value dimension mismatch");
        values_[index(n)] = std::move(value);
    }

    const std::vector<CMatrix>& values() const { return values_; }

private:
    std::size_t index(long n) const {
        if (!contains(n))
            throw ValidationError("MatrixSeq: index " + std::to_string(n) + " outside window [" +
                                  std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
        return static_cast<std::size_t>(n - lo_);
    }

    long lo_ = 0;
    long hi_ = -1;
    Eigen::Index dim_ = 1;
    std::vector<CMatrix> values_;
};

// ---------------------------------------------------------------------------
// Zhukovsky map and its inverse branches
// ---------------------------------------------------------------------------

enum class Branch { plus, minus, interior };

inline const char* to_string(Branch b) {
    switch (b) {
        case Branch::plus: return "plus";
        case Branch::minus: return "minus";
        case Branch::interior: return "interior";
    }
    return "?";
}

/// Points with ||z| - 1| below this are treated as lying on the unit circle.
inline constexpr double kCircleTol = 1e-12;
/// Distance to ±2 below which an energy counts as a branch point.
inline constexpr double kBranchPointGuard = 1e-9;

inline Complex zhukovsky(Complex z) {
    if (z == Complex{0.0, 0.0}) throw ValidationError("zhukovsky: z = 0 is outside the domain");
    return z + 1.0 / z;
}

/// A spectral parameter z in the closed unit disk together with E = J(z).
/// On the circle the branch records which of r_± produced z; e^{-ik} with
/// k ∈ (0, π) belongs to r_+, e^{ik} to r_-.
struct SpectralPoint {
    Complex z;
    Complex E;
    Branch branch = Branch::interior;

    bool on_circle() const { return branch != Branch::interior; }

    static SpectralPoint from_z(Complex z) {
        if (z == Complex{0.0, 0.0}) throw ValidationError("spectral point: z = 0 is excluded");
        const double mod = std::abs(z);
        if (mod > 1.0 + kCircleTol)
            throw ValidationError("spectral point: |z| > 1 for z = " + format_complex(z));
        SpectralPoint p;
        if (std::abs(mod - 1.0) <= kCircleTol) {
            p.z = z / mod;
            p.E = Complex{2.0 * p.z.real(), 0.0};
            p.branch = p.z.imag() <= 0.0 ? Branch::plus : Branch::minus;
        } else {
            p.z = z;
            p.E = zhukovsky(z);
            p.branch = Branch::interior;
        }
        return p;
    }
};

/// Root of z² − Ez + 1 = 0 selected by the branch rules: inside the disk for
/// E ∉ [−2, 2]; on the circle for real E ∈ (−2, 2), e^{−ik} (plus) or e^{ik} (minus).
inline SpectralPoint inverse_zhukovsky(Complex E, Branch branch = Branch::plus) {
    if (std::abs(E - 2.0) < kBranchPointGuard || std::abs(E + 2.0) < kBranchPointGuard)
        throw ValidationError("inverse_zhukovsky: E = " + format_complex(E) +
                              " is a branch point (±2)");
    if (!std::isfinite(E.real()) || !std::isfinite(E.imag()))
        throw ValidationError("inverse_zhukovsky: non-finite energy");

    SpectralPoint p;
    p.E = E;
    if (E.imag() == 0.0 && std::abs(E.real()) < 2.0) {
        if (branch == Branch::interior)
            throw ValidationError("inverse_zhukovsky: E in (-2, 2) needs the plus or minus branch");
        const double k = std::acos(E.real() / 2.0);
        p.z = branch == Branch::plus ? std::polar(1.0, -k) : std::polar(1.0, k);
        p.branch = branch;
        return p;
    }
    // Larger-magnitude root first, companion root from the product z₁z₂ = 1.
    const Complex disc = std::sqrt(E * E - 4.0);
    const Complex q1 = 0.5 * (E + disc);
    const Complex q2 = 0.5 * (E - disc);
    const Complex big = std::abs(q1) >= std::abs(q2) ? q1 : q2;
    p.z = 1.0 / big;
    p.branch = Branch::interior;
    return p;
}

// ---------------------------------------------------------------------------
// Wiener-algebra series
// ---------------------------------------------------------------------------

/// Finite Fourier series f(k) = Σ_{m=m_min}^{m_max} a_m e^{imk} with L×L
/// matrix coefficients. Equivalently a Laurent polynomial Σ a_m z^m.
class WienerSeries {
public:
    WienerSeries() = default;

    WienerSeries(long m_min, std::vector<CMatrix> coeffs, Eigen::Index dim)
        : m_min_(m_min), dim_(dim), coeffs_(std::move(coeffs)) {
        if (dim < 1) throw ValidationError("WienerSeries: dimension must be positive");
        if (coeffs_.empty()) coeffs_.push_back(zeros(dim));
        for (const auto& c : coeffs_)
            if (c.rows() != dim || c.cols() != dim)
                throw ValidationError("WienerSeries: coefficient dimension mismatch");
    }

    static WienerSeries constant(const CMatrix& a0) { return WienerSeries(0, {a0}, a0.rows()); }

    long m_min() const { return m_min_; }
    long m_max() const { return m_min_ + static_cast<long>(coeffs_.size()) - 1; }
    Eigen::Index dim() const { return dim_; }
    const std::vector<CMatrix>& coeffs() const { return coeffs_; }

    /// a_m, zero outside the stored window.
    CMatrix coeff(long m) const {
        if (m < m_min() || m > m_max()) return zeros(dim_);
        return coeffs_[static_cast<std::size_t>(m - m_min_)];
    }

    /// Σ a_m z^m (Horner in z, shifted by z^{m_min}).
    CMatrix evaluate_z(Complex z) const {
        CMatrix acc = coeffs_.back();
        for (std::size_t i = coeffs_.size() - 1; i-- > 0;) {
            acc *= z;
            acc += coeffs_[i];
        }
        return acc * std::pow(z, static_cast<double>(m_min_));
    }

    /// f(k) = Σ a_m e^{imk}.
    CMatrix evaluate(double k) const {
        CMatrix acc = zeros(dim_);
        for (std::size_t i = 0; i < coeffs_.size(); ++i)
            acc += coeffs_[i] * std::polar(1.0, static_cast<double>(m_min_ + static_cast<long>(i)) * k);
        return acc;
    }

    /// Drop leading/trailing coefficients whose norm is ≤ tol. Returns the
    /// ℓ¹ mass that was removed (the tail bound).
    double trim(double tol) {
        double dropped = 0.0;
        std::size_t first = 0;
        std::size_t last = coeffs_.size();
        while (first + 1 < last) {
            const double n = op_norm(coeffs_[first]);
            if (n > tol) break;
            dropped += n;
            ++first;
        }
        while (last - 1 > first) {
            const double n = op_norm(coeffs_[last - 1]);
            if (n > tol) break;
            dropped += n;
            --last;
        }
        coeffs_ = std::vector<CMatrix>(coeffs_.begin() + static_cast<long>(first),
                                       coeffs_.begin() + static_cast<long>(last));
        m_min_ += static_cast<long>(first);
        return dropped;
    }

    /// Pointwise conjugate transpose on the circle: f*(z) = Σ a_m* z^{−m}.
    WienerSeries adjoint_on_circle() const {
        std::vector<CMatrix> c(coeffs_.size());
        for (std::size_t i = 0; i < coeffs_.size(); ++i) c[coeffs_.size() - 1 - i] = coeffs_[i].adjoint();
        return WienerSeries(-m_max(), std::move(c), dim_);
    }

private:
    long m_min_ = 0;
    Eigen::Index dim_ = 1;
    std::vector<CMatrix> coeffs_{};
};

/// ‖f‖ = Σ_m ‖a_m‖ with the operator norm.
inline double wiener_norm(const WienerSeries& f) {
    std::vector<double> terms;
    terms.reserve(f.coeffs().size());
    for (const auto& c : f.coeffs()) terms.push_back(op_norm(c));
    return pairwise_sum<double>(terms, 0.0);
}

/// Order-preserving convolution c_m = Σ_i a_i b_{m−i}.
inline WienerSeries wiener_product(const WienerSeries& f, const WienerSeries& g) {
    if (f.dim() != g.dim()) throw ValidationError("wiener_product: dimension mismatch");
    const auto& a = f.coeffs();
    const auto& b = g.coeffs();
    std::vector<CMatrix> c(a.size() + b.size() - 1, zeros(f.dim()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].isZero(0.0)) continue;
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j].noalias() += a[i] * b[j];
    }
    return WienerSeries(f.m_min() + g.m_min(), std::move(c), f.dim());
}

} // namespace jacobi_scatter
