#pragma once

// Brute-force ground truth: the operator restricted to [−N, N] with zero
// boundary values, as a dense Hermitian matrix of size (2N+1)L.

#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <vector>

#include "jacobi_scatter/core.hpp"
#include "jacobi_scatter/jost.hpp"
#include "jacobi_scatter/potential.hpp"

namespace jacobi_scatter {

class TruncatedOperator {
public:
    TruncatedOperator(const Potential& v, long N) : N_(N), L_(v.dim()) {
        if (N < 1) throw ValidationError("truncated operator: N must be positive");
        const Eigen::Index size = (2 * N + 1) * L_;
        h_ = CMatrix::Zero(size, size);
        for (long n = -N; n <= N; ++n) {
            const Eigen::Index i = offset(n);
            h_.block(i, i, L_, L_) = v(n);
            if (n < N) {
                h_.block(i, i + L_, L_, L_) = identity(L_);
                h_.block(i + L_, i, L_, L_) = identity(L_);
            }
        }
        eig_ = std::make_shared<EigenCache>();
    }

    long N() const { return N_; }
    Eigen::Index L() const { return L_; }
    Eigen::Index size() const { return h_.rows(); }
    const CMatrix& matrix() const { return h_; }

    Eigen::Index offset(long n) const {
        if (n < -N_ || n > N_) throw ValidationError("truncated operator: site " + std::to_string(n) + " outside [−N, N]");
        return (n + N_) * L_;
    }

    /// Eigenvalues ascending and eigenvectors as columns; computed once.
    const Eigen::VectorXd& eigenvalues() const { return eigen().eigenvalues(); }
    const CMatrix& eigenvectors() const { return eigen().eigenvectors(); }

private:
    struct EigenCache {
        std::once_flag once;
        Eigen::SelfAdjointEigenSolver<CMatrix> solver;
    };

    const Eigen::SelfAdjointEigenSolver<CMatrix>& eigen() const {
        std::call_once(eig_->once, [&] {
            eig_->solver.compute(h_);
            if (eig_->solver.info() != Eigen::Success) throw NumericalError("truncated operator: eigendecomposition failed");
        });
        return eig_->solver;
    }

    long N_;
    Eigen::Index L_;
    CMatrix h_;
    std::shared_ptr<EigenCache> eig_;
};

/// (H_N − E)^{-1} with block access. With `columns` set, only the block
/// columns r in that window are solved for.
class OracleResolvent {
public:
    OracleResolvent(const TruncatedOperator& op, Complex E, double margin = 1e-8,
                    std::optional<Window> columns = std::nullopt)
        : N_(op.N()), L_(op.L()), cols_(columns.value_or(Window{-op.N(), op.N()})) {
        if (cols_.lo < -N_ || cols_.hi > N_ || cols_.lo > cols_.hi)
            throw ValidationError("oracle resolvent: column window outside [−N, N]");
        if (std::abs(E.imag()) < margin) {
            const auto& ev = op.eigenvalues();
            for (Eigen::Index i = 0; i < ev.size(); ++i)
                if (std::abs(ev(i) - E.real()) < margin) {
                    std::ostringstream os;
                    os << "oracle resolvent: E = " << format_complex(E) << " is within " << margin
                       << " of the truncated eigenvalue " << ev(i);
                    throw NumericalError(os.str());
                }
        }
        CMatrix a = op.matrix();
        a.diagonal().array() -= E;
        const Eigen::Index c0 = (cols_.lo + N_) * L_;
        const Eigen::Index nc = (cols_.hi - cols_.lo + 1) * L_;
        const CMatrix rhs = CMatrix::Identity(a.rows(), a.cols()).middleCols(c0, nc);
        r_ = a.partialPivLu().solve(rhs);
        residual_ = (a * r_ - rhs).cwiseAbs().rowwise().sum().maxCoeff();
    }

    CMatrix block(long s, long r) const {
        if (std::abs(s) > N_ || !cols_.contains(r)) throw ValidationError("oracle resolvent: index outside [−N, N]");
        return r_.block((s + N_) * L_, (r - cols_.lo) * L_, L_, L_);
    }

    /// ‖(H_N − E)X − I‖_∞ (max row sum) over the solved columns.
    double residual() const { return residual_; }
    const CMatrix& matrix() const { return r_; }

private:
    long N_;
    Eigen::Index L_;
    Window cols_;
    CMatrix r_;
    double residual_;
};

inline OracleResolvent oracle_resolvent(const Potential& v, Complex E, long N,
                                        std::optional<Window> columns = std::nullopt) {
    return OracleResolvent(TruncatedOperator(v, N), E, 1e-8, columns);
}

/// U diag(e^{−itλ} 1_{λ∈(−2,2)}) U* restricted to requested blocks.
class OraclePropagator {
public:
    explicit OraclePropagator(const TruncatedOperator& op) : op_(op) {
        const auto& ev = op_.eigenvalues();
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            if (ev(i) > -2.0 && ev(i) < 2.0) ac_.push_back(i);
    }

    const TruncatedOperator& op() const { return op_; }
    std::size_t ac_count() const { return ac_.size(); }

    CMatrix block(double t, long s, long r) const {
        const auto& U = op_.eigenvectors();
        const auto& ev = op_.eigenvalues();
        const auto L = op_.L();
        const Eigen::Index is = op_.offset(s);
        const Eigen::Index ir = op_.offset(r);
        CMatrix out = zeros(L);
        for (Eigen::Index k : ac_) {
            const Complex ph = std::polar(1.0, -t * ev(k));
            out.noalias() += ph * U.block(is, k, L, 1) * U.block(ir, k, L, 1).adjoint();
        }
        return out;
    }

    /// Σ_s ‖block(t, s, r)‖_F² over all sites of the truncated lattice.
    double column_norm_sq(double t, long r) const {
        const auto& U = op_.eigenvectors();
        const auto& ev = op_.eigenvalues();
        const auto L = op_.L();
        const Eigen::Index ir = op_.offset(r);
        CMatrix col = CMatrix::Zero(op_.size(), L);
        for (Eigen::Index k : ac_) {
            const Complex ph = std::polar(1.0, -t * ev(k));
            col.noalias() += ph * U.col(k) * U.block(ir, k, L, 1).adjoint();
        }
        return col.squaredNorm();
    }

    /// Full dense propagator; only sensible for small N.
    CMatrix matrix(double t) const {
        const auto& U = op_.eigenvectors();
        const auto& ev = op_.eigenvalues();
        Eigen::VectorXcd d = Eigen::VectorXcd::Zero(ev.size());
        for (Eigen::Index k : ac_) d(k) = std::polar(1.0, -t * ev(k));
        return U * d.asDiagonal() * U.adjoint();
    }

private:
    TruncatedOperator op_;
    std::vector<Eigen::Index> ac_;
};

inline OraclePropagator oracle_propagator(const Potential& v, long N) { return OraclePropagator(TruncatedOperator(v, N)); }

struct PointEigenvalue {
    double value;
    double distance_to_band;  // distance to [−2, 2]
    bool stable;              // matched within 1e-6 by the 2N truncation
};

/// Eigenvalues of H_N outside [−2−δ, 2+δ], δ = 10/N, flagged by whether the
/// 2N truncation reproduces them.
inline std::vector<PointEigenvalue> oracle_point_spectrum(const Potential& v, long N) {
    const double delta = 10.0 / static_cast<double>(N);
    auto outside = [&](const TruncatedOperator& op) {
        std::vector<double> out;
        const auto& ev = op.eigenvalues();
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            if (std::abs(ev(i)) > 2.0 + delta) out.push_back(ev(i));
        return out;
    };
    const auto a = outside(TruncatedOperator(v, N));
    const auto b = outside(TruncatedOperator(v, 2 * N));
    std::vector<PointEigenvalue> res;
    for (double e : a) {
        bool stable = false;
        for (double f : b) stable = stable || std::abs(e - f) < 1e-6;
        res.push_back({e, std::abs(e) - 2.0, stable});
    }
    return res;
}

} // namespace jacobi_scatter
