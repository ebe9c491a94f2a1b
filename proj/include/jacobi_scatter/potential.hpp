#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "jacobi_scatter/core.hpp"

namespace jacobi_scatter {

/// A finitely supported sequence of Hermitian L×L matrices; zero off the support.
class Potential {
public:
    struct Site {
        long n;
        CMatrix value;
    };

    explicit Potential(Eigen::Index dim = 1) : dim_(dim), zero_(zeros(dim)) {
        if (dim < 1) throw ValidationError("potential: L must be positive");
    }

    /// Validates Hermiticity (relative 1e-12), dimensions and strictly
    /// increasing indices.
    Potential(Eigen::Index dim, std::vector<Site> sites) : Potential(dim) {
        for (std::size_t i = 0; i < sites.size(); ++i) {
            const auto& s = sites[i];
            if (s.value.rows() != dim || s.value.cols() != dim)
                throw ValidationError("potential: entry n=" + std::to_string(s.n) + " has dimension " +
                                      std::to_string(s.value.rows()) + "x" + std::to_string(s.value.cols()) +
                                      ", expected L=" + std::to_string(dim));
            if (!s.value.allFinite())
                throw ValidationError("potential: entry n=" + std::to_string(s.n) + " is not finite");
            if (!is_hermitian(s.value)) {
                std::ostringstream os;
                os << "potential: entry n=" << s.n << " is not Hermitian (defect norm "
                   << hermitian_defect(s.value) << ")";
                throw ValidationError(os.str());
            }
            if (i > 0 && sites[i - 1].n >= s.n)
                throw ValidationError(sites[i - 1].n == s.n
                                          ? "potential: duplicate index n=" + std::to_string(s.n)
                                          : "potential: indices must be strictly increasing");
        }
        sites_ = std::move(sites);
    }

    /// Builds from unordered entries; duplicates are rejected.
    static Potential from_map(Eigen::Index dim, const std::map<long, CMatrix>& entries) {
        std::vector<Site> sites;
        for (const auto& [n, v] : entries) sites.push_back({n, v});
        return Potential(dim, std::move(sites));
    }

    Eigen::Index dim() const { return dim_; }
    const std::vector<Site>& sites() const { return sites_; }
    bool empty() const { return sites_.empty(); }

    /// Smallest / largest support index; 0 for the zero potential.
    long min_support() const { return sites_.empty() ? 0 : sites_.front().n; }
    long max_support() const { return sites_.empty() ? 0 : sites_.back().n; }

    const CMatrix& operator()(long n) const {
        auto it = std::lower_bound(sites_.begin(), sites_.end(), n,
                                   [](const Site& s, long key) { return s.n < key; });
        if (it != sites_.end() && it->n == n) return it->value;
        return zero_;
    }

    Potential scaled(double c) const {
        std::vector<Site> s = sites_;
        for (auto& site : s) site.value *= c;
        return Potential(dim_, std::move(s));
    }

    /// V'(n) = V(−n).
    Potential reflected() const {
        std::vector<Site> s;
        for (auto it = sites_.rbegin(); it != sites_.rend(); ++it) s.push_back({-it->n, it->value});
        return Potential(dim_, std::move(s));
    }

private:
    Eigen::Index dim_;
    std::vector<Site> sites_;
    CMatrix zero_;
};

struct NormZero {};
struct NormRho {
    double rho;
};
struct NormInf {};
using NormKind = std::variant<NormZero, NormRho, NormInf>;

/// ‖V‖₀ = Σ‖V(n)‖, ‖V‖_ρ = Σ(|n|+1)^ρ‖V(n)‖, ‖V‖_∞ = max‖V(n)‖.
inline double potential_norm(const Potential& v, const NormKind& kind) {
    std::vector<double> terms;
    for (const auto& s : v.sites()) {
        const double n = op_norm(s.value);
        if (std::holds_alternative<NormRho>(kind)) {
            const double rho = std::get<NormRho>(kind).rho;
            if (rho < 0.0) throw ValidationError("potential_norm: rho must be non-negative");
            terms.push_back(std::pow(static_cast<double>(std::abs(s.n)) + 1.0, rho) * n);
        } else {
            terms.push_back(n);
        }
    }
    if (std::holds_alternative<NormInf>(kind)) {
        double m = 0.0;
        for (double t : terms) m = std::max(m, t);
        return m;
    }
    return pairwise_sum<double>(terms, 0.0);
}

/// Σ_{|n|>N} ‖V(n)‖, the mass lost when a potential is cut to [−N, N].
inline double tail_norm(const Potential& v, long N) {
    double acc = 0.0;
    for (const auto& s : v.sites())
        if (std::abs(s.n) > N) acc += op_norm(s.value);
    return acc;
}

// ---------------------------------------------------------------------------
// JSON ingestion / serialization
//   { "L": int, "entries": [ { "n": int, "re": [[..]], "im": [[..]] } ] }
// ---------------------------------------------------------------------------

inline Potential potential_from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object() || !j.contains("L")) throw ValidationError("potential: missing field \"L\"");
        const long L = j.at("L").get<long>();
        if (L < 1) throw ValidationError("potential: L must be positive");
        std::vector<Potential::Site> sites;
        if (j.contains("entries")) {
            for (const auto& e : j.at("entries")) {
                const long n = e.at("n").get<long>();
                const auto& re = e.at("re");
                const auto& im = e.contains("im") ? e.at("im") : nlohmann::json();
                if (!re.is_array() || static_cast<long>(re.size()) != L)
                    throw ValidationError("potential: entry n=" + std::to_string(n) + " \"re\" must be " +
                                          std::to_string(L) + "x" + std::to_string(L));
                CMatrix m(L, L);
                for (long a = 0; a < L; ++a) {
                    if (!re[a].is_array() || static_cast<long>(re[a].size()) != L)
                        throw ValidationError("potential: entry n=" + std::to_string(n) +
                                              " has a row of wrong length");
                    for (long b = 0; b < L; ++b) {
                        double imv = 0.0;
                        if (!im.is_null()) {
                            if (!im.is_array() || static_cast<long>(im.size()) != L ||
                                static_cast<long>(im[a].size()) != L)
                                throw ValidationError("potential: entry n=" + std::to_string(n) +
                                                      " \"im\" has wrong shape");
                            imv = im[a][b].get<double>();
                        }
                        m(a, b) = Complex(re[a][b].get<double>(), imv);
                    }
                }
                sites.push_back({n, std::move(m)});
            }
        }
        std::sort(sites.begin(), sites.end(), [](const auto& x, const auto& y) { return x.n < y.n; });
        return Potential(L, std::move(sites));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("potential: parse error: ") + e.what());
    }
}

inline Potential load_potential(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("potential: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("potential: parse error in " + path + ": " + e.what());
    }
    return potential_from_json(j);
}

/// Shortest form is not used: every double is written with 17 significant
/// digits, which round-trips exactly.
inline std::string format_double17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string potential_to_json_string(const Potential& v) {
    std::ostringstream os;
    const auto L = v.dim();
    os << "{\"L\": " << L << ", \"entries\": [";
    for (std::size_t i = 0; i < v.sites().size(); ++i) {
        const auto& s = v.sites()[i];
        os << (i ? ", " : "") << "{\"n\": " << s.n;
        for (int part = 0; part < 2; ++part) {
            os << (part == 0 ? ", \"re\": [" : ", \"im\": [");
            for (Eigen::Index a = 0; a < L; ++a) {
                os << (a ? ", " : "") << "[";
                for (Eigen::Index b = 0; b < L; ++b)
                    os << (b ? ", " : "")
                       << format_double17(part == 0 ? s.value(a, b).real() : s.value(a, b).imag());
                os << "]";
            }
            os << "]";
        }
        os << "}";
    }
    os << "]}";
    return os.str();
}

inline void save_potential(const Potential& v, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("potential: cannot write " + path);
    out << potential_to_json_string(v) << "\n";
}

} // namespace jacobi_scatter
