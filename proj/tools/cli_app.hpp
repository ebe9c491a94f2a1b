#pragma once

// Command-line front end. run() never exits the process; it returns the exit
// status so tests can drive it in-process.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jacobi_scatter/evolution.hpp"
#include "jacobi_scatter/jost.hpp"
#include "jacobi_scatter/oracle.hpp"
#include "jacobi_scatter/parallel.hpp"
#include "jacobi_scatter/potential.hpp"
#include "jacobi_scatter/resolvent.hpp"
#include "jacobi_scatter/scattering.hpp"

namespace jacobi_scatter::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2, kCrossCheck = 3 };

using nlohmann::json;

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::string num(double x) { return format_double17(x); }

inline std::vector<std::string> matrix_header(Eigen::Index L) {
    std::vector<std::string> h;
    for (Eigen::Index i = 0; i < L; ++i)
        for (Eigen::Index j = 0; j < L; ++j) {
            const std::string ij = std::to_string(i + 1) + std::to_string(j + 1);
            h.push_back("re_" + ij);
            h.push_back("im_" + ij);
        }
    return h;
}

inline void append_matrix(std::vector<std::string>& row, const CMatrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(num(m(i, j).real()));
            row.push_back(num(m(i, j).imag()));
        }
}

inline json matrix_json(const CMatrix& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json rr = json::array(), ii = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            rr.push_back(m(i, j).real());
            ii.push_back(m(i, j).imag());
        }
        re.push_back(rr);
        im.push_back(ii);
    }
    return json{{"re", re}, {"im", im}};
}

inline json complex_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline std::string to_csv(const Table& t) {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return os.str();
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string subcommand;
    std::string potential_path;
    std::string output_path;
    std::string format = "csv";
    std::optional<int> threads;
    std::optional<double> tol;

    double z_re = 0.0, z_im = 0.0;
    std::string direction = "plus";
    std::string window_spec;
    std::string jost_method = "volterra";

    std::size_t grid = 512;

    double energy_re = 0.0, energy_im = 0.0;
    double energy = 0.0;
    std::string side = "plus";
    long s = 0, r = 0;

    double alpha = 1.5, rho = 0.5;
    std::string grid_file;
    long window = -1;

    double t = 1.0;
    std::string evolve_method = "both";

    double tmin = 1.0, tmax = 1000.0;
    std::size_t samples = 40;

    std::string suite = "all";
};

inline Window parse_window(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ValidationError("window must look like a:b, got '" + spec + "'");
    try {
        std::size_t p1 = 0, p2 = 0;
        const std::string a = spec.substr(0, colon), b = spec.substr(colon + 1);
        const long lo = std::stol(a, &p1);
        const long hi = std::stol(b, &p2);
        if (p1 != a.size() || p2 != b.size()) throw std::invalid_argument("trailing");
        if (hi < lo) throw ValidationError("window '" + spec + "' is empty");
        return Window{lo, hi};
    } catch (const std::logic_error&) {
        throw ValidationError("window must look like a:b with integers, got '" + spec + "'");
    }
}

inline Side parse_side(const std::string& s) {
    if (s == "plus") return Side::plus;
    if (s == "minus") return Side::minus;
    throw ValidationError("side must be plus or minus, got '" + s + "'");
}

inline Potential load_or_free(const RunConfig& c) {
    if (c.potential_path.empty()) return Potential(1, {});
    return load_potential(c.potential_path);
}

inline void validate(const RunConfig& c) {
    if (c.format != "csv" && c.format != "json") throw ValidationError("format must be csv or json");
    if (c.tol && !(*c.tol > 0.0)) throw ValidationError("--tol must be positive");
    if (c.subcommand == "lap" && !(c.alpha > c.rho + 0.5)) throw ValidationError("lap: need alpha > rho + 1/2");
    if (c.subcommand == "lap" && !(c.rho >= 0.0)) throw ValidationError("lap: rho must be non-negative");
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct Output {
    json doc;
    Table table;
};

inline Output cmd_jost(const RunConfig& c) {
    const Potential v = load_or_free(c);
    const Direction dir = c.direction == "plus"    ? Direction::plus
                          : c.direction == "minus" ? Direction::minus
                                                   : throw ValidationError("direction must be plus or minus");
    const Complex z{c.z_re, c.z_im};
    Window w = c.window_spec.empty() ? default_window(v, 10) : parse_window(c.window_spec);
    JostSolution u = [&] {
        if (c.jost_method == "volterra") {
            const Window cover{std::min(w.lo, v.min_support()), std::max(w.hi, v.max_support())};
            return jost_volterra(v, z, dir, cover);
        }
        if (c.jost_method == "series") {
            checked_jost_point(z, JostOptions{});
            return jost_series_solution(transmutation_coeffs(v, dir, w), z);
        }
        throw ValidationError("jost method must be volterra or series");
    }();
    Output o;
    o.table.header = {"n"};
    for (auto& h : matrix_header(v.dim())) o.table.header.push_back(h);
    o.doc = {{"z", complex_json(u.point.z)}, {"direction", to_string(dir)}, {"method", c.jost_method}};
    json rows = json::array();
    for (long n = w.lo; n <= w.hi; ++n) {
        std::vector<std::string> row{std::to_string(n)};
        append_matrix(row, u(n));
        o.table.rows.push_back(std::move(row));
        rows.push_back({{"n", n}, {"value", matrix_json(u(n))}});
    }
    o.doc["rows"] = rows;
    return o;
}

inline Output cmd_scatter(const RunConfig& c) {
    const Potential v = load_or_free(c);
    if (c.grid < 4) throw ValidationError("scatter: --grid must be at least 4");
    const GenericityOptions gopts;
    std::vector<Complex> zs;
    for (std::size_t i = 0; i < c.grid; ++i) {
        const double theta = offset_grid_point(i, c.grid);
        if (std::min(std::abs(theta), kPi - std::abs(theta)) < gopts.edge_exclusion) continue;
        zs.push_back(std::polar(1.0, theta));
    }
    std::vector<ScatteringData> data(zs.size());
    parallel_for(zs.size(), [&](std::size_t i) { data[i] = scattering_matrices(v, zs[i]); });
    const GenericityReport gen = is_generic(v, c.grid, gopts);

    Output o;
    o.table.header = {"z_re", "z_im", "quantity"};
    for (auto& h : matrix_header(v.dim())) o.table.header.push_back(h);
    json recs = json::array();
    for (const auto& d : data) {
        const std::pair<const char*, const CMatrix*> qs[] = {{"T_plus", &d.Tplus},   {"T_minus", &d.Tminus},
                                                            {"R_plus", &d.Rplus},   {"R_minus", &d.Rminus},
                                                            {"M_plus", &d.Mplus},   {"M_minus", &d.Mminus}};
        json rec{{"z", complex_json(d.point.z)},
                 {"nu", complex_json(d.nu)},
                 {"det_W_plus", complex_json(d.detW_plus)},
                 {"det_W_minus", complex_json(d.detW_minus)}};
        for (const auto& [name, m] : qs) {
            std::vector<std::string> row{num(d.point.z.real()), num(d.point.z.imag()), name};
            append_matrix(row, *m);
            o.table.rows.push_back(std::move(row));
            rec[name] = matrix_json(*m);
        }
        recs.push_back(rec);
    }
    o.doc = {{"records", recs},
             {"generic", gen.generic},
             {"min_abs_det", gen.min_abs_det},
             {"argmin", complex_json(gen.argmin)}};
    return o;
}

inline Output kernel_output(Eigen::Index L, long s, long r, const CMatrix& m, json meta) {
    Output o;
    o.table.header = {"s", "r"};
    for (auto& h : matrix_header(L)) o.table.header.push_back(h);
    std::vector<std::string> row{std::to_string(s), std::to_string(r)};
    append_matrix(row, m);
    o.table.rows.push_back(std::move(row));
    meta["s"] = s;
    meta["r"] = r;
    meta["value"] = matrix_json(m);
    o.doc = std::move(meta);
    return o;
}

inline Output cmd_green(const RunConfig& c) {
    const Potential v = load_or_free(c);
    const Complex E{c.energy_re, c.energy_im};
    const CMatrix g = green_kernel(v, E, c.s, c.r);
    return kernel_output(v.dim(), c.s, c.r, g, {{"energy", complex_json(E)}, {"z", complex_json(inverse_zhukovsky(E).z)}});
}

inline Output cmd_green_boundary(const RunConfig& c) {
    const Potential v = load_or_free(c);
    const Side side = parse_side(c.side);
    const BoundaryKernel k(v, c.energy, side, Window{std::min(c.s, c.r), std::max(c.s, c.r)});
    return kernel_output(v.dim(), c.s, c.r, k(c.s, c.r),
                         {{"energy", c.energy}, {"side", to_string(side)}, {"z", complex_json(k.point().z)}});
}

inline HolderGrid load_holder_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open grid file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("grid file '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        const Side side = parse_side(j.value("side", std::string("plus")));
        if (j.contains("pairs")) {
            HolderGrid g;
            g.side = side;
            for (const auto& p : j.at("pairs")) g.pairs.emplace_back(Complex{p.at(0).get<double>(), 0.0},
                                                                     Complex{p.at(1).get<double>(), 0.0});
            return g;
        }
        return ladder_grid(j.at("emin").get<double>(), j.at("emax").get<double>(), j.at("bases").get<int>(),
                           j.at("offsets").get<int>(), j.value("h_min", 1e-4), j.value("h_max", 1e-1), side);
    } catch (const json::exception& e) {
        throw ValidationError("grid file '" + path + "': " + e.what());
    }
}

inline Output cmd_lap(const RunConfig& c) {
    const Potential v = load_or_free(c);
    const long N = c.window < 0 ? 20 : c.window;
    const HolderGrid grid = c.grid_file.empty() ? ladder_grid(-1.0, 1.0, 5, 9, 1e-4, 1e-1, parse_side(c.side))
                                                : load_holder_grid(c.grid_file);
    const HolderReport rep = holder_diagnostic(v, grid, c.alpha, c.rho, N);
    Output o;
    o.table.header = {"E", "E0", "difference", "scaled_separation", "ratio"};
    json pairs = json::array();
    for (const auto& p : rep.pairs) {
        o.table.rows.push_back(
            {num(p.E.real()), num(p.E0.real()), num(p.difference), num(p.scaled_sep), num(p.ratio)});
        pairs.push_back({{"E", p.E.real()},
                         {"E0", p.E0.real()},
                         {"difference", p.difference},
                         {"separation", p.separation},
                         {"scaled_separation", p.scaled_sep},
                         {"ratio", p.ratio}});
    }
    o.doc = {{"alpha", rep.alpha},
             {"rho", rep.rho},
             {"window", N},
             {"side", to_string(grid.side)},
             {"max_ratio", rep.max_ratio},
             {"fitted_exponent", std::isfinite(rep.fitted_exponent) ? json(rep.fitted_exponent) : json(nullptr)},
             {"pairs", pairs}};
    return o;
}

inline Output cmd_evolve(const RunConfig& c) {
    const Potential v = load_or_free(c);
    if (!(c.t >= 0.0)) throw ValidationError("evolve: t must be non-negative");
    const SpectralModel model(v, model_options_for(c.s, c.r));
    std::vector<std::pair<std::string, CMatrix>> results;
    json meta{{"t", c.t}, {"s", c.s}, {"r", c.r}};
    if (c.evolve_method == "both") {
        const auto cmp = evolution_kernel_both(model, c.t, c.s, c.r, c.tol.value_or(1e-8));
        results = {{"kgrid", cmp.kgrid}, {"fourier_bessel", cmp.fourier_bessel}};
        meta["relative_difference"] = cmp.relative_difference;
    } else if (c.evolve_method == "kgrid") {
        results = {{"kgrid", evolution_kernel(model, c.t, c.s, c.r, EvolutionMethod::kgrid)}};
    } else if (c.evolve_method == "fourier_bessel") {
        results = {{"fourier_bessel", evolution_kernel(model, c.t, c.s, c.r, EvolutionMethod::fourier_bessel)}};
    } else {
        throw ValidationError("evolve: method must be kgrid, fourier_bessel or both");
    }
    Output o;
    o.table.header = {"t", "s", "r", "method"};
    for (auto& h : matrix_header(v.dim())) o.table.header.push_back(h);
    for (const auto& [name, m] : results) {
        std::vector<std::string> row{num(c.t), std::to_string(c.s), std::to_string(c.r), name};
        append_matrix(row, m);
        o.table.rows.push_back(std::move(row));
        meta[name] = matrix_json(m);
    }
    if (model.genericity() && !model.genericity()->generic) meta["warning"] = "potential is not generic on the sampled grid";
    o.doc = std::move(meta);
    return o;
}

inline Output cmd_decay(const RunConfig& c) {
    const Potential v = load_or_free(c);
    const long window = c.window < 0 ? 128 : c.window;
    const SpectralModel model(v);
    const DecayFit fit = dispersive_decay_fit(model, geometric_times(c.tmin, c.tmax, c.samples), window);
    Output o;
    o.table.header = {"t", "sup_norm", "bound_c_times_t_to_minus_third"};
    json rows = json::array();
    for (std::size_t i = 0; i < fit.times.size(); ++i) {
        const double bound = fit.c_fit * std::pow(1.0 + fit.times[i], -1.0 / 3.0);
        o.table.rows.push_back({num(fit.times[i]), num(fit.sup_norms[i]), num(bound)});
        rows.push_back({{"t", fit.times[i]},
                        {"sup_norm", fit.sup_norms[i]},
                        {"bound_c_times_t_to_minus_third", bound},
                        {"argmax_s", fit.argmax_s[i]},
                        {"argmax_r", fit.argmax_r[i]}});
    }
    o.doc = {{"window", window},
             {"slope", std::isfinite(fit.slope) ? json(fit.slope) : json(nullptr)},
             {"c_fit", fit.c_fit},
             {"rows", rows}};
    if (model.genericity() && !model.genericity()->generic) o.doc["warning"] = "potential is not generic on the sampled grid";
    return o;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct Check {
    std::string name;
    double measured;
    double tolerance;
    bool passed;
};

inline Check upper(std::string name, double measured, double tol) {
    return {std::move(name), measured, tol, std::isfinite(measured) && measured <= tol};
}

inline std::vector<Check> verify_jost(const Potential& v, const RunConfig& c) {
    const Window w{v.min_support() - 10, v.max_support() + 10};
    const auto tp = transmutation_coeffs(v, Direction::plus, w);
    const auto tm = transmutation_coeffs(v, Direction::minus, w);
    double worst = 0.0, resid = 0.0;
    for (int i = 0; i < 32; ++i) {
        const Complex z = std::polar(1.0, offset_grid_point(static_cast<std::size_t>(i), 32) * 0.97);
        for (const auto& [dir, table] : {std::pair{Direction::plus, &tp}, std::pair{Direction::minus, &tm}}) {
            const JostSolution a = jost_volterra(v, z, dir, w);
            resid = std::max(resid, difference_residual(v, zhukovsky(z), a.values));
            for (long n = w.lo; n <= w.hi; ++n) {
                const CMatrix b = jost_series(*table, z, n);
                worst = std::max(worst, op_norm(a(n) - b) / (1.0 + op_norm(b)));
            }
        }
    }
    return {upper("jost.series_vs_volterra", worst, c.tol.value_or(1e-10)),
            upper("jost.difference_residual", resid, 1e-10)};
}

inline std::vector<Check> verify_scattering(const Potential& v) {
    double treq = 0.0, tsym = 0.0;
    for (int i = 0; i < 32; ++i) {
        const Complex z = std::polar(1.0, offset_grid_point(static_cast<std::size_t>(i), 32) * 0.97);
        const ScatteringSample smp = scattering_sample(v, z, Window{-10, 10});
        treq = std::max(treq, scattering_relation_residual(smp));
        const ScatteringData conj = scattering_matrices(v, std::conj(z));
        tsym = std::max(tsym, op_norm(conj.Tplus.adjoint() - smp.data.Tminus));
    }
    const GenericityReport gen = is_generic(v, 256);
    return {upper("scattering.transmission_relation", treq, 1e-8),
            upper("scattering.transmission_symmetry", tsym, 1e-10),
            {"scattering.generic", gen.min_abs_det, GenericityOptions{}.det_threshold, gen.generic}};
}

inline std::vector<Check> verify_green(const Potential& v, long N) {
    std::vector<Check> out;
    const long S = std::min(20L, N / 4);
    double oracle_err = 0.0;
    for (Complex E : {Complex{3.0, 0.25}, Complex{-3.0, 0.25}, Complex{2.5, 0.5}}) {
        const OracleResolvent orc = oracle_resolvent(v, E, N, Window{-S, S});
        const ResolventKernel k(v, inverse_zhukovsky(E).z, Window{-S, S});
        for (long s = -S; s <= S; ++s)
            for (long r = -S; r <= S; ++r) {
                const CMatrix o = orc.block(s, r);
                oracle_err = std::max(oracle_err, op_norm(k(s, r) - o) / (1.0 + op_norm(o)));
            }
    }
    out.push_back(upper("green.oracle", oracle_err, 1e-6));

    const Complex Eoff{2.5, 0.5};
    const ResolventKernel koff(v, inverse_zhukovsky(Eoff).z, Window{-S - 1, S + 1});
    double resid = green_difference_residual(v, Eoff, koff, Window{-S, S});
    double adj = 0.0;
    {
        const ResolventKernel kc(v, inverse_zhukovsky(std::conj(Eoff)).z, Window{-S, S});
        for (long s = -S; s <= S; ++s)
            for (long r = -S; r <= S; ++r) adj = std::max(adj, op_norm(koff(r, s) - kc(s, r).adjoint()));
    }
    double sym = 0.0, monotone_fail = 0.0;
    for (double E : {-1.0, 0.0, 1.0}) {
        const BoundaryKernel kp(v, E, Side::plus, Window{-S - 1, S + 1});
        const BoundaryKernel km(v, E, Side::minus, Window{-S - 1, S + 1});
        resid = std::max({resid, green_difference_residual(v, Complex{E, 0.0}, kp, Window{-S, S}),
                          green_difference_residual(v, Complex{E, 0.0}, km, Window{-S, S})});
        for (long s = -S; s <= S; ++s)
            for (long r = -S; r <= S; ++r) sym = std::max(sym, op_norm(kp(s, r).adjoint() - km(r, s)));
        double prev = std::numeric_limits<double>::infinity();
        for (double eps : {1e-2, 1e-3, 1e-4}) {
            const ResolventKernel ke(v, inverse_zhukovsky(Complex{E, eps}).z, Window{-5, 5});
            double d = 0.0;
            for (long s = -5; s <= 5; ++s)
                for (long r = -5; r <= 5; ++r) d = std::max(d, op_norm(ke(s, r) - kp(s, r)));
            if (!(d < prev)) monotone_fail += 1.0;
            prev = d;
        }
    }
    out.push_back(upper("green.difference_residual", resid, 1e-10));
    out.push_back(upper("green.adjoint_symmetry", adj, 1e-10));
    out.push_back(upper("green.boundary_symmetry", sym, 1e-10));
    out.push_back(upper("green.limit_nonmonotone_count", monotone_fail, 0.0));
    return out;
}

inline std::vector<Check> verify_evolve(const Potential& v, const RunConfig& c) {
    const SpectralModel model(v, model_options_for(-20, 20));
    const OraclePropagator prop = oracle_propagator(v, 300);
    double methods = 0.0, oracle = 0.0;
    for (double t : {0.5, 5.0, 20.0})
        for (long s : {-20L, -3L, 0L, 4L, 20L})
            for (long r : {-20L, -1L, 0L, 7L, 20L}) {
                const CMatrix b = evolution_kernel(model, t, s, r, EvolutionMethod::fourier_bessel);
                oracle = std::max(oracle, op_norm(b - prop.block(t, s, r)));
                if (s == r || s + r == 0) {
                    const CMatrix k = evolution_kernel(model, t, s, r, EvolutionMethod::kgrid);
                    methods = std::max(methods, op_norm(k - b) / std::max(1.0, op_norm(b)));
                }
            }
    return {upper("evolve.kgrid_vs_fourier_bessel", methods, c.tol.value_or(1e-8)),
            upper("evolve.oracle", oracle, 1e-4)};
}

inline std::vector<Check> verify_lap(const Potential& v) {
    const auto a = weighted_resolvent_norm(v, Complex{0.5, 0.0}, Side::plus, 1.5, 20);
    const auto b = weighted_resolvent_norm(v, Complex{0.5, 0.0}, Side::plus, 1.5, 40);
    const HolderReport coarse = holder_diagnostic(v, ladder_grid(-1.0, 1.0, 3, 5), 1.5, 0.5, 20);
    const HolderReport fine = holder_diagnostic(v, ladder_grid(-1.0, 1.0, 5, 9), 1.5, 0.5, 20);
    const double change = std::abs(fine.max_ratio - coarse.max_ratio) / coarse.max_ratio;
    return {upper("lap.weighted_norm_vs_bound", a.norm - a.bound, 0.0),
            upper("lap.weighted_norm_monotone", a.norm - b.norm, 1e-12),
            upper("lap.holder_refinement_change", change, 0.1)};
}

inline Output cmd_verify(const RunConfig& c, bool& all_passed) {
    const Potential v = load_or_free(c);
    const long N = c.window < 0 ? 200 : c.window;
    if (N < 8) throw ValidationError("verify: --window must be at least 8");
    const std::string& suite = c.suite;
    if (suite != "all" && suite != "green" && suite != "evolve" && suite != "lap")
        throw ValidationError("verify: suite must be all, green, evolve or lap");
    std::vector<Check> checks;
    auto add = [&](std::vector<Check> more) { checks.insert(checks.end(), more.begin(), more.end()); };
    if (suite == "all") {
        add(verify_jost(v, c));
        add(verify_scattering(v));
    }
    if (suite == "all" || suite == "green") add(verify_green(v, N));
    if (suite == "all" || suite == "evolve") add(verify_evolve(v, c));
    if (suite == "all" || suite == "lap") add(verify_lap(v));

    Output o;
    o.table.header = {"check", "measured", "tolerance", "passed"};
    json arr = json::array();
    all_passed = true;
    for (const auto& ch : checks) {
        all_passed = all_passed && ch.passed;
        o.table.rows.push_back({ch.name, num(ch.measured), num(ch.tolerance), ch.passed ? "true" : "false"});
        arr.push_back({{"check", ch.name}, {"measured", ch.measured}, {"tolerance", ch.tolerance}, {"passed", ch.passed}});
    }
    o.doc = {{"suite", suite}, {"passed", all_passed}, {"checks", arr}};
    return o;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline void write_output(const RunConfig& c, const Output& o, std::ostream& out) {
    const std::string text = c.format == "json" ? o.doc.dump(2) + "\n" : to_csv(o.table);
    if (c.output_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(c.output_path);
    if (!f) throw ValidationError("cannot open output file '" + c.output_path + "'");
    f << text;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    RunConfig c;
    CLI::App app{"Scattering, resolvent and time-evolution kernels for matrix discrete Schrödinger operators"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--potential", c.potential_path, "Potential JSON file (default: V = 0, L = 1)");
    app.add_option("--output", c.output_path, "Output file (default: stdout)");
    app.add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", c.threads, "Worker threads (fallback: JACOBI_SCATTER_THREADS)");
    app.add_option("--tol", c.tol, "Cross-check tolerance for method comparisons");

    auto* jost = app.add_subcommand("jost", "Jost solutions on a site window");
    jost->add_option("--z-re", c.z_re)->required();
    jost->add_option("--z-im", c.z_im)->required();
    jost->add_option("--direction", c.direction)->check(CLI::IsMember({"plus", "minus"}));
    jost->add_option("--window", c.window_spec, "Site window a:b");
    jost->add_option("--method", c.jost_method)->check(CLI::IsMember({"volterra", "series"}));

    auto* scatter = app.add_subcommand("scatter", "Scattering matrices on a circle grid");
    scatter->add_option("--grid", c.grid);

    auto* green = app.add_subcommand("green", "Resolvent kernel off [-2, 2]");
    green->add_option("--energy-re", c.energy_re)->required();
    green->add_option("--energy-im", c.energy_im);
    green->add_option("--s", c.s);
    green->add_option("--r", c.r);

    auto* gb = app.add_subcommand("green-boundary", "Boundary values of the resolvent kernel on (-2, 2)");
    gb->add_option("--energy", c.energy)->required();
    gb->add_option("--side", c.side)->check(CLI::IsMember({"plus", "minus"}));
    gb->add_option("--s", c.s);
    gb->add_option("--r", c.r);

    auto* lap = app.add_subcommand("lap", "Weighted resolvent Hölder diagnostic");
    lap->add_option("--alpha", c.alpha);
    lap->add_option("--rho", c.rho);
    lap->add_option("--grid-file", c.grid_file, "JSON grid: {pairs:[[E,E0],...]} or {emin,emax,bases,offsets}");
    lap->add_option("--window", c.window, "Half-width N of the weighted window");
    lap->add_option("--side", c.side)->check(CLI::IsMember({"plus", "minus"}));

    auto* evolve = app.add_subcommand("evolve", "Kernel of exp(-itH) P_ac");
    evolve->add_option("--t", c.t)->required();
    evolve->add_option("--s", c.s);
    evolve->add_option("--r", c.r);
    evolve->add_option("--method", c.evolve_method)->check(CLI::IsMember({"kgrid", "fourier_bessel", "both"}));

    auto* decay = app.add_subcommand("decay", "Dispersive decay of sup-norms over time");
    decay->add_option("--tmin", c.tmin);
    decay->add_option("--tmax", c.tmax);
    decay->add_option("--samples", c.samples);
    decay->add_option("--window", c.window);

    auto* verify = app.add_subcommand("verify", "Run cross-checks against the truncated-lattice oracle");
    verify->add_option("--suite", c.suite)->check(CLI::IsMember({"all", "green", "evolve", "lap"}));
    verify->add_option("--window", c.window, "Oracle half-width N for the green suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    }
    c.subcommand = app.get_subcommands().front()->get_name();

    try {
        validate(c);
        set_thread_count(resolve_threads(c.threads));
        bool passed = true;
        Output o;
        if (c.subcommand == "jost") o = cmd_jost(c);
        else if (c.subcommand == "scatter") o = cmd_scatter(c);
        else if (c.subcommand == "green") o = cmd_green(c);
        else if (c.subcommand == "green-boundary") o = cmd_green_boundary(c);
        else if (c.subcommand == "lap") o = cmd_lap(c);
        else if (c.subcommand == "evolve") o = cmd_evolve(c);
        else if (c.subcommand == "decay") o = cmd_decay(c);
        else o = cmd_verify(c, passed);
        write_output(c, o, out);
        if (!passed) {
            err << "error: one or more cross-checks failed\n";
            return kCrossCheck;
        }
        return kOk;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const CrossCheckError& e) {
        err << "error: " << e.what() << '\n';
        return kCrossCheck;
    }
}

} // namespace jacobi_scatter::cli
