#pragma once

/**
 * @file cli.hpp
 * @brief Subcommand implementations and the argv dispatcher of the
 *        `multispec` tool.
 *
 * Exit codes: 0 when every check in the report passes, 1 when a check fails
 * (or a numeric routine gives up), 2 on usage errors.
 */

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "combinatorics.hpp"
#include "continuation.hpp"
#include "derivatives.hpp"
#include "errors.hpp"
#include "monodromy.hpp"
#include "powerlattice.hpp"
#include "rank.hpp"
#include "report.hpp"
#include "witness.hpp"

namespace multispec::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_check_failed = 1;
inline constexpr int exit_usage = 2;

// ---------------------------------------------------------------- parsing

inline std::string num(double x) {
    std::ostringstream o;
    o << std::setprecision(4) << x;
    return o.str();
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

inline std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
    std::vector<int> out;
    for (const auto& tok : split(s, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::logic_error&) {
            throw precondition_error(what + ": '" + tok + "' is not an integer");
        }
    }
    if (out.empty()) throw precondition_error(what + " must not be empty");
    return out;
}

/// "re,im;re,im;..." -> complex list.
inline std::vector<cplx> parse_complex_list(const std::string& s, const std::string& what) {
    std::vector<cplx> out;
    for (const auto& tok : split(s, ';')) {
        const auto parts = split(tok, ',');
        if (parts.empty() || parts.size() > 2) throw precondition_error(what + ": expected 're,im' items separated by ';'");
        try {
            const double re = std::stod(parts[0]);
            const double im = parts.size() == 2 ? std::stod(parts[1]) : 0.0;
            out.emplace_back(re, im);
        } catch (const std::logic_error&) {
            throw precondition_error(what + ": malformed complex value '" + tok + "'");
        }
    }
    return out;
}

inline RootPoint parse_point(int d, const std::string& s) {
    std::vector<RootCoord> coords;
    for (const auto& tok : split(s, ',')) coords.push_back(parse_root_coord(tok));
    return RootPoint::make(d, std::move(coords));
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw precondition_error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw precondition_error("'" + path + "' is not valid JSON: " + e.what());
    }
}

/// Periods matrix from a comma list: either rows*cols values or one value broadcast.
inline std::vector<std::vector<int>> period_matrix(const std::vector<int>& flat, std::size_t rows, std::size_t cols,
                                                   const RunConfig& cfg) {
    if (flat.size() != 1 && flat.size() != rows * cols)
        throw precondition_error("--periods needs 1 or " + std::to_string(rows * cols) + " values, got " +
                                 std::to_string(flat.size()));
    std::vector<std::vector<int>> out(rows, std::vector<int>(cols));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const int p = flat.size() == 1 ? flat[0] : flat[r * cols + c];
            if (p > cfg.max_period) throw precondition_error("period " + std::to_string(p) + " exceeds max_period");
            out[r][c] = p;
        }
    return out;
}

inline PolyMapDense polymap_from_json(const json& j) {
    const int n = j.at("n").get<int>(), d = j.at("d").get<int>();
    PolyMapDense F(n, d);
    const json terms = j.value("terms", json::array());
    for (const auto& t : terms) {
        const int coord = t.at("coord").get<int>();
        if (coord < 1 || coord > n) throw precondition_error("term coordinate must lie in [1, n]");
        F.add_term(coord - 1, t.at("exp").get<std::vector<int>>(), complex_from_json(t.at("coef")));
    }
    return F;
}

/// Loop file: {"family", "params", "path" | "circle", "marked", "eigendirections", "custom"}.
inline LoopSpec loop_from_json(const json& j) {
    try {
        LoopSpec spec;
        spec.family = parse_family(j.at("family").get<std::string>());
        const json params = j.value("params", json::object());
        for (const auto& [k, v] : params.items()) spec.params[k] = complex_from_json(v);
        if (j.contains("path")) {
            for (const auto& z : j.at("path")) spec.path.push_back(complex_from_json(z));
        } else if (j.contains("circle")) {
            const auto& c = j.at("circle");
            spec.path = circle_path(complex_from_json(c.at("center")), c.at("radius").get<double>(), c.at("steps").get<int>());
        } else {
            throw precondition_error("loop file needs a 'path' or a 'circle'");
        }
        for (const auto& m : j.at("marked")) spec.marked.push_back({cvec_from_json(m.at("seed")), m.value("period", 1)});
        spec.track_eigendirections = j.value("eigendirections", false);
        if (j.contains("custom")) {
            spec.custom_base = polymap_from_json(j.at("custom").at("base"));
            spec.custom_direction = polymap_from_json(j.at("custom").at("direction"));
        }
        return spec;
    } catch (const json::exception& e) {
        throw precondition_error(std::string("malformed loop file: ") + e.what());
    }
}

inline json permutation_json(const PermutationResult& r) {
    json pts = json::array();
    for (const auto& z : r.points) pts.push_back(to_json(z));
    json swaps = json::array();
    for (const auto& [label, swapped] : r.eigendirection_swaps) swaps.push_back({{"label", label}, {"swapped", swapped}});
    return {{"mapping", r.mapping},
            {"points", pts},
            {"successor", r.successor},
            {"commutes_with_dynamics", r.commutes_with_dynamics},
            {"cycle_structure", r.cycle_structure},
            {"eigendirection_swaps", swaps},
            {"min_parabolic_gap", r.min_parabolic_gap},
            {"min_eigen_gap", std::isfinite(r.min_eigen_gap) ? json(r.min_eigen_gap) : json(nullptr)},
            {"warnings", r.warnings}};
}

inline bool is_bijection(const std::vector<int>& m) {
    std::vector<int> s = m;
    std::sort(s.begin(), s.end());
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] != static_cast<int>(i)) return false;
    return true;
}

// ---------------------------------------------------------------- commands

inline void run_dims(Report& rep, int d, int n, bool projective) {
    const auto s = space_dims(d, n);
    const auto idx = enumerate_admissible(d, n, projective ? Setting::projective : Setting::affine);
    json adm = json::array();
    for (const auto& I : idx) adm.push_back(to_json(I));
    rep.results = {{"d", d},
                   {"n", n},
                   {"setting", projective ? "projective" : "affine"},
                   {"N_dn", s.N_dn},
                   {"moduli_dim", projective ? s.proj_moduli_dim : s.affine_moduli_dim},
                   {"affine_moduli_dim", s.affine_moduli_dim},
                   {"proj_moduli_dim", s.proj_moduli_dim},
                   {"coeff_count", s.coeff_count},
                   {"admissible", adm}};
    rep.check("admissible_count", static_cast<std::int64_t>(idx.size()) == s.N_dn,
              std::to_string(idx.size()) + " indices vs N_dn = " + std::to_string(s.N_dn));
}

inline void run_lattice(Report& rep, const RunConfig& cfg, int d, int p, int n, int samples) {
    detail::require(p <= cfg.max_period, "period exceeds max_period");
    const u64 dp = checked_pow(static_cast<u64>(d), p, cfg.max_dp);
    const auto fix = fix_set(d, p);
    const auto per = per_set(d, p);
    json by_divisor = json::object();
    u64 partition = 0;
    for (int q = 1; q <= p; ++q)
        if (p % q == 0) {
            const u64 c = per_set(d, q).size();
            by_divisor[std::to_string(q)] = c;
            partition += c;
        }
    const u64 bound = dp - checked_pow(static_cast<u64>(d), p / 2);
    json orbits = json::array();
    if (samples > 0 && n >= 1) {
        const auto cands = detail::candidate_orbits(d, n, p);
        for (std::size_t i = 0; i < cands.size() && static_cast<int>(i) < samples; ++i) {
            json orb = json::array();
            for (const auto& pt : orbit_of(cands[i])) orb.push_back(to_json(pt));
            orbits.push_back(orb);
        }
        rep.results["candidate_orbit_count"] = cands.size();
    }
    rep.results["d"] = d;
    rep.results["p"] = p;
    rep.results["n"] = n;
    rep.results["fix_count"] = fix.size();
    rep.results["per_count"] = per.size();
    rep.results["per_count_by_divisor"] = by_divisor;
    rep.results["partition_sum"] = partition;
    rep.results["per_lower_bound"] = p >= 2 ? json(bound) : json(nullptr);
    rep.results["sample_orbits"] = orbits;
    rep.check("fix_count", fix.size() == dp - 1, std::to_string(fix.size()) + " vs d^p - 1 = " + std::to_string(dp - 1));
    rep.check("partition_identity", partition == dp, std::to_string(partition) + " vs d^p = " + std::to_string(dp));
    if (p >= 2) rep.check("per_lower_bound", per.size() >= bound, std::to_string(per.size()) + " >= " + std::to_string(bound));
}

inline void run_deriv(Report& rep, const RunConfig& cfg, const DerivativeQuery& q, bool fd_check, double h) {
    checked_pow(static_cast<u64>(q.d), q.p, cfg.max_dp);
    const cplx value = partial_rho(q);
    rep.results["value"] = to_json(value);
    rep.results["abs"] = std::abs(value);
    if (is_admissible(q.I, q.d)) {
        const auto Q = q_poly(q.d, q.p, q.k, q.I, q.m);
        const u64 M = checked_pow(static_cast<u64>(q.d), q.p) - 1;
        const cplx factored = detail::q_factor(q.d, q.p, q.k, q.w0) == cplx{}
                                  ? cplx{}
                                  : Q.eval_exact(q.w0, M) / detail::q_factor(q.d, q.p, q.k, q.w0);
        rep.results["q_poly"] = {{"scale", Q.scale}, {"terms", Q.terms.size()}, {"degrees", Q.degrees()}, {"text", Q.str()}};
        rep.check("q_factorization", std::abs(factored - value) <= 1e-10 * (1.0 + std::abs(value)),
                  "|w_k^{-d^{p-1}} Q(w0) - value| = " + num(std::abs(factored - value)));
        const bool table = !Q.is_zero() && ((q.m == q.k && q.p >= 2) ||
                                            (q.I.setting == Setting::projective && q.m == 0 && q.p >= 3));
        if (table) {
            const auto expect = q_degree_table(q.d, q.p, q.k, q.I, q.m);
            rep.results["expected_degrees"] = expect;
            const auto got = Q.degrees();
            bool ok = true;
            for (std::size_t j = 0; j < got.size(); ++j) {
                const bool bound_only = q.m == 0 && static_cast<int>(j) == q.k - 1 && !(q.d == 2 && q.I.affine_part()[j] == 1);
                ok = ok && (bound_only ? got[j] <= expect[j] : got[j] == expect[j]);
            }
            rep.check("q_degrees", ok, "per-variable degrees against the closed-form table");
        }
    } else {
        rep.results["q_poly"] = nullptr;
    }
    if (fd_check) {
        const auto F0 = PolyMapDense::power_map(q.n, q.d);
        const cplx fd = fd_partial_rho_richardson(q, F0, h, cfg.tol);
        const double delta = std::abs(fd - value);
        rep.results["fd"] = {{"value", to_json(fd)}, {"delta", delta}, {"h", h}};
        rep.check("fd_agreement", delta <= 1e-6 * (1.0 + std::abs(value)),
                  "|fd - closed form| = " + num(delta) + " (tolerance 1e-6 relative)");
    }
}

inline json witness_json(const WitnessSet& ws) {
    json pts = json::array();
    for (const auto& row : ws.points) {
        json r = json::array();
        for (const auto& w : row) r.push_back(to_json(w));
        pts.push_back(r);
    }
    json blocks = json::array();
    for (const auto& b : ws.blocks)
        blocks.push_back({{"det", to_json(b.det)}, {"relative_det", b.relative_det}, {"smin_over_smax", b.smin_over_smax},
                          {"rows", b.entries.rows()}});
    json cols = json::array();
    for (const auto& I : ws.columns) cols.push_back(to_json(I));
    json out = {{"setting", to_string(ws.setting)}, {"points", pts},     {"periods", ws.periods}, {"blocks", blocks},
                {"columns", cols},                 {"valid", ws.valid}, {"warnings", ws.warnings},
                {"row_scaling", "rows multiplied by the unit w_k^(d^(p-1))"}};
    if (!ws.k_choices.empty()) out["k_choices"] = ws.k_choices;
    return out;
}

inline void run_witness(Report& rep, const RunConfig& cfg, int d, int n, const std::vector<int>& flat, bool projective) {
    const auto N = static_cast<std::size_t>(space_dims(d, n).N_dn);
    const auto rows = static_cast<std::size_t>(projective ? n + 1 : n);
    const auto periods = period_matrix(flat, rows, N, cfg);
    for (const auto& r : periods)
        for (int p : r) checked_pow(static_cast<u64>(d), p, cfg.max_dp);
    const auto ws = projective ? select_witnesses_projective(d, n, periods, cfg.tol) : select_witnesses(d, n, periods, cfg.tol);
    const auto v = verify_witnesses(ws, cfg.tol);
    rep.results = witness_json(ws);
    rep.results["verification"] = {{"ok", v.ok}, {"max_entry_error", v.max_entry_error},
                                   {"relative_dets", v.relative_dets}, {"failures", v.failures}};
    rep.check("blocks_nonsingular", ws.valid, "every relative determinant above tau_det");
    rep.check("independent_verification", v.ok, v.failures.empty() ? "all entries recomputed" : v.failures.front());
}

inline std::vector<cplx> default_c(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cplx> c;
    for (int j = 0; j < n; ++j) c.emplace_back(0.01 * g(rng), 0.01 * g(rng));
    return c;
}

inline void run_verify_rank(Report& rep, const RunConfig& cfg, int d, int n, std::vector<cplx> c,
                            const std::vector<int>& flat, double h) {
    if (c.empty()) c = default_c(n, cfg.seed);
    detail::require(static_cast<int>(c.size()) == n, "--c needs n complex values");
    const auto N = static_cast<std::size_t>(space_dims(d, n).N_dn);
    const auto periods = period_matrix(flat, static_cast<std::size_t>(n), N, cfg);
    const auto ws = select_witnesses(d, n, periods, cfg.tol);
    const auto r = rank_certificate(PolyMapDense::unicritical(d, c), ws, h, cfg.tol);
    rep.results = {{"c", to_json(c)},
                   {"witnesses", witness_json(ws)},
                   {"jacobian", to_json(r.jacobian)},
                   {"singular_values", r.singular_values},
                   {"rank_at_tol", r.rank_at_tol},
                   {"certified_full_rank", r.certified_full_rank},
                   {"smin_over_smax", r.smin_over_smax},
                   {"off_block_max", r.off_block_max},
                   {"max_closed_form_deviation", r.max_closed_form_deviation},
                   {"min_eigen_gap", r.min_eigen_gap},
                   {"min_parabolic_gap", r.min_parabolic_gap},
                   {"h", r.h}};
    const double scale = r.singular_values.empty() ? 1.0 : r.singular_values.front();
    rep.check("certified_full_rank", r.certified_full_rank,
              "smin/smax = " + num(r.smin_over_smax) + " vs tau_rank");
    rep.check("block_diagonal", r.off_block_max <= 1e-8 * scale,
              "largest off-block entry " + num(r.off_block_max));
}

inline void run_track(Report& rep, const RunConfig& cfg, LoopSpec spec) {
    detail::require(spec.path.size() >= 1, "track needs a path");
    const auto fam = make_family(spec);
    const auto F = fam(spec.path.front());
    json tracks = json::array();
    bool residual_ok = true;
    for (const auto& m : spec.marked) {
        const auto start = solve_cycle(F, m.period, m.seed, cfg.tol);
        TrackOptions opt;
        opt.follow_eigenvalues = spec.track_eigendirections;
        const auto res = track_path_detailed(fam, std::span<const cplx>(spec.path), start, cfg.tol, opt);
        residual_ok = residual_ok && res.end.residual <= cfg.tol.newton * (1.0 + res.end.base().norm());
        json pts = json::array();
        for (const auto& z : res.end.points) pts.push_back(to_json(z));
        tracks.push_back({{"start", to_json(start.base())},
                          {"end_points", pts},
                          {"period", res.end.period},
                          {"exact_period", res.end.exact_period},
                          {"eigenvalues", to_json(res.end.eigenvalues)},
                          {"branches", to_json(res.branches)},
                          {"residual", res.end.residual},
                          {"steps", res.steps},
                          {"rejections", res.rejections},
                          {"min_parabolic_gap", res.min_parabolic_gap}});
    }
    rep.results = {{"family", to_string(spec.family)}, {"tracks", tracks}};
    rep.check("endpoint_residuals", residual_ok, "every endpoint residual within tau_newton");
}

inline void run_monodromy(Report& rep, const RunConfig& cfg, const LoopSpec& spec) {
    const auto r = run_loop(spec, cfg.tol);
    rep.results = permutation_json(r);
    rep.results["family"] = to_string(spec.family);
    rep.check("bijection", is_bijection(r.mapping), "endpoint labels form a permutation");
    rep.check("commutes_with_dynamics", r.commutes_with_dynamics, "mapping conjugates the successor map to itself");
}

inline void run_swap_demo(Report& rep, const RunConfig& cfg, cplx theta, double alpha, double radius, int steps,
                          cplx center, bool escalate) {
    const bool encircles = std::abs(center) < radius;
    json attempts = json::array();
    PermutationResult r;
    for (int a = 0;; ++a) {
        r = eigendirection_swap_loop(theta, alpha, radius, steps, center, cfg.tol);
        const bool swapped = !r.eigendirection_swaps.empty() && r.eigendirection_swaps.front().second;
        attempts.push_back({{"alpha", alpha}, {"eps_radius", radius}, {"swapped", swapped}});
        if (!escalate || !encircles || swapped || a == 8) break;
        if (a % 2 == 0) alpha *= 2.0;
        else radius *= 0.5;
    }
    const bool swapped = !r.eigendirection_swaps.empty() && r.eigendirection_swaps.front().second;
    rep.results = permutation_json(r);
    rep.results["c"] = to_json(theta / 2.0 - theta * theta / 4.0);
    rep.results["encircles_zero"] = encircles;
    rep.results["swapped"] = swapped;
    rep.results["attempts"] = attempts;
    rep.check("commutes_with_dynamics", r.commutes_with_dynamics, "");
    rep.check("swap_matches_winding", swapped == encircles,
              std::string("loop ") + (encircles ? "encircles" : "does not encircle") + " eps = 0");
}

inline void run_certify(Report& rep, const json& j) {
    std::vector<std::vector<cplx>> polys;
    std::vector<cplx> alphas;
    cplx b;
    double eps = 0.1, expansion = 1.0;
    int samples = 512;
    bool escalate = false;
    try {
        for (const auto& p : j.at("polys")) {
            std::vector<cplx> a;
            for (const auto& c : p) a.push_back(complex_from_json(c));
            polys.push_back(a);
        }
        for (const auto& a : j.at("alphas")) alphas.push_back(complex_from_json(a));
        b = complex_from_json(j.at("b"));
        eps = j.value("eps", 0.1);
        expansion = j.value("expansion", 1.0);
        samples = j.value("samples", 512);
        escalate = j.value("escalate", false);
    } catch (const json::exception& e) {
        throw precondition_error(std::string("malformed chain spec: ") + e.what());
    }
    detail::require(!polys.empty(), "chain needs at least one polynomial");
    const int d = static_cast<int>(polys.front().size());
    double m = std::abs(alphas.front()), M = m;
    for (const auto& a : alphas) {
        m = std::min(m, std::abs(a));
        M = std::max(M, std::abs(a));
    }
    const double A = hyperbolicity_bound(d, eps, m, M);
    json attempts = json::array();
    ChainCertificate cert;
    for (int a = 0;; ++a) {
        cert = disc_chain_certificate(polys, alphas, b, eps, expansion, samples);
        attempts.push_back({{"b", to_json(b)}, {"certified", cert.certified}});
        if (!escalate || cert.certified || a == 8) break;
        b *= 2.0;
    }
    rep.results = {{"A", A},
                   {"b", to_json(b)},
                   {"abs_b", std::abs(b)},
                   {"eps", eps},
                   {"radii", cert.radii},
                   {"margins", cert.margins},
                   {"relative_margins", cert.relative_margins},
                   {"min_derivative", cert.min_derivative},
                   {"expansion", expansion},
                   {"samples", cert.samples},
                   {"certified", cert.certified},
                   {"attempts", attempts}};
    rep.check("disc_inclusion", std::all_of(cert.margins.begin(), cert.margins.end(), [](double x) { return x > 0.0; }),
              "every preimage disc lies inside the previous radius");
    rep.check("expansion", cert.expansion_ok, "min |P'| on preimages = " + num(cert.min_derivative));
}

struct Range {
    int lo = 0, hi = 0;
};

/// "d=2..5,n=1..4,p=4..8" (a single value is allowed per variable).
inline std::map<char, Range> parse_grid(const std::string& s) {
    std::map<char, Range> out;
    for (const auto& part : split(s, ',')) {
        if (part.size() < 3 || part[1] != '=' || std::string("dnp").find(part[0]) == std::string::npos)
            throw precondition_error("grid item '" + part + "' must look like d=2..5");
        const auto body = part.substr(2);
        const auto dots = body.find("..");
        try {
            Range r;
            r.lo = std::stoi(body.substr(0, dots));
            r.hi = dots == std::string::npos ? r.lo : std::stoi(body.substr(dots + 2));
            if (r.hi < r.lo) throw precondition_error("empty range in grid item '" + part + "'");
            out[part[0]] = r;
        } catch (const std::logic_error&) {
            throw precondition_error("grid item '" + part + "' has malformed bounds");
        }
    }
    for (char c : {'d', 'n', 'p'})
        if (!out.count(c)) throw precondition_error(std::string("grid is missing '") + c + "'");
    return out;
}

inline void run_gates(Report& rep, const std::string& grid) {
    const auto g = parse_grid(grid);
    detail::require(g.at('d').lo >= 2 && g.at('n').lo >= 1 && g.at('p').lo >= 1, "grid needs d >= 2, n >= 1, p >= 1");
    json cells = json::array();
    int affine_claimed = 0, affine_ok = 0, weak_claimed = 0, weak_ok = 0;
    std::string first_fail;
    for (int d = g.at('d').lo; d <= g.at('d').hi; ++d)
        for (int n = g.at('n').lo; n <= g.at('n').hi; ++n)
            for (int p = g.at('p').lo; p <= g.at('p').hi; ++p) {
                json cell = {{"d", d}, {"n", n}, {"p", p}};
                for (auto v : {GateVariant::affine, GateVariant::projective_weak}) {
                    const auto r = counting_gate(d, n, p, v);
                    cell[to_string(v)] = {{"lhs", r.lhs.str()}, {"rhs", r.rhs.str()}, {"holds", r.holds},
                                          {"hypothesis_met", r.hypothesis_met}};
                    if (!r.hypothesis_met) continue;
                    auto& claimed = v == GateVariant::affine ? affine_claimed : weak_claimed;
                    auto& ok = v == GateVariant::affine ? affine_ok : weak_ok;
                    ++claimed;
                    if (r.holds) ++ok;
                    else if (first_fail.empty())
                        first_fail = std::string(to_string(v)) + " at (" + std::to_string(d) + "," + std::to_string(n) +
                                     "," + std::to_string(p) + ")";
                }
                cells.push_back(cell);
            }
    rep.results = {{"grid", grid}, {"cells", cells}};
    rep.check("affine_inequality", affine_ok == affine_claimed,
              std::to_string(affine_ok) + "/" + std::to_string(affine_claimed) + " cells where n >= 2, p >= 4" +
                  (first_fail.empty() ? "" : "; first failure " + first_fail));
    rep.check("projective_weak_inequality", weak_ok == weak_claimed,
              std::to_string(weak_ok) + "/" + std::to_string(weak_claimed) + " cells where p >= 4");
}

inline void run_spectrum(Report& rep, const RunConfig& cfg, int d, int n, int p, std::vector<cplx> c) {
    detail::require(p >= 1 && p <= cfg.max_period, "period out of range");
    if (c.empty()) c.assign(static_cast<std::size_t>(n), cplx{0.0, 0.0});
    detail::require(static_cast<int>(c.size()) == n, "--c needs n complex values");
    const u64 dp = checked_pow(static_cast<u64>(d), p, cfg.max_dp);
    // all points of exact period p of F0: coordinates in {0} and Fix_p
    std::vector<RootCoord> coordset{RootCoord::zero()};
    for (const auto& w : fix_set(d, p)) coordset.push_back(w);
    detail::require(std::pow(static_cast<double>(dp), n) <= 2e5, "spectrum enumeration too large (d^(pn) > 2e5)");
    std::set<RootPoint> keys;
    std::vector<RootCoord> cur(static_cast<std::size_t>(n), RootCoord::zero());
    auto rec = [&](auto&& self, int j) -> void {
        if (j == n) {
            const auto pt = RootPoint::make(d, cur);
            if (pt.period == p) keys.insert(orbit_key(pt));
            return;
        }
        for (const auto& w : coordset) {
            cur[static_cast<std::size_t>(j)] = w;
            self(self, j + 1);
        }
    };
    rec(rec, 0);
    const auto F0 = PolyMapDense::power_map(n, d);
    const auto Fc = PolyMapDense::unicritical(d, c);
    std::vector<cplx> seg;
    for (int i = 0; i <= 16; ++i) seg.emplace_back(i / 16.0, 0.0);
    auto along = [&](cplx s) { return F0.lerp(Fc, s); };
    std::vector<RootPoint> reps(keys.begin(), keys.end());
    std::vector<CycleTrack> cycles(reps.size());
    parallel_for(reps.size(), [&](std::size_t i) {
        const auto start = solve_cycle(F0, p, to_cvec(to_complex(reps[i])), cfg.tol);
        cycles[i] = track_path(along, std::span<const cplx>(seg), start, cfg.tol);
    });
    const auto spec = multiplier_spectrum(Fc, p, cycles);
    json entries = json::array();
    for (const auto& e : spec) entries.push_back(to_json(e));
    rep.results = {{"d", d}, {"n", n}, {"p", p}, {"c", to_json(c)}, {"cycle_count", cycles.size()}, {"symmetric_functions", entries}};
    bool exact = true;
    for (const auto& cy : cycles) exact = exact && cy.exact_period == p;
    rep.check("exact_periods", exact, "every continued cycle keeps exact period p");
}

// ---------------------------------------------------------------- dispatch

/// Parse argv, run one subcommand and write its report. Returns the exit code.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Multiplier-spectrum independence and monodromy experiments near the power map", "multispec"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, output;
    app.add_option("--config", config_path, "JSON file overriding the default configuration");
    app.add_option("--output,-o", output, "write the report here instead of stdout");

    int d = 2, n = 2, p = 4, k = 1, m = 1, samples = 5, steps = 720;
    bool projective = false, fd_check = false, escalate = false, swap_demo = false;
    std::string index, point, periods = "4", cstr, loop_path, family, chain_path, grid = "d=2..5,n=1..4,p=4..8";
    double h = -1.0, alpha = 10.0, radius = 1e-3;
    std::string theta = "0.5", center = "0";

    auto* dims = app.add_subcommand("dims", "dimension formulas and admissible indices");
    dims->add_option("--d", d)->required();
    dims->add_option("--n", n)->required();
    dims->add_flag("--projective", projective);

    auto* lattice = app.add_subcommand("lattice", "periodic points of the power map");
    lattice->add_option("--d", d)->required();
    lattice->add_option("--p", p)->required();
    lattice->add_option("--n", n, "ambient dimension for sample orbits");
    lattice->add_option("--samples", samples, "number of sample orbits");

    auto* deriv = app.add_subcommand("deriv", "closed-form derivative of a diagonal Jacobian entry");
    for (auto* o : {deriv->add_option("--d", d), deriv->add_option("--n", n), deriv->add_option("--p", p),
                    deriv->add_option("--k", k), deriv->add_option("--m", m),
                    deriv->add_option("--index", index, "comma list i1,i2,..."),
                    deriv->add_option("--point", point, "comma list a1/m1,a2/m2,...")})
        o->required();
    deriv->add_flag("--projective", projective);
    deriv->add_flag("--fd-check", fd_check);
    deriv->add_option("--fd-step", h, "finite-difference step");

    auto* witness = app.add_subcommand("witness", "select witness orbits with nonsingular derivative blocks");
    witness->add_option("--d", d)->required();
    witness->add_option("--n", n)->required();
    witness->add_option("--periods", periods, "comma list of periods (one value is broadcast)");
    witness->add_flag("--projective", projective);

    auto* vrank = app.add_subcommand("verify-rank", "finite-difference rank certificate at F_c");
    vrank->add_option("--d", d)->required();
    vrank->add_option("--n", n)->required();
    vrank->add_option("--c", cstr, "constants 're,im;re,im;...' (default: seeded, |c_j| ~ 1e-2)");
    vrank->add_option("--periods", periods);
    vrank->add_option("--fd-step", h, "finite-difference step");

    auto* track = app.add_subcommand("track", "continue marked cycles along a parameter path");
    track->add_option("--loop", loop_path)->required();
    track->add_option("--family", family, "override the family named in the loop file");

    auto* mono = app.add_subcommand("monodromy", "permutation induced by a closed loop");
    mono->add_option("--loop", loop_path);
    mono->add_flag("--swap-demo", swap_demo, "run the eigendirection swap loop instead of a loop file");
    mono->add_option("--theta", theta, "multiplier of f at 0, 're,im'");
    mono->add_option("--alpha", alpha);
    mono->add_option("--eps-radius", radius);
    mono->add_option("--steps", steps);
    mono->add_option("--center", center, "center of the eps loop, 're,im'");
    mono->add_flag("--escalate", escalate, "double alpha / halve eps up to 8 times if no swap is seen");

    auto* certify = app.add_subcommand("certify-hyperbolic", "disc chain certificate for z -> P_i(z) - b alpha_i");
    certify->add_option("--spec", chain_path)->required();

    auto* gates = app.add_subcommand("gates", "counting inequalities over a grid");
    gates->add_option("--grid", grid, "e.g. d=2..5,n=1..4,p=4..8");

    auto* spectrum = app.add_subcommand("spectrum", "symmetric functions of multipliers of all period-p cycles");
    spectrum->add_option("--d", d)->required();
    spectrum->add_option("--n", n)->required();
    spectrum->add_option("--p", p)->required();
    spectrum->add_option("--c", cstr);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << "run 'multispec --help' for the list of subcommands and flags\n";
        return exit_usage;
    }

    Report rep;
    RunConfig cfg;
    try {
        if (!config_path.empty()) apply_config(cfg, read_json_file(config_path));
        if (!output.empty()) cfg.output = output;
        if (h <= 0.0) h = cfg.tol.fd_step;
        auto* sub = app.get_subcommands().front();
        rep.command = sub->get_name();
        for (const auto* opt : sub->get_options())
            if (opt->count() > 0 && opt->get_name() != "--help") {
                const auto res = opt->results();
                rep.arguments[opt->get_name()] = res.size() == 1 ? json(res.front()) : json(res);
            }
        rep.config = to_json(cfg);
        try {
            if (sub == dims) run_dims(rep, d, n, projective);
            else if (sub == lattice) run_lattice(rep, cfg, d, p, n, samples);
            else if (sub == deriv) {
                const auto entries = parse_int_list(index, "--index");
                DerivativeQuery q{d, n, p, k, m, MultiIndex{entries, projective ? Setting::projective : Setting::affine},
                                  parse_point(d, point)};
                run_deriv(rep, cfg, q, fd_check, h);
            } else if (sub == witness) run_witness(rep, cfg, d, n, parse_int_list(periods, "--periods"), projective);
            else if (sub == vrank)
                run_verify_rank(rep, cfg, d, n, cstr.empty() ? std::vector<cplx>{} : parse_complex_list(cstr, "--c"),
                                parse_int_list(periods, "--periods"), h);
            else if (sub == track) {
                auto spec = loop_from_json(read_json_file(loop_path));
                if (!family.empty()) spec.family = parse_family(family);
                run_track(rep, cfg, std::move(spec));
            } else if (sub == mono) {
                if (swap_demo) {
                    const auto th = parse_complex_list(theta, "--theta"), ce = parse_complex_list(center, "--center");
                    detail::require(th.size() == 1 && ce.size() == 1, "--theta and --center take one complex value");
                    run_swap_demo(rep, cfg, th[0], alpha, radius, steps, ce[0], escalate);
                } else {
                    detail::require(!loop_path.empty(), "monodromy needs --loop FILE or --swap-demo");
                    run_monodromy(rep, cfg, loop_from_json(read_json_file(loop_path)));
                }
            } else if (sub == certify) run_certify(rep, read_json_file(chain_path));
            else if (sub == gates) run_gates(rep, grid);
            else if (sub == spectrum)
                run_spectrum(rep, cfg, d, n, p, cstr.empty() ? std::vector<cplx>{} : parse_complex_list(cstr, "--c"));
        } catch (const numeric_error& e) {
            rep.check("execution", false, e.what());
        }
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const json::exception& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    }

    const std::string text = to_json(rep).dump(2) + "\n";
    if (cfg.output.empty()) {
        out << text;
    } else {
        std::ofstream f(cfg.output);
        if (!f) {
            err << "usage error: cannot write '" << cfg.output << "'\n";
            return exit_usage;
        }
        f << text;
    }
    return rep.exit_code();
}

} // namespace multispec::cli
