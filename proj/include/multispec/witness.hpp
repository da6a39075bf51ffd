#pragma once

/**
 * @file witness.hpp
 * @brief Greedy selection of periodic orbits of the power map whose
 *        derivative matrices are nonsingular, plus the counting gates that
 *        guarantee such orbits exist.
 *
 * Candidates for a point of period p are the orbits of
 * S = Per_p x Fix_p^{n-1}. Rows are added one at a time; each new row is the
 * candidate maximizing |det| of the next leading minor (cofactor expansion
 * along the new row). Rows are stored in Q-scaled form, i.e. multiplied by
 * the unit w_k^{d^{p-1}}, which leaves |det| unchanged.
 */

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "combinatorics.hpp"
#include "derivatives.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "powerlattice.hpp"
#include "tolerances.hpp"

namespace multispec {

struct JacobianBlock {
    CMat entries;             ///< Q-scaled derivative values, rows = selected points
    cplx det{0.0, 0.0};
    double relative_det = 0.0;  ///< |det| / prod(row norms)
    double smin_over_smax = 0.0;
};

/// Selected points (rows k, columns j) and their certificate blocks. In the
/// projective setting row 0 holds the homogenizing-direction witnesses, the
/// single block is the full (n+1)N x (n+1)N matrix and k_choices is filled.
struct WitnessSet {
    int d = 2;
    int n = 2;
    Setting setting = Setting::affine;
    std::vector<std::vector<int>> periods;
    std::vector<std::vector<RootPoint>> points;
    std::vector<JacobianBlock> blocks;
    std::vector<int> k_choices;
    std::vector<MultiIndex> columns;  ///< admissible indices in column order
    std::vector<std::string> warnings;
    bool valid = false;
};

namespace detail {

inline void check_periods(const std::vector<std::vector<int>>& periods, std::size_t rows, std::size_t cols) {
    require(periods.size() == rows, "periods must have " + std::to_string(rows) + " rows");
    for (const auto& r : periods) {
        require(r.size() == cols, "each periods row must have " + std::to_string(cols) + " entries");
        for (int p : r) require(p >= 2, "every period must be >= 2 (got " + std::to_string(p) + ")");
    }
}

/// Least representatives of the F0-orbits of Per_p x Fix_p^{n-1}, sorted.
inline std::vector<RootPoint> candidate_orbits(int d, int n, int p) {
    const auto per = per_set(d, p);
    const auto fix = fix_set(d, p);
    std::set<RootPoint> keys;
    std::vector<RootCoord> coords(static_cast<std::size_t>(n), RootCoord::zero());
    auto rec = [&](auto&& self, int j) -> void {
        if (j == n) {
            const RootPoint pt = RootPoint::make(d, coords);
            if (pt.period == p) keys.insert(orbit_key(pt));
            return;
        }
        for (const auto& c : (j == 0 ? per : fix)) {
            coords[static_cast<std::size_t>(j)] = c;
            self(self, j + 1);
        }
    };
    rec(rec, 0);
    return {keys.begin(), keys.end()};
}

/// w_k^{d^{p-1}} as an exact unit.
inline cplx q_factor(int d, int p, int k, const RootPoint& w) {
    const u64 M = checked_pow(static_cast<u64>(d), p) - 1;
    const u64 r = w.coords[static_cast<std::size_t>(k - 1)].residue_mod(M);
    return unit_root(mulmod(r, checked_pow(static_cast<u64>(d), p - 1), M), M);
}

/// Signed cofactors C_c of the prospective row r over the leading r+1
/// columns, so that det = sum_c row[c] * C_c.
inline std::vector<cplx> leading_cofactors(const CMat& prior, Eigen::Index r) {
    std::vector<cplx> C(static_cast<std::size_t>(r + 1));
    if (r == 0) {
        C[0] = 1.0;
        return C;
    }
    for (Eigen::Index c = 0; c <= r; ++c) {
        CMat minor(r, r);
        for (Eigen::Index col = 0, dst = 0; col <= r; ++col) {
            if (col == c) continue;
            minor.col(dst++) = prior.block(0, col, r, 1);
        }
        const cplx det = minor.fullPivLu().determinant();
        C[static_cast<std::size_t>(c)] = ((r + c) % 2 == 0 ? 1.0 : -1.0) * det;
    }
    return C;
}

inline void finish_block(JacobianBlock& b, double tau_det) {
    b.det = b.entries.fullPivLu().determinant();
    double prod = 1.0;
    for (Eigen::Index r = 0; r < b.entries.rows(); ++r) prod *= b.entries.row(r).norm();
    b.relative_det = prod > 0.0 ? std::abs(b.det) / prod : 0.0;
    Eigen::JacobiSVD<CMat> svd(b.entries);
    const auto& s = svd.singularValues();
    b.smin_over_smax = s[0] > 0.0 ? s[s.size() - 1] / s[0] : 0.0;
    (void)tau_det;
}

struct Pick {
    RootPoint point;
    int k = 0;
    Eigen::VectorXcd row;
    double score = -1.0;
};

/// Argmax of |det| over the scored candidates; earlier candidates win near-ties.
inline std::optional<std::size_t> best_index(const std::vector<double>& scores) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (!best || scores[i] > scores[*best] * (1.0 + 1e-12)) best = i;
    return best;
}

} // namespace detail

/// Q-scaled row of affine derivative values for block k at point w (period p).
inline Eigen::VectorXcd witness_row_affine(int d, int p, int k, const RootPoint& w, const std::vector<MultiIndex>& cols) {
    const int n = static_cast<int>(w.dim());
    Eigen::VectorXcd row(static_cast<Eigen::Index>(cols.size()));
    const cplx qf = detail::q_factor(d, p, k, w);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const DerivativeQuery q{d, n, p, k, k, cols[c], w};
        row[static_cast<Eigen::Index>(c)] = qf * partial_rho_affine(q);
    }
    return row;
}

/// Q-scaled row of rho_k at w over all (n+1)N projective columns (m = 0 block first).
inline Eigen::VectorXcd witness_row_projective(int d, int p, int k, const RootPoint& w,
                                               const std::vector<MultiIndex>& cols) {
    const int n = static_cast<int>(w.dim());
    const auto N = static_cast<Eigen::Index>(cols.size());
    Eigen::VectorXcd row = Eigen::VectorXcd::Zero((n + 1) * N);
    const cplx qf = detail::q_factor(d, p, k, w);
    for (Eigen::Index c = 0; c < N; ++c) {
        const auto& I = cols[static_cast<std::size_t>(c)];
        row[c] = qf * partial_rho_projective({d, n, p, k, 0, I, w});
        row[k * N + c] = qf * partial_rho_projective({d, n, p, k, k, I, w});
    }
    return row;
}

/// Affine witness selection. periods is n x N (rows k = 1..n).
inline WitnessSet select_witnesses(int d, int n, const std::vector<std::vector<int>>& periods,
                                   const Tolerances& tol = {}) {
    const auto dims = space_dims(d, n);
    const auto N = static_cast<std::size_t>(dims.N_dn);
    detail::check_periods(periods, static_cast<std::size_t>(n), N);
    WitnessSet ws;
    ws.d = d;
    ws.n = n;
    ws.setting = Setting::affine;
    ws.periods = periods;
    ws.columns = enumerate_admissible(d, n, Setting::affine);
    for (const auto& r : periods)
        for (int p : r)
            if (p < 4) {
                ws.warnings.push_back("period " + std::to_string(p) + " < 4: existence is not guaranteed");
                break;
            }

    std::map<int, std::vector<RootPoint>> pool;
    std::set<RootPoint> used;
    ws.points.assign(static_cast<std::size_t>(n), {});
    for (int k = 1; k <= n; ++k) {
        JacobianBlock block;
        block.entries = CMat::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
        for (std::size_t j = 0; j < N; ++j) {
            const int p = periods[static_cast<std::size_t>(k - 1)][j];
            if (!pool.count(p)) pool[p] = detail::candidate_orbits(d, n, p);
            const auto& cands = pool[p];
            const auto r = static_cast<Eigen::Index>(j);
            const auto C = detail::leading_cofactors(block.entries, r);
            std::vector<double> scores(cands.size(), -1.0);
            std::vector<Eigen::VectorXcd> rows(cands.size());
            parallel_for(cands.size(), [&](std::size_t i) {
                if (used.count(cands[i])) return;
                rows[i] = witness_row_affine(d, p, k, cands[i], ws.columns);
                cplx det{0.0, 0.0};
                for (Eigen::Index c = 0; c <= r; ++c) det += rows[i][c] * C[static_cast<std::size_t>(c)];
                scores[i] = std::abs(det);
            });
            const auto best = detail::best_index(scores);
            if (!best || scores[*best] <= 0.0 || used.count(cands[*best]))
                throw numeric_error("witness search exhausted at (k=" + std::to_string(k) + ", j=" +
                                    std::to_string(j + 1) + ", p=" + std::to_string(p) + ")");
            block.entries.row(r) = rows[*best].transpose();
            // the leading minor must stay clearly nonsingular
            const CMat lead = block.entries.topLeftCorner(r + 1, r + 1);
            double prod = 1.0;
            for (Eigen::Index q = 0; q <= r; ++q) prod *= lead.row(q).norm();
            if (std::abs(lead.fullPivLu().determinant()) <= tol.det * prod)
                throw numeric_error("no candidate keeps the leading minor nonsingular at (k=" + std::to_string(k) +
                                    ", j=" + std::to_string(j + 1) + ")");
            used.insert(cands[*best]);
            ws.points[static_cast<std::size_t>(k - 1)].push_back(cands[*best]);
        }
        detail::finish_block(block, tol.det);
        ws.blocks.push_back(std::move(block));
    }
    ws.valid = std::all_of(ws.blocks.begin(), ws.blocks.end(),
                           [&](const JacobianBlock& b) { return b.relative_det > tol.det; });
    return ws;
}

/// Projective witness selection. periods is (n+1) x N (rows k = 0..n).
inline WitnessSet select_witnesses_projective(int d, int n, const std::vector<std::vector<int>>& periods,
                                              const Tolerances& tol = {}) {
    const auto dims = space_dims(d, n);
    const auto N = static_cast<std::size_t>(dims.N_dn);
    detail::check_periods(periods, static_cast<std::size_t>(n + 1), N);
    WitnessSet ws;
    ws.d = d;
    ws.n = n;
    ws.setting = Setting::projective;
    ws.periods = periods;
    ws.columns = enumerate_admissible(d, n, Setting::projective);
    const int need = (d == 2 && n == 2) ? 5 : 4;
    for (const auto& r : periods)
        for (int p : r)
            if (p < need) {
                ws.warnings.push_back("period " + std::to_string(p) + " < " + std::to_string(need) +
                                      ": existence is not guaranteed");
                break;
            }

    const auto total = static_cast<Eigen::Index>((n + 1) * N);
    JacobianBlock block;
    block.entries = CMat::Zero(total, total);
    std::map<int, std::vector<RootPoint>> pool;
    std::set<RootPoint> used;
    ws.points.assign(static_cast<std::size_t>(n + 1), {});
    Eigen::Index r = 0;
    for (int g = 0; g <= n; ++g) {
        for (std::size_t j = 0; j < N; ++j, ++r) {
            const int p = periods[static_cast<std::size_t>(g)][j];
            if (!pool.count(p)) pool[p] = detail::candidate_orbits(d, n, p);
            const auto& cands = pool[p];
            std::vector<int> ks;
            if (g == 0) {
                const auto A = ws.columns[j].affine_part();
                for (int k = 1; k <= n; ++k)
                    if (A[static_cast<std::size_t>(k - 1)] != 0) ks.push_back(k);
            } else {
                ks.push_back(g);
            }
            const auto C = detail::leading_cofactors(block.entries, r);
            const std::size_t options = cands.size() * ks.size();
            std::vector<double> scores(options, -1.0);
            std::vector<Eigen::VectorXcd> rows(options);
            parallel_for(options, [&](std::size_t i) {
                const auto& w = cands[i / ks.size()];
                if (used.count(w)) return;
                rows[i] = witness_row_projective(d, p, ks[i % ks.size()], w, ws.columns);
                cplx det{0.0, 0.0};
                for (Eigen::Index c = 0; c <= r; ++c) det += rows[i][c] * C[static_cast<std::size_t>(c)];
                scores[i] = std::abs(det);
            });
            const auto best = detail::best_index(scores);
            if (!best || scores[*best] <= 0.0)
                throw numeric_error("projective witness search exhausted at (row group " + std::to_string(g) +
                                    ", j=" + std::to_string(j + 1) + ", p=" + std::to_string(p) + ")");
            block.entries.row(r) = rows[*best].transpose();
            const CMat lead = block.entries.topLeftCorner(r + 1, r + 1);
            double prod = 1.0;
            for (Eigen::Index q = 0; q <= r; ++q) prod *= lead.row(q).norm();
            if (std::abs(lead.fullPivLu().determinant()) <= tol.det * prod)
                throw numeric_error("no candidate keeps the leading minor nonsingular at (row group " +
                                    std::to_string(g) + ", j=" + std::to_string(j + 1) + ")");
            const auto& w = cands[*best / ks.size()];
            used.insert(w);
            ws.points[static_cast<std::size_t>(g)].push_back(w);
            if (g == 0) ws.k_choices.push_back(ks[*best % ks.size()]);
        }
    }
    detail::finish_block(block, tol.det);
    ws.blocks.push_back(std::move(block));
    ws.valid = ws.blocks.front().relative_det > tol.det;
    return ws;
}

struct WitnessVerification {
    bool ok = true;
    double max_entry_error = 0.0;
    std::vector<double> relative_dets;
    std::vector<std::string> failures;
};

/// Independent re-check: periods, orbit distinctness, every entry recomputed
/// from the Q polynomial with floating-point powers, determinants re-factored.
inline WitnessVerification verify_witnesses(const WitnessSet& ws, const Tolerances& tol = {}) {
    WitnessVerification v;
    auto fail = [&](std::string msg) {
        v.ok = false;
        v.failures.push_back(std::move(msg));
    };
    const bool proj = ws.setting == Setting::projective;
    const auto N = static_cast<Eigen::Index>(ws.columns.size());
    std::set<RootPoint> seen;
    for (std::size_t g = 0; g < ws.points.size(); ++g) {
        for (std::size_t j = 0; j < ws.points[g].size(); ++j) {
            const auto& w = ws.points[g][j];
            const int p = ws.periods[g][j];
            if (RootPoint::make(ws.d, w.coords).period != p)
                fail("point " + w.str() + " does not have period " + std::to_string(p));
            if (!seen.insert(orbit_key(w)).second) fail("point " + w.str() + " repeats an orbit");
        }
    }
    auto q_entry = [&](int p, int k, int m, const MultiIndex& I, const CVec& z) {
        return q_poly(ws.d, p, k, I, m).eval(z);
    };
    if (!proj) {
        for (std::size_t b = 0; b < ws.blocks.size(); ++b) {
            const int k = static_cast<int>(b) + 1;
            CMat M(N, N);
            for (Eigen::Index r = 0; r < N; ++r) {
                const auto z = to_cvec(to_complex(ws.points[b][static_cast<std::size_t>(r)]));
                const int p = ws.periods[b][static_cast<std::size_t>(r)];
                for (Eigen::Index c = 0; c < N; ++c) M(r, c) = q_entry(p, k, k, ws.columns[static_cast<std::size_t>(c)], z);
            }
            const double scale = 1.0 + M.cwiseAbs().maxCoeff();
            v.max_entry_error = std::max(v.max_entry_error, (M - ws.blocks[b].entries).cwiseAbs().maxCoeff() / scale);
            double prod = 1.0;
            for (Eigen::Index r = 0; r < N; ++r) prod *= M.row(r).norm();
            v.relative_dets.push_back(std::abs(M.fullPivLu().determinant()) / prod);
        }
    } else {
        const int n = ws.n;
        CMat M = CMat::Zero((n + 1) * N, (n + 1) * N);
        Eigen::Index r = 0;
        for (int g = 0; g <= n; ++g) {
            for (Eigen::Index j = 0; j < N; ++j, ++r) {
                const auto& w = ws.points[static_cast<std::size_t>(g)][static_cast<std::size_t>(j)];
                const auto z = to_cvec(to_complex(w));
                const int p = ws.periods[static_cast<std::size_t>(g)][static_cast<std::size_t>(j)];
                const int k = g == 0 ? ws.k_choices[static_cast<std::size_t>(j)] : g;
                for (Eigen::Index c = 0; c < N; ++c) {
                    const auto& I = ws.columns[static_cast<std::size_t>(c)];
                    M(r, c) = q_entry(p, k, 0, I, z);
                    M(r, k * N + c) = q_entry(p, k, k, I, z);
                }
            }
        }
        const double scale = 1.0 + M.cwiseAbs().maxCoeff();
        v.max_entry_error = (M - ws.blocks.front().entries).cwiseAbs().maxCoeff() / scale;
        double prod = 1.0;
        for (Eigen::Index q = 0; q < M.rows(); ++q) prod *= M.row(q).norm();
        v.relative_dets.push_back(std::abs(M.fullPivLu().determinant()) / prod);
    }
    if (v.max_entry_error > 1e-9) fail("recomputed entries differ by " + std::to_string(v.max_entry_error));
    for (std::size_t b = 0; b < v.relative_dets.size(); ++b)
        if (!(v.relative_dets[b] > tol.det))
            fail("block " + std::to_string(b) + " relative determinant " + std::to_string(v.relative_dets[b]) +
                 " is not above tau_det");
    return v;
}

enum class GateVariant { affine, projective_weak };

inline const char* to_string(GateVariant v) { return v == GateVariant::affine ? "affine" : "projective-weak"; }

struct GateResult {
    int d = 0, n = 0, p = 0;
    GateVariant variant = GateVariant::affine;
    boost::multiprecision::cpp_int lhs, rhs;
    bool holds = false;
    bool hypothesis_met = false;  ///< the inequality is only claimed here
};

/// affine:          p n N  <  (d^{p-1} - d^{[p/2]}) (d^{p-1} - 1)^{n-1}   (claimed for n >= 2, p >= 4)
/// projective-weak: p (n+1) N  <=  (d^p - d^{[p/2]}) (d^p - 1)^{n-1}     (claimed for p >= 4)
inline GateResult counting_gate(int d, int n, int p, GateVariant variant) {
    using boost::multiprecision::cpp_int;
    detail::require(d >= 2 && n >= 1 && p >= 1, "counting_gate needs d >= 2, n >= 1, p >= 1");
    GateResult g;
    g.d = d;
    g.n = n;
    g.p = p;
    g.variant = variant;
    const cpp_int N = space_dims(d, n).N_dn;
    auto pw = [&](int e) -> cpp_int { return boost::multiprecision::pow(cpp_int(d), static_cast<unsigned>(e)); };
    if (variant == GateVariant::affine) {
        g.lhs = cpp_int(p) * n * N;
        g.rhs = cpp_int(pw(p - 1) - pw(p / 2)) * cpp_int(boost::multiprecision::pow(cpp_int(pw(p - 1) - 1), static_cast<unsigned>(n - 1)));
        g.holds = g.lhs < g.rhs;
        g.hypothesis_met = n >= 2 && p >= 4;
    } else {
        g.lhs = cpp_int(p) * (n + 1) * N;
        g.rhs = cpp_int(pw(p) - pw(p / 2)) * cpp_int(boost::multiprecision::pow(cpp_int(pw(p) - 1), static_cast<unsigned>(n - 1)));
        g.holds = g.lhs <= g.rhs;
        g.hypothesis_met = p >= 4;
    }
    return g;
}

struct NonvanishingCount {
    u64 count = 0;
    u64 total = 0;       ///< |S|
    u64 bound = 0;       ///< guaranteed lower bound for a nonzero P
    bool holds = false;  ///< count >= bound (vacuous for the zero polynomial)
};

/// Exhaustive count of points of S = Per_p x Fix_p^{n-1} where |P| > tau_eval.
inline NonvanishingCount s_poly_nonvanishing_count(const SparsePoly& P, int d, int p, int n,
                                                   const Tolerances& tol = {}) {
    detail::require(d >= 2 && p >= 2 && n >= 1, "s-polynomial count needs d >= 2, p >= 2, n >= 1");
    detail::require(P.n == n, "polynomial has the wrong number of variables");
    const u64 dp = checked_pow(static_cast<u64>(d), p), dp1 = dp / static_cast<u64>(d);
    for (int j = 0; j < n; ++j)
        if (P.degree(j) > static_cast<int>(dp - dp1))
            throw precondition_error("degree " + std::to_string(P.degree(j)) + " in z" + std::to_string(j + 1) +
                                     " exceeds the cap d^p - d^{p-1} = " + std::to_string(dp - dp1));
    NonvanishingCount out;
    const u64 M = dp - 1;
    const auto per = per_set(d, p);
    const auto fix = fix_set(d, p);
    std::vector<RootCoord> coords(static_cast<std::size_t>(n), RootCoord::zero());
    auto rec = [&](auto&& self, int j) -> void {
        if (j == n) {
            ++out.total;
            RootPoint w;
            w.degree = d;
            w.coords = coords;
            if (std::abs(P.eval_exact(w, M)) > tol.eval) ++out.count;
            return;
        }
        for (const auto& c : (j == 0 ? per : fix)) {
            coords[static_cast<std::size_t>(j)] = c;
            self(self, j + 1);
        }
    };
    rec(rec, 0);
    const u64 half = checked_pow(static_cast<u64>(d), p / 2);
    u64 b = dp1 >= half ? dp1 - half : 0;
    for (int j = 1; j < n; ++j) b *= dp1 - 1;
    out.bound = b;
    out.holds = P.is_zero() || out.count >= out.bound;
    return out;
}

} // namespace multispec
