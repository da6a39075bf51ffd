#pragma once

/**
 * @file derivatives.hpp
 * @brief Closed-form first derivatives of the diagonal Jacobian entries
 *        rho_k at periodic points of the power map, their polynomial form Q,
 *        and finite-difference oracles.
 *
 * For a p-periodic point w of F0 and a perturbation F0 + t z^I e_m, rho_k(t)
 * is the (k,k) entry of D(F_t^p) at the continued periodic point. Its
 * t-derivative at 0 is a short sum of roots of unity; it is evaluated by
 * integer arithmetic on exponents modulo d^p - 1 followed by one complex
 * exponential per term.
 *
 * Coordinates k and m are 1-based. In the projective setting m = 0 is the
 * homogenizing direction, realised in the chart z_0 = 1 as F / (1 + t z^I).
 */

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "combinatorics.hpp"
#include "continuation.hpp"
#include "errors.hpp"
#include "polymap.hpp"
#include "powerlattice.hpp"
#include "tolerances.hpp"

namespace multispec {

/// One derivative request: d rho_k / d(direction z^I e_m) at w0 for period p.
struct DerivativeQuery {
    int d = 2;
    int n = 2;
    int p = 1;
    int k = 1;
    int m = 1;
    MultiIndex I;
    RootPoint w0;
};

/// Polynomial in n variables with integer coefficients times a common
/// integer prefactor `scale`.
struct SparsePoly {
    int n = 0;
    std::int64_t scale = 1;
    std::map<std::vector<int>, std::int64_t> terms;

    bool is_zero() const { return terms.empty() || scale == 0; }

    void add(const std::vector<int>& e, std::int64_t c) {
        auto& slot = terms[e];
        slot += c;
        if (slot == 0) terms.erase(e);
    }

    /// Highest exponent of variable j (0-based); -1 for the zero polynomial.
    int degree(int j) const {
        int deg = -1;
        for (const auto& [e, c] : terms) deg = std::max(deg, e[static_cast<std::size_t>(j)]);
        return deg;
    }

    std::vector<int> degrees() const {
        std::vector<int> out;
        for (int j = 0; j < n; ++j) out.push_back(degree(j));
        return out;
    }

    cplx eval(const CVec& z) const {
        cplx acc{0.0, 0.0};
        for (const auto& [e, c] : terms) acc += static_cast<double>(c) * monomial_value(z, e);
        return static_cast<double>(scale) * acc;
    }

    /// Exact-angle evaluation at a root-of-unity point whose moduli divide M.
    cplx eval_exact(const RootPoint& w, u64 M) const;

    std::string str() const {
        if (is_zero()) return "0";
        std::string out = std::to_string(scale) + "*(";
        bool first = true;
        for (const auto& [e, c] : terms) {
            if (!first) out += " + ";
            first = false;
            out += std::to_string(c);
            for (std::size_t j = 0; j < e.size(); ++j)
                if (e[j] != 0) out += "*z" + std::to_string(j + 1) + "^" + std::to_string(e[j]);
        }
        return out + ")";
    }
};

namespace detail {

inline u64 powmod(u64 base, u64 e, u64 m) {
    if (m == 1) return 0;
    u64 r = 1;
    base %= m;
    while (e) {
        if (e & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        e >>= 1;
    }
    return r;
}

/// Signed integer times residue, reduced mod M.
inline u64 signed_mulmod(std::int64_t c, u64 r, u64 M) {
    const u64 mag = static_cast<u64>(c < 0 ? -c : c) % M;
    const u64 v = mulmod(mag, r, M);
    return (c < 0 && v != 0) ? M - v : v;
}

inline std::vector<u64> residues(const RootPoint& w, u64 M) {
    std::vector<u64> r;
    r.reserve(w.dim());
    for (const auto& c : w.coords) {
        if (c.is_zero()) throw precondition_error("point " + w.str() + " has a zero coordinate");
        if (M % c.canonical().modulus() != 0)
            throw precondition_error("point " + w.str() + " is not fixed by the p-th iterate of the power map");
        r.push_back(c.residue_mod(M));
    }
    return r;
}

inline std::int64_t ipow(int d, int e) { return static_cast<std::int64_t>(checked_pow(static_cast<u64>(d), e)); }

inline void validate(const DerivativeQuery& q) {
    require(q.d >= 2, "degree d must be >= 2");
    require(q.n >= 1, "dimension n must be >= 1");
    require(q.p >= 1, "period p must be >= 1");
    require(q.k >= 1 && q.k <= q.n, "row coordinate k must lie in [1, n]");
    const bool proj = q.I.setting == Setting::projective;
    require(q.m >= (proj ? 0 : 1) && q.m <= q.n, proj ? "direction m must lie in [0, n]" : "direction m must lie in [1, n]");
    require(static_cast<int>(q.I.size()) == (proj ? q.n + 1 : q.n), "multi-index has the wrong number of entries");
    require(std::all_of(q.I.entries.begin(), q.I.entries.end(), [](int e) { return e >= 0; }),
            "multi-index entries must be non-negative");
    if (proj) require(q.I.total() == q.d, "projective multi-index must have total degree d");
    require(static_cast<int>(q.w0.dim()) == q.n, "point dimension does not match n");
}

} // namespace detail

inline cplx SparsePoly::eval_exact(const RootPoint& w, u64 M) const {
    const auto r = detail::residues(w, M);
    cplx acc{0.0, 0.0};
    for (const auto& [e, c] : terms) {
        u64 a = 0;
        for (std::size_t j = 0; j < e.size(); ++j) a = (a + mulmod(static_cast<u64>(e[j]) % M, r[j], M)) % M;
        acc += static_cast<double>(c) * unit_root(a, M);
    }
    return static_cast<double>(scale) * acc;
}

namespace detail {

/// (i_k d^{p-1} - d^p) * sum_i (w^{I_k})^{d^i} w_k^{d^i (i_k - d)} for an affine exponent vector I.
inline cplx affine_formula(int d, int p, int k, const std::vector<int>& I, const RootPoint& w0) {
    const u64 M = checked_pow(static_cast<u64>(d), p) - 1;
    const auto r = residues(w0, M);
    const int ik = I[static_cast<std::size_t>(k - 1)];
    const std::int64_t pref = ik * ipow(d, p - 1) - ipow(d, p);
    cplx sum{0.0, 0.0};
    for (int i = 0; i < p; ++i) {
        const u64 di = powmod(static_cast<u64>(d), static_cast<u64>(i), M);
        u64 a = 0;
        for (std::size_t j = 0; j < I.size(); ++j) {
            const std::int64_t e = static_cast<int>(j) == k - 1 ? ik - d : I[j];
            a = (a + mulmod(signed_mulmod(e, di, M), r[j], M)) % M;
        }
        sum += unit_root(a, M);
    }
    return static_cast<double>(pref) * sum;
}

} // namespace detail

/// Closed-form derivative in the affine setting. p may be any multiple of the period of w0.
inline cplx partial_rho_affine(const DerivativeQuery& q) {
    detail::validate(q);
    detail::require(q.I.setting == Setting::affine, "partial_rho_affine needs an affine multi-index");
    if (q.m != q.k) {
        detail::residues(q.w0, checked_pow(static_cast<u64>(q.d), q.p) - 1);  // still reject bad points
        return {0.0, 0.0};
    }
    return detail::affine_formula(q.d, q.p, q.k, q.I.entries, q.w0);
}

/// Closed-form derivative in the projective setting, evaluated in the chart z_0 = 1.
inline cplx partial_rho_projective(const DerivativeQuery& q) {
    detail::validate(q);
    detail::require(q.I.setting == Setting::projective, "partial_rho_projective needs a projective multi-index");
    const u64 M = checked_pow(static_cast<u64>(q.d), q.p) - 1;
    const auto r = detail::residues(q.w0, M);
    const auto I = q.I.affine_part();
    if (q.m == q.k) return detail::affine_formula(q.d, q.p, q.k, I, q.w0);
    if (q.m != 0) return {0.0, 0.0};
    const int ik = I[static_cast<std::size_t>(q.k - 1)];
    if (ik == 0) return {0.0, 0.0};
    cplx sum{0.0, 0.0};
    for (int i = 0; i < q.p; ++i) {
        const u64 di = detail::powmod(static_cast<u64>(q.d), static_cast<u64>(i), M);
        u64 a = 0;
        for (std::size_t j = 0; j < I.size(); ++j) a = (a + mulmod(mulmod(static_cast<u64>(I[j]), di, M), r[j], M)) % M;
        sum += unit_root(a, M);
    }
    return static_cast<double>(-ik * detail::ipow(q.d, q.p - 1)) * sum;
}

inline cplx partial_rho(const DerivativeQuery& q) {
    return q.I.setting == Setting::affine ? partial_rho_affine(q) : partial_rho_projective(q);
}

/// Q with partial_rho = w_k^{-d^{p-1}} Q(w0). Exponents are reduced into
/// [0, d^p - 1) using w^{d^p - 1} = 1 before the polynomial is formed.
inline SparsePoly q_poly(int d, int p, int k, const MultiIndex& I, int m) {
    detail::require(d >= 2 && p >= 1, "q_poly needs d >= 2 and p >= 1");
    detail::require(is_admissible(I, d), "multi-index " + I.str() + " is not admissible");
    const bool proj = I.setting == Setting::projective;
    const auto A = I.affine_part();
    const int n = static_cast<int>(A.size());
    detail::require(k >= 1 && k <= n, "row coordinate k must lie in [1, n]");
    detail::require(m >= (proj ? 0 : 1) && m <= n, "direction m out of range");
    const std::int64_t dp = detail::ipow(d, p), dp1 = detail::ipow(d, p - 1), M = dp - 1;
    const int ik = A[static_cast<std::size_t>(k - 1)];
    SparsePoly Q;
    Q.n = n;
    if (m == k) {
        Q.scale = ik * dp1 - dp;
        for (int i = 0; i < p; ++i) {
            const std::int64_t di = detail::ipow(d, i);
            std::vector<int> e(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) e[static_cast<std::size_t>(j)] = static_cast<int>(A[static_cast<std::size_t>(j)] * di);
            std::int64_t ek = dp1 + di * (ik - d);
            if (ek < 0) ek += M;
            e[static_cast<std::size_t>(k - 1)] = static_cast<int>(ek);
            Q.add(e, 1);
        }
        return Q;
    }
    if (!proj || m != 0 || ik == 0) {
        Q.scale = 0;
        return Q;
    }
    Q.scale = -ik * dp1;
    for (int i = 0; i < p; ++i) {
        const std::int64_t di = detail::ipow(d, i);
        std::vector<int> e(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) e[static_cast<std::size_t>(j)] = static_cast<int>(A[static_cast<std::size_t>(j)] * di);
        std::int64_t ek = ik * di + dp1;
        if (ek >= dp) ek -= M;
        e[static_cast<std::size_t>(k - 1)] = static_cast<int>(ek);
        Q.add(e, 1);
    }
    return Q;
}

/// Expected per-variable degrees of Q (affine m = k, p >= 2; projective m = 0, p >= 3).
/// For the projective case the non-(d=2, i_k=1) entry for z_k is an upper bound.
inline std::vector<int> q_degree_table(int d, int p, int k, const MultiIndex& I, int m) {
    const auto A = I.affine_part();
    const int n = static_cast<int>(A.size());
    const int dp1 = static_cast<int>(detail::ipow(d, p - 1)), dp = static_cast<int>(detail::ipow(d, p));
    const int ik = A[static_cast<std::size_t>(k - 1)];
    std::vector<int> deg(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) deg[static_cast<std::size_t>(j)] = A[static_cast<std::size_t>(j)] * dp1;
    if (m == k) {
        deg[static_cast<std::size_t>(k - 1)] = ik <= d - 2 ? (ik + 1) * dp1 - 1 : dp1 - 1;
    } else {
        deg[static_cast<std::size_t>(k - 1)] = (d == 2 && ik == 1) ? dp - dp / 4 : dp - dp1;
    }
    return deg;
}

/// True iff the two polynomials share no exponent vector.
inline bool q_monomials_disjoint(const SparsePoly& A, const SparsePoly& B) {
    for (const auto& [e, c] : A.terms)
        if (B.terms.count(e)) return false;
    return true;
}

namespace detail {

template <SelfMap Map>
cplx rho_at(const Map& F, const DerivativeQuery& q, const Tolerances& tol) {
    const auto seed = to_cvec(to_complex(q.w0));
    const auto c = solve_cycle(F, q.p, seed, tol, 60);
    if (c.parabolic) throw parabolic_error("periodic point has a multiplier within tau_parab of 1");
    return c.cycle_jacobian(q.k - 1, q.k - 1);
}

inline cplx rho_perturbed(const PolyMapDense& F, const DerivativeQuery& q, double t, const Tolerances& tol) {
    const auto A = q.I.affine_part();
    if (q.I.setting == Setting::projective && q.m == 0) return rho_at(ChartPerturbation(F, A, t), q, tol);
    return rho_at(F.plus_monomial(q.m - 1, A, t), q, tol);
}

} // namespace detail

/// Central difference (rho(h) - rho(-h)) / 2h, each rho re-solved by Newton from w0.
inline cplx fd_partial_rho(const DerivativeQuery& q, const PolyMapDense& F, double h, const Tolerances& tol = {}) {
    detail::validate(q);
    detail::require(h > 0.0, "finite-difference step must be positive");
    detail::require(F.dim() == q.n, "map dimension does not match the query");
    return (detail::rho_perturbed(F, q, h, tol) - detail::rho_perturbed(F, q, -h, tol)) / (2.0 * h);
}

/// Richardson extrapolation of the central difference over steps h and h/2.
inline cplx fd_partial_rho_richardson(const DerivativeQuery& q, const PolyMapDense& F, double h,
                                      const Tolerances& tol = {}) {
    const cplx Dh = fd_partial_rho(q, F, h, tol);
    const cplx Dh2 = fd_partial_rho(q, F, 0.5 * h, tol);
    return (4.0 * Dh2 - Dh) / 3.0;
}

/// d w_{i,k} / dt at t = 0 for the affine perturbation z^I e_k: the velocity
/// of the k-th coordinate of the i-th orbit point. Other coordinates do not move.
inline cplx cycle_velocity(int d, int p, int k, const MultiIndex& I, const RootPoint& w0, int i) {
    detail::require(d >= 2 && p >= 1, "cycle_velocity needs d >= 2 and p >= 1");
    detail::require(I.setting == Setting::affine && I.size() == w0.dim(), "cycle_velocity needs an affine index of matching size");
    detail::require(k >= 1 && k <= static_cast<int>(w0.dim()), "row coordinate k out of range");
    detail::require(i >= 0 && i < p, "orbit index must lie in [0, p)");
    const u64 M = checked_pow(static_cast<u64>(d), p) - 1;
    const auto r = detail::residues(w0, M);
    const u64 rk = r[static_cast<std::size_t>(k - 1)];
    const u64 di = detail::powmod(static_cast<u64>(d), static_cast<u64>(i), M);
    cplx sum{0.0, 0.0};
    for (int s = 0; s < p; ++s) {
        const u64 dsi = detail::powmod(static_cast<u64>(d), static_cast<u64>(s + i), M);
        const u64 dsi1 = detail::powmod(static_cast<u64>(d), static_cast<u64>(s + i + 1), M);
        u64 a = (mulmod(di, rk, M) + M - mulmod(dsi1, rk, M)) % M;
        for (std::size_t j = 0; j < I.size(); ++j)
            a = (a + mulmod(mulmod(static_cast<u64>(I[j]), dsi, M), r[j], M)) % M;
        sum += static_cast<double>(detail::ipow(d, p - s - 1)) * unit_root(a, M);
    }
    return sum / static_cast<double>(1 - detail::ipow(d, p));
}

} // namespace multispec
