#pragma once

/**
 * @file continuation.hpp
 * @brief Newton solving of periodic cycles, predictor-corrector tracking of
 *        cycles along parameter paths, multiplier spectra and a numeric
 *        regularity probe.
 *
 * A cycle of period p of F is solved as a zero of z -> F^p(z) - z. The
 * cycle Jacobian DF^p(z_0) = DF(z_{p-1}) ... DF(z_0) carries the
 * multipliers (eigenvalues). Tracking moves a solved cycle along a list of
 * complex parameter values of a one-parameter family s -> F_s.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "polymap.hpp"
#include "tolerances.hpp"

namespace multispec {

/// A numerically solved cycle together with its multipliers.
struct CycleTrack {
    int period = 1;        ///< requested period p
    int exact_period = 1;  ///< least q | p with F^q(z_0) = z_0
    std::vector<CVec> points;
    CMat cycle_jacobian;
    std::vector<cplx> eigenvalues;          ///< canonical (Re, Im) order
    std::optional<CMat> eigendirections;    ///< unit columns matching `eigenvalues`
    double residual = 0.0;
    double parabolic_gap = std::numeric_limits<double>::infinity();  ///< min |lambda - 1|
    bool parabolic = false;

    const CVec& base() const { return points.front(); }
};

namespace detail {

inline bool lex_less(cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

inline bool lex_less(const CVec& a, const CVec& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return lex_less(a[i], b[i]);
    }
    return false;
}

template <SelfMap M>
std::vector<CVec> iterate(const M& F, const CVec& z, int steps) {
    std::vector<CVec> pts;
    pts.reserve(static_cast<std::size_t>(steps) + 1);
    pts.push_back(z);
    for (int i = 0; i < steps; ++i) pts.push_back(F.eval(pts.back()));
    return pts;
}

template <SelfMap M>
CMat cycle_jacobian(const M& F, std::span<const CVec> pts, int p) {
    CMat J = CMat::Identity(F.dim(), F.dim());
    for (int i = 0; i < p; ++i) J = F.jacobian(pts[static_cast<std::size_t>(i)]) * J;
    return J;
}

struct NewtonOutcome {
    CVec z;
    double residual = std::numeric_limits<double>::infinity();
    double first_step = 0.0;
    double second_step = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Newton on F^p(z) - z from `seed`; stops after max_iter or on convergence
/// (plus up to two polishing steps while the residual keeps dropping).
template <SelfMap M>
NewtonOutcome newton_cycle(const M& F, int p, const CVec& seed, double tol, int max_iter) {
    NewtonOutcome out;
    out.z = seed;
    const auto I = CMat::Identity(F.dim(), F.dim());
    int polish = 0;
    for (int it = 0; it < max_iter; ++it) {
        const auto pts = iterate(F, out.z, p);
        const CVec G = pts.back() - out.z;
        const double res = G.norm();
        if (!std::isfinite(res)) break;
        const double scale = 1.0 + out.z.norm();
        if (out.converged) {
            if (res >= out.residual || ++polish > 2) break;
        }
        out.residual = res;
        if (res <= tol * scale) out.converged = true;
        const CMat DG = cycle_jacobian(F, pts, p) - I;
        const CVec delta = DG.fullPivLu().solve(-G);
        if (!delta.allFinite()) break;
        const double step = delta.norm();
        if (out.iterations == 0) out.first_step = step;
        if (out.iterations == 1) out.second_step = step;
        ++out.iterations;
        if (out.converged && step > 1e3 * tol * scale) break;  // singular DG: do not wander off
        out.z += delta;
    }
    if (out.converged) {
        const auto pts = iterate(F, out.z, p);
        out.residual = (pts.back() - out.z).norm();
        out.converged = out.residual <= tol * (1.0 + out.z.norm()) || out.residual < 1e-15;
    }
    return out;
}

inline void fill_spectrum(CycleTrack& c, const Tolerances& tol) {
    Eigen::ComplexEigenSolver<CMat> es(c.cycle_jacobian, true);
    const auto n = c.cycle_jacobian.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return lex_less(es.eigenvalues()[a], es.eigenvalues()[b]); });
    c.eigenvalues.clear();
    CMat V(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto src = order[static_cast<std::size_t>(i)];
        c.eigenvalues.push_back(es.eigenvalues()[src]);
        V.col(i) = es.eigenvectors().col(src).normalized();
    }
    c.eigendirections = V;
    c.parabolic_gap = std::numeric_limits<double>::infinity();
    for (const auto& l : c.eigenvalues) c.parabolic_gap = std::min(c.parabolic_gap, std::abs(l - 1.0));
    c.parabolic = c.parabolic_gap < tol.parab;
}

template <SelfMap M>
CycleTrack assemble_cycle(const M& F, int p, const CVec& z, double residual, const Tolerances& tol) {
    CycleTrack c;
    c.period = p;
    auto pts = iterate(F, z, p);
    c.cycle_jacobian = cycle_jacobian(F, pts, p);
    pts.pop_back();
    c.points = std::move(pts);
    c.residual = residual;
    c.exact_period = p;
    const double sep = 1e-8 * (1.0 + z.norm());
    for (int q = 1; q < p; ++q) {
        if (p % q == 0 && (c.points[static_cast<std::size_t>(q)] - z).norm() <= sep) {
            c.exact_period = q;
            break;
        }
    }
    fill_spectrum(c, tol);
    return c;
}

} // namespace detail

/// Solve a p-periodic cycle of F by Newton from `seed`. A cycle with an
/// eigenvalue within tol.parab of 1 is returned with `parabolic` set.
template <SelfMap M>
CycleTrack solve_cycle(const M& F, int p, const CVec& seed, const Tolerances& tol = {}, int max_iter = 100) {
    detail::require(p >= 1, "period must be >= 1");
    detail::require(seed.size() == F.dim(), "seed dimension does not match the map");
    const auto nr = detail::newton_cycle(F, p, seed, tol.newton, max_iter);
    if (!nr.converged)
        throw numeric_error("Newton did not converge to a period-" + std::to_string(p) +
                            " cycle (residual " + std::to_string(nr.residual) + ")");
    return detail::assemble_cycle(F, p, nr.z, nr.residual, tol);
}

/// Re-express a cycle starting from orbit index `shift`.
template <SelfMap M>
CycleTrack rebase_cycle(const M& F, const CycleTrack& c, int shift, const Tolerances& tol = {}) {
    const auto& z = c.points[static_cast<std::size_t>(shift % c.period)];
    return detail::assemble_cycle(F, c.period, z, c.residual, tol);
}

struct TrackOptions {
    bool follow_eigenvalues = false;  ///< continue eigenvalue branches (needs simple spectra en route)
    int max_halvings = 20;
    double max_correction = 0.05;     ///< Newton correction cap, relative to 1 + |z|
    int corrector_iterations = 8;
};

struct PathResult {
    CycleTrack end;
    std::vector<cplx> branches;       ///< eigenvalue branches continued from start.eigenvalues
    std::vector<CVec> branch_directions;
    double min_parabolic_gap = std::numeric_limits<double>::infinity();
    double min_eigen_gap = std::numeric_limits<double>::infinity();
    int steps = 0;
    int rejections = 0;
};

namespace detail {

/// Permutation of `next` closest (max distance) to `prev`; brute force for
/// n <= 6, greedy beyond.
inline std::vector<std::size_t> match_eigenvalues(const std::vector<cplx>& prev, const std::vector<cplx>& next) {
    const std::size_t n = prev.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    if (n <= 6) {
        std::vector<std::size_t> best = perm;
        double best_cost = std::numeric_limits<double>::infinity();
        do {
            double cost = 0.0;
            for (std::size_t i = 0; i < n; ++i) cost = std::max(cost, std::abs(next[perm[i]] - prev[i]));
            if (cost < best_cost) {
                best_cost = cost;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }
    std::vector<bool> used(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t arg = n;
        for (std::size_t j = 0; j < n; ++j)
            if (!used[j] && (arg == n || std::abs(next[j] - prev[i]) < std::abs(next[arg] - prev[i]))) arg = j;
        used[arg] = true;
        perm[i] = arg;
    }
    return perm;
}

inline double min_pairwise_gap(const std::vector<cplx>& v) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j) g = std::min(g, std::abs(v[i] - v[j]));
    return g;
}

} // namespace detail

/// Follow `start` (a cycle of fam(path.front())) along the parameter path.
/// `fam` maps a complex parameter to a SelfMap.
template <class Family>
PathResult track_path_detailed(const Family& fam, std::span<const cplx> path, const CycleTrack& start,
                               const Tolerances& tol = {}, const TrackOptions& opt = {}) {
    detail::require(!path.empty(), "path must contain at least one parameter value");
    const int p = start.period;
    PathResult out;
    out.branches = start.eigenvalues;
    if (start.eigendirections) {
        for (Eigen::Index i = 0; i < start.eigendirections->cols(); ++i)
            out.branch_directions.push_back(start.eigendirections->col(i));
    }
    out.min_parabolic_gap = start.parabolic_gap;
    out.min_eigen_gap = detail::min_pairwise_gap(start.eigenvalues);

    CVec z = start.base();
    std::optional<CVec> z_prev;
    cplx s_cur = path.front(), s_prev = s_cur;
    CycleTrack current = start;

    for (std::size_t seg = 1; seg < path.size(); ++seg) {
        const cplx a = path[seg - 1], b = path[seg];
        if (a == b) continue;
        double tau = 0.0, dtau = 1.0;
        int halvings = 0;
        while (tau < 1.0) {
            dtau = std::min(dtau, 1.0 - tau);
            if (dtau < 1e-12)
                throw numeric_error("tracking stalled near parameter (" + std::to_string(s_cur.real()) + ", " +
                                    std::to_string(s_cur.imag()) + "): step size underflow");
            const cplx s_new = a + (b - a) * (tau + dtau);
            CVec pred = z;
            if (z_prev && s_cur != s_prev) pred = z + (z - *z_prev) * ((s_new - s_cur) / (s_cur - s_prev));
            const auto F = fam(s_new);
            const auto nr = detail::newton_cycle(F, p, pred, tol.newton, opt.corrector_iterations);
            const double scale = 1.0 + z.norm();
            bool ok = nr.converged && nr.first_step <= opt.max_correction * scale &&
                      (nr.iterations < 2 || nr.first_step < 1e-8 * scale || nr.second_step <= 0.5 * nr.first_step);
            CycleTrack cand;
            std::vector<std::size_t> perm;
            if (ok) {
                cand = detail::assemble_cycle(F, p, nr.z, nr.residual, tol);
                if (cand.parabolic_gap < tol.parab_abort)
                    throw parabolic_error("path passes within " + std::to_string(cand.parabolic_gap) +
                                          " of a parabolic parameter");
                if (cand.parabolic_gap < tol.parab && halvings < 4) ok = false;
                if (ok && opt.follow_eigenvalues && cand.eigenvalues.size() > 1) {
                    perm = detail::match_eigenvalues(out.branches, cand.eigenvalues);
                    double drift = 0.0;
                    for (std::size_t i = 0; i < perm.size(); ++i)
                        drift = std::max(drift, std::abs(cand.eigenvalues[perm[i]] - out.branches[i]));
                    const double gap = detail::min_pairwise_gap(cand.eigenvalues);
                    if (gap <= 2.0 * drift) ok = false;
                }
            }
            if (!ok) {
                ++out.rejections;
                if (++halvings > opt.max_halvings)
                    throw numeric_error("tracking failed near parameter (" + std::to_string(s_new.real()) + ", " +
                                        std::to_string(s_new.imag()) + "): corrector diverged after " +
                                        std::to_string(opt.max_halvings) + " step halvings");
                dtau *= 0.5;
                continue;
            }
            if (opt.follow_eigenvalues && !perm.empty()) {
                std::vector<cplx> nb(perm.size());
                std::vector<CVec> nd(perm.size());
                for (std::size_t i = 0; i < perm.size(); ++i) {
                    nb[i] = cand.eigenvalues[perm[i]];
                    CVec v = cand.eigendirections->col(static_cast<Eigen::Index>(perm[i]));
                    if (i < out.branch_directions.size()) {
                        const cplx ip = out.branch_directions[i].dot(v);
                        if (std::abs(ip) > 0) v *= std::conj(ip) / std::abs(ip);
                    }
                    nd[i] = v;
                }
                out.branches = std::move(nb);
                out.branch_directions = std::move(nd);
                out.min_eigen_gap = std::min(out.min_eigen_gap, detail::min_pairwise_gap(cand.eigenvalues));
            } else {
                out.branches = cand.eigenvalues;
            }
            out.min_parabolic_gap = std::min(out.min_parabolic_gap, cand.parabolic_gap);
            z_prev = z;
            s_prev = s_cur;
            z = nr.z;
            s_cur = s_new;
            current = std::move(cand);
            tau += dtau;
            ++out.steps;
            halvings = 0;
            dtau *= 2.0;
        }
    }
    out.end = std::move(current);
    return out;
}

template <class Family>
CycleTrack track_path(const Family& fam, std::span<const cplx> path, const CycleTrack& start,
                      const Tolerances& tol = {}, const TrackOptions& opt = {}) {
    return track_path_detailed(fam, path, start, tol, opt).end;
}

/// Elementary symmetric functions e_1..e_n of the eigenvalues.
inline std::vector<cplx> elementary_symmetric(const std::vector<cplx>& lambdas) {
    // coefficients of prod (1 + lambda_i x)
    std::vector<cplx> e(lambdas.size() + 1, cplx{0.0, 0.0});
    e[0] = 1.0;
    for (const auto& l : lambdas)
        for (std::size_t k = e.size() - 1; k >= 1; --k) e[k] += l * e[k - 1];
    return {e.begin() + 1, e.end()};
}

/// Per-cycle symmetric functions of the multipliers, sorted canonically.
/// Throws when two entries describe the same orbit.
template <SelfMap M>
std::vector<std::vector<cplx>> multiplier_spectrum(const M& F, int p, const std::vector<CycleTrack>& cycles,
                                                   double same_point_tol = 1e-8) {
    (void)F;
    for (std::size_t i = 0; i < cycles.size(); ++i) {
        detail::require(cycles[i].period == p, "cycle " + std::to_string(i) + " does not have period " + std::to_string(p));
        for (std::size_t j = 0; j < i; ++j)
            for (const auto& q : cycles[j].points)
                if ((q - cycles[i].base()).norm() <= same_point_tol * (1.0 + q.norm()))
                    throw precondition_error("cycles " + std::to_string(j) + " and " + std::to_string(i) +
                                             " are the same orbit");
    }
    std::vector<std::vector<cplx>> out;
    out.reserve(cycles.size());
    for (const auto& c : cycles) out.push_back(elementary_symmetric(c.eigenvalues));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                            [](cplx x, cplx y) { return detail::lex_less(x, y); });
    });
    return out;
}

/// Samples the top-degree part of F on the unit sphere; false when a
/// near-common zero (norm < threshold) shows up. A true answer is advisory.
inline bool regularity_probe(const PolyMapDense& F, double threshold = 1e-8, int random_samples = 512) {
    const PolyMapDense top = F.top_part();
    const int n = F.dim();
    std::vector<CVec> samples;
    for (int j = 0; j < n; ++j) samples.push_back(CVec::Unit(n, j));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int r = 0; r < 8; ++r) {
                CVec z = CVec::Zero(n);
                z[i] = 1.0;
                z[j] = std::polar(1.0, 2.0 * std::numbers::pi * r / 8.0);
                samples.push_back(z.normalized());
            }
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> g;
    for (int s = 0; s < random_samples; ++s) {
        CVec z(n);
        for (int j = 0; j < n; ++j) z[j] = cplx{g(rng), g(rng)};
        samples.push_back(z.normalized());
    }
    for (const auto& z : samples)
        if (top.eval(z).norm() < threshold) return false;
    return true;
}

} // namespace multispec
