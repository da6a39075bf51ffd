#pragma once

/**
 * @file rank.hpp
 * @brief Finite-difference Jacobian of multiplier functions at a map near
 *        the power map, with an SVD rank certificate.
 *
 * Each witness orbit of F0 is continued to the base map along the straight
 * segment F0 -> base. At the base, the multiplier continuing the designated
 * diagonal entry rho_k is followed under the perturbations base + t z^I e_m
 * for every admissible (m, I); derivatives in t form the square Jacobian.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "combinatorics.hpp"
#include "continuation.hpp"
#include "derivatives.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "polymap.hpp"
#include "tolerances.hpp"
#include "witness.hpp"

namespace multispec {

struct RankReport {
    CMat jacobian;                          ///< rows (k, j) k-major, columns (m, I) m-major
    std::vector<double> singular_values;    ///< descending
    int rank_at_tol = 0;
    bool certified_full_rank = false;
    double smin_over_smax = 0.0;
    double off_block_max = 0.0;             ///< largest |entry| with m != k
    CMat closed_form_matrix;                ///< closed-form derivatives at F0 for the same witnesses
    double max_closed_form_deviation = 0.0; ///< max |jacobian - closed_form_matrix|
    double min_eigen_gap = std::numeric_limits<double>::infinity();
    double min_parabolic_gap = std::numeric_limits<double>::infinity();
    double h = 0.0;
};

namespace detail {

/// Index of the eigenvalue nearest to `target`; throws when the choice is ambiguous.
inline std::size_t nearest_eigenvalue(const std::vector<cplx>& eig, cplx target) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < eig.size(); ++i)
        if (std::abs(eig[i] - target) < std::abs(eig[best] - target)) best = i;
    for (std::size_t i = 0; i < eig.size(); ++i)
        if (i != best && std::abs(eig[i] - target) <= 2.0 * std::abs(eig[best] - target) &&
            std::abs(eig[i] - eig[best]) < 1e-12 * (1.0 + std::abs(target)))
            throw numeric_error("eigenvalue branch choice is ambiguous");
    return best;
}

struct BaseCycle {
    CycleTrack cycle;
    cplx lambda;
    int k = 1;
};

} // namespace detail

/// Rank certificate of the multiplier functions of an affine witness set at `base`.
inline RankReport rank_certificate(const PolyMapDense& base, const WitnessSet& ws, double h,
                                   const Tolerances& tol = {}, int continuation_steps = 16) {
    detail::require(ws.setting == Setting::affine, "rank_certificate expects an affine witness set");
    detail::require(base.dim() == ws.n && base.degree() == ws.d, "base map shape does not match the witness set");
    detail::require(h > 0.0, "finite-difference step must be positive");
    const int n = ws.n, d = ws.d;
    const auto N = ws.columns.size();
    const auto total = static_cast<Eigen::Index>(static_cast<std::size_t>(n) * N);
    const PolyMapDense F0 = PolyMapDense::power_map(n, d);

    RankReport rep;
    rep.h = h;
    std::vector<cplx> seg;
    for (int i = 0; i <= continuation_steps; ++i) seg.emplace_back(static_cast<double>(i) / continuation_steps, 0.0);
    auto along = [&](cplx s) { return F0.lerp(base, s); };

    // continue every witness orbit to the base and pick its multiplier branch
    std::vector<detail::BaseCycle> cycles(static_cast<std::size_t>(total));
    parallel_for(static_cast<std::size_t>(total), [&](std::size_t row) {
        const int k = static_cast<int>(row / N) + 1;
        const auto& w = ws.points[static_cast<std::size_t>(k - 1)][row % N];
        const int p = ws.periods[static_cast<std::size_t>(k - 1)][row % N];
        const auto start = solve_cycle(F0, p, to_cvec(to_complex(w)), tol);
        cycles[row] = {track_path(along, std::span<const cplx>(seg), start, tol), {}, k};
    });
    double lambda_scale = 0.0;
    for (const auto& bc : cycles) {
        const double gap = detail::min_pairwise_gap(bc.cycle.eigenvalues);
        rep.min_eigen_gap = std::min(rep.min_eigen_gap, gap);
        rep.min_parabolic_gap = std::min(rep.min_parabolic_gap, bc.cycle.parabolic_gap);
        for (const auto& l : bc.cycle.eigenvalues) lambda_scale = std::max(lambda_scale, std::abs(l));
    }
    if (!(rep.min_eigen_gap > 1e-8 * (1.0 + lambda_scale)))
        throw precondition_error("base map has a witness cycle with a repeated multiplier (min gap " +
                                 std::to_string(rep.min_eigen_gap) + "); it must lie off the power map");
    if (rep.min_parabolic_gap < tol.parab)
        throw precondition_error("base map has a witness cycle with a multiplier within tau_parab of 1");
    // the multiplier continuing rho_k is the one nearest the (k,k) entry
    for (auto& bc : cycles) {
        const cplx diag = bc.cycle.cycle_jacobian(bc.k - 1, bc.k - 1);
        bc.lambda = bc.cycle.eigenvalues[detail::nearest_eigenvalue(bc.cycle.eigenvalues, diag)];
    }

    // lambda of one cycle under base + t z^I e_m
    auto lambda_at = [&](const detail::BaseCycle& bc, int m, const MultiIndex& I, double t) {
        const auto F = base.plus_monomial(m - 1, I.entries, t);
        const auto c = solve_cycle(F, bc.cycle.period, bc.cycle.base(), tol, 60);
        const auto idx = detail::nearest_eigenvalue(c.eigenvalues, bc.lambda);
        const double drift = std::abs(c.eigenvalues[idx] - bc.lambda);
        for (std::size_t i = 0; i < c.eigenvalues.size(); ++i)
            if (i != idx && std::abs(c.eigenvalues[i] - bc.lambda) <= 2.0 * drift)
                throw numeric_error("eigenvalue collision along the finite-difference probe");
        return c.eigenvalues[idx];
    };
    auto central = [&](const detail::BaseCycle& bc, int m, const MultiIndex& I, double step) {
        return (lambda_at(bc, m, I, step) - lambda_at(bc, m, I, -step)) / (2.0 * step);
    };

    rep.jacobian = CMat::Zero(total, total);
    parallel_for(static_cast<std::size_t>(total * total), [&](std::size_t cell) {
        const auto row = cell / static_cast<std::size_t>(total), col = cell % static_cast<std::size_t>(total);
        const int m = static_cast<int>(col / N) + 1;
        const auto& I = ws.columns[col % N];
        const auto& bc = cycles[row];
        const cplx Dh = central(bc, m, I, h), Dh2 = central(bc, m, I, 0.5 * h);
        rep.jacobian(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = (4.0 * Dh2 - Dh) / 3.0;
    });

    Eigen::JacobiSVD<CMat> svd(rep.jacobian);
    const auto& s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) rep.singular_values.push_back(s[i]);
    const double smax = s.size() ? s[0] : 0.0;
    rep.rank_at_tol = static_cast<int>(std::count_if(rep.singular_values.begin(), rep.singular_values.end(),
                                                     [&](double v) { return v > tol.rank * smax; }));
    rep.smin_over_smax = smax > 0.0 ? s[s.size() - 1] / smax : 0.0;
    rep.certified_full_rank = smax > 0.0 && rep.smin_over_smax > tol.rank;

    rep.closed_form_matrix = CMat::Zero(total, total);
    for (Eigen::Index row = 0; row < total; ++row) {
        const auto& bc = cycles[static_cast<std::size_t>(row)];
        const auto& w = ws.points[static_cast<std::size_t>(bc.k - 1)][static_cast<std::size_t>(row) % N];
        const int p = ws.periods[static_cast<std::size_t>(bc.k - 1)][static_cast<std::size_t>(row) % N];
        for (Eigen::Index col = 0; col < total; ++col) {
            const int m = static_cast<int>(static_cast<std::size_t>(col) / N) + 1;
            const auto& I = ws.columns[static_cast<std::size_t>(col) % N];
            rep.closed_form_matrix(row, col) = partial_rho_affine({d, n, p, bc.k, m, I, w});
            if (m != bc.k) rep.off_block_max = std::max(rep.off_block_max, std::abs(rep.jacobian(row, col)));
        }
    }
    rep.max_closed_form_deviation = (rep.jacobian - rep.closed_form_matrix).cwiseAbs().maxCoeff();
    return rep;
}

} // namespace multispec
