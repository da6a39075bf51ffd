#pragma once

/**
 * @file monodromy.hpp
 * @brief Loop families in parameter space, the permutation of marked
 *        periodic points (and eigendirections) they induce, and the disc
 *        chain certificate behind hyperbolic compositions z -> P_i(z) - b a_i.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "continuation.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "polymap.hpp"
#include "tolerances.hpp"

namespace multispec {

enum class FamilyId { unicritical_1d, skew_prop23, G_c_alpha_eps, eigendir_Gt, custom };

inline const char* to_string(FamilyId f) {
    switch (f) {
    case FamilyId::unicritical_1d: return "unicritical_1d";
    case FamilyId::skew_prop23: return "skew_prop23";
    case FamilyId::G_c_alpha_eps: return "G_c_alpha_eps";
    case FamilyId::eigendir_Gt: return "eigendir_Gt";
    default: return "custom";
    }
}

inline FamilyId parse_family(const std::string& s) {
    for (auto f : {FamilyId::unicritical_1d, FamilyId::skew_prop23, FamilyId::G_c_alpha_eps, FamilyId::eigendir_Gt,
                   FamilyId::custom})
        if (s == to_string(f)) return f;
    throw precondition_error("unknown loop family '" + s +
                             "' (expected unicritical_1d, skew_prop23, G_c_alpha_eps, eigendir_Gt or custom)");
}

struct MarkedSeed {
    CVec seed;
    int period = 1;
};

/// A closed loop s(t) in the parameter of a one-parameter family.
///
/// Families (s is the loop parameter):
///   unicritical_1d  z^d + s
///   skew_prop23     (u_1^d, ..., u_{n-1}^d, u_n^d + s + b * sum_j h_j u_j)
///   G_c_alpha_eps   (x^d + alpha*y + s, y^d + eps)
///   eigendir_Gt     (x^d + theta*x + s*y, y^d + c + alpha*x)
///   custom          base + s * direction
struct LoopSpec {
    FamilyId family = FamilyId::unicritical_1d;
    std::map<std::string, cplx> params;
    std::vector<cplx> path;
    std::vector<MarkedSeed> marked;
    bool track_eigendirections = false;
    std::optional<PolyMapDense> custom_base;
    std::optional<PolyMapDense> custom_direction;
};

/// Closed polygon center + r e^{2 pi i t} with `steps` segments; last == first exactly.
inline std::vector<cplx> circle_path(cplx center, double radius, int steps) {
    detail::require(steps >= 3, "a circle needs at least 3 steps");
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i < steps; ++i) out.push_back(center + std::polar(radius, 2.0 * std::numbers::pi * i / steps));
    out.push_back(out.front());
    return out;
}

namespace detail {

inline cplx param(const LoopSpec& spec, const std::string& name, std::optional<cplx> fallback = std::nullopt) {
    const auto it = spec.params.find(name);
    if (it != spec.params.end()) return it->second;
    if (fallback) return *fallback;
    throw precondition_error(std::string("family ") + to_string(spec.family) + " needs parameter '" + name + "'");
}

inline int int_param(const LoopSpec& spec, const std::string& name, int fallback) {
    const cplx v = param(spec, name, cplx(fallback, 0.0));
    const double r = std::round(v.real());
    require(v.imag() == 0.0 && r == v.real(), "parameter '" + name + "' must be an integer");
    return static_cast<int>(r);
}

} // namespace detail

/// s -> F_s for the spec's family.
inline std::function<PolyMapDense(cplx)> make_family(const LoopSpec& spec) {
    const int d = detail::int_param(spec, "d", 2);
    detail::require(d >= 2, "family degree d must be >= 2");
    switch (spec.family) {
    case FamilyId::unicritical_1d:
        return [d](cplx s) {
            const cplx c[1] = {s};
            return PolyMapDense::unicritical(d, c);
        };
    case FamilyId::skew_prop23: {
        const int n = detail::int_param(spec, "n", 2);
        detail::require(n >= 2, "skew_prop23 needs n >= 2");
        const cplx b = detail::param(spec, "b", cplx{0.0, 0.0});
        std::vector<cplx> h;
        for (int j = 1; j < n; ++j) h.push_back(detail::param(spec, "h" + std::to_string(j), cplx{1.0, 0.0}));
        PolyMapDense base = PolyMapDense::power_map(n, d);
        for (int j = 0; j < n - 1; ++j) {
            std::vector<int> e(static_cast<std::size_t>(n), 0);
            e[static_cast<std::size_t>(j)] = 1;
            base.add_term(n - 1, e, b * h[static_cast<std::size_t>(j)]);
        }
        const std::vector<int> one(static_cast<std::size_t>(n), 0);
        return [base, n, one](cplx s) { return base.plus_monomial(n - 1, one, s); };
    }
    case FamilyId::G_c_alpha_eps: {
        const cplx alpha = detail::param(spec, "alpha"), eps = detail::param(spec, "eps", cplx{0.0, 0.0});
        PolyMapDense base = PolyMapDense::power_map(2, d);
        base.add_term(0, {0, 1}, alpha);
        base.add_term(1, {0, 0}, eps);
        return [base](cplx s) { return base.plus_monomial(0, {0, 0}, s); };
    }
    case FamilyId::eigendir_Gt: {
        const cplx theta = detail::param(spec, "theta"), c = detail::param(spec, "c"), alpha = detail::param(spec, "alpha");
        PolyMapDense base = PolyMapDense::power_map(2, d);
        base.add_term(0, {1, 0}, theta);
        base.add_term(1, {0, 0}, c);
        base.add_term(1, {1, 0}, alpha);
        return [base](cplx s) { return base.plus_monomial(0, {0, 1}, s); };
    }
    default: {
        detail::require(spec.custom_base.has_value() && spec.custom_direction.has_value(),
                        "custom family needs a base map and a direction map");
        const PolyMapDense base = *spec.custom_base;
        const PolyMapDense dir = *spec.custom_direction;
        detail::require(base.dim() == dir.dim() && base.degree() == dir.degree(),
                        "custom base and direction must have equal shape");
        return [base, dir](cplx s) { return base.plus_scaled(dir, s); };
    }
    }
}

struct PermutationResult {
    std::vector<int> mapping;          ///< label -> label
    std::vector<CVec> points;          ///< labelled points at the basepoint
    std::vector<int> successor;        ///< label of F(point)
    bool commutes_with_dynamics = false;
    std::vector<int> cycle_structure;  ///< sorted cycle lengths of `mapping`
    std::vector<std::pair<int, bool>> eigendirection_swaps;
    double min_parabolic_gap = std::numeric_limits<double>::infinity();
    double min_eigen_gap = std::numeric_limits<double>::infinity();
    std::vector<std::string> warnings;
};

/// b after a: (compose(a, b))[i] = b[a[i]].
inline std::vector<int> compose(const std::vector<int>& a, const std::vector<int>& b) {
    detail::require(a.size() == b.size(), "permutations of different sizes");
    std::vector<int> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = b[static_cast<std::size_t>(a[i])];
    return out;
}

inline std::vector<int> inverse(const std::vector<int>& a) {
    std::vector<int> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[static_cast<std::size_t>(a[i])] = static_cast<int>(i);
    return out;
}

inline std::vector<int> cycle_lengths(const std::vector<int>& perm) {
    std::vector<int> out;
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        if (seen[i]) continue;
        int len = 0;
        for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(perm[j])) {
            seen[j] = true;
            ++len;
        }
        out.push_back(len);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

/// Label of the unique start point within `tol_rel * (1 + |z|)` of z; throws
/// on no match or on an ambiguous match.
inline int match_point(const std::vector<CVec>& pts, const CVec& z, double tol_rel, const char* what) {
    int hit = -1;
    const double radius = tol_rel * (1.0 + z.norm());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if ((pts[i] - z).norm() <= radius) {
            if (hit >= 0) throw numeric_error(std::string("ambiguous ") + what + ": two marked points lie within " +
                                              std::to_string(radius) + " of one endpoint");
            hit = static_cast<int>(i);
        }
    }
    if (hit < 0) throw numeric_error(std::string("no marked point matches the ") + what);
    return hit;
}

} // namespace detail

/// Track every marked point around the loop and read off the permutation.
inline PermutationResult run_loop(const LoopSpec& spec, const Tolerances& tol = {}) {
    detail::require(spec.path.size() >= 2, "loop path needs at least two points");
    detail::require(std::abs(spec.path.front() - spec.path.back()) <= 1e-12 * (1.0 + std::abs(spec.path.front())),
                    "loop path must be closed (first point == last point)");
    detail::require(!spec.marked.empty(), "loop needs at least one marked seed");
    std::vector<cplx> path = spec.path;
    path.back() = path.front();
    const auto fam = make_family(spec);
    const PolyMapDense F = fam(path.front());

    // label all points of the marked cycles in lexicographic order
    struct Labelled {
        CVec z;
        int period;
    };
    std::vector<Labelled> pts;
    const double same = 1e-8;
    for (const auto& m : spec.marked) {
        detail::require(m.seed.size() == F.dim(), "marked seed has the wrong dimension");
        const auto c = solve_cycle(F, m.period, m.seed, tol);
        if (c.parabolic) throw precondition_error("marked cycle is parabolic at the basepoint");
        for (const auto& z : c.points) {
            const bool dup = std::any_of(pts.begin(), pts.end(), [&](const Labelled& q) {
                return (q.z - z).norm() <= same * (1.0 + z.norm());
            });
            if (!dup) pts.push_back({z, c.exact_period});
        }
    }
    std::sort(pts.begin(), pts.end(), [](const Labelled& a, const Labelled& b) { return detail::lex_less(a.z, b.z); });

    PermutationResult res;
    for (const auto& q : pts) res.points.push_back(q.z);
    const std::size_t L = pts.size();
    res.successor.resize(L);
    for (std::size_t i = 0; i < L; ++i) res.successor[i] = detail::match_point(res.points, F.eval(pts[i].z), 1e-9, "image point");

    TrackOptions opt;
    opt.follow_eigenvalues = spec.track_eigendirections;
    std::vector<CycleTrack> starts(L), ends(L);
    std::vector<PathResult> tracks(L);
    for (std::size_t i = 0; i < L; ++i) starts[i] = solve_cycle(F, pts[i].period, pts[i].z, tol);
    parallel_for(L, [&](std::size_t i) { tracks[i] = track_path_detailed(fam, std::span<const cplx>(path), starts[i], tol, opt); });

    res.mapping.resize(L);
    for (std::size_t i = 0; i < L; ++i) {
        res.mapping[i] = detail::match_point(res.points, tracks[i].end.base(), 10.0 * tol.newton, "loop endpoint");
        res.min_parabolic_gap = std::min(res.min_parabolic_gap, tracks[i].min_parabolic_gap);
        res.min_eigen_gap = std::min(res.min_eigen_gap, tracks[i].min_eigen_gap);
    }
    res.commutes_with_dynamics = true;
    for (std::size_t i = 0; i < L; ++i)
        if (res.mapping[static_cast<std::size_t>(res.successor[i])] != res.successor[static_cast<std::size_t>(res.mapping[i])])
            res.commutes_with_dynamics = false;
    res.cycle_structure = cycle_lengths(res.mapping);

    if (spec.track_eigendirections) {
        for (std::size_t i = 0; i < L; ++i) {
            const auto& target = starts[static_cast<std::size_t>(res.mapping[i])].eigenvalues;
            const auto& br = tracks[i].branches;
            const auto perm = detail::match_eigenvalues(target, br);
            // perm[j]: branch landing on target eigenvalue j; a start branch j ending elsewhere is a swap
            bool swapped = false;
            for (std::size_t j = 0; j < perm.size(); ++j)
                if (perm[j] != j) swapped = true;
            res.eigendirection_swaps.emplace_back(static_cast<int>(i), swapped);
        }
    }
    return res;
}

/// The eigenvalue-swap desk instance: fixed point of
/// H_eps(x, y) = (x^2 + theta x + eps y, y^2 + c + alpha x), c = theta/2 - theta^2/4,
/// continued along eps = center + r e^{2 pi i t}.
inline PermutationResult eigendirection_swap_loop(cplx theta, double alpha, double eps_radius, int steps,
                                                  cplx center = {0.0, 0.0}, const Tolerances& tol = {}) {
    detail::require(eps_radius > 0.0, "eps radius must be positive");
    LoopSpec spec;
    spec.family = FamilyId::eigendir_Gt;
    spec.params = {{"d", 2.0}, {"theta", theta}, {"c", theta / 2.0 - theta * theta / 4.0}, {"alpha", alpha}};
    spec.path = circle_path(center, eps_radius, steps);
    CVec seed(2);
    seed << 0.0, theta / 2.0;
    if (spec.path.front() != cplx{0.0, 0.0}) {
        // the known fixed point lives at eps = 0; carry it to the basepoint first
        const auto fam = make_family(spec);
        std::vector<cplx> lead;
        for (int i = 0; i <= 64; ++i) lead.push_back(spec.path.front() * (i / 64.0));
        seed = track_path(fam, std::span<const cplx>(lead), solve_cycle(fam(0.0), 1, seed, tol), tol).base();
    }
    spec.marked.push_back({seed, 1});
    spec.track_eigendirections = true;
    auto res = run_loop(spec, tol);
    if (alpha == 0.0) res.warnings.push_back("alpha = 0: no Jordan coupling, the eigenvalue branches do not braid");
    if (!(res.min_eigen_gap > 1e-12)) throw numeric_error("eigenvalue branches fail to separate along the loop");
    return res;
}

/// Validity radius eps' for the disc condition {|z^d - 1| <= 2 eps} in d discs of radius eps'.
inline double disc_condition_radius(int d, double eps) {
    double worst = 0.0;
    for (int i = 0; i < 4096; ++i) {
        const cplx w = 1.0 + 2.0 * eps * std::polar(1.0, 2.0 * std::numbers::pi * i / 4096.0);
        worst = std::max(worst, std::abs(std::pow(w, 1.0 / d) - 1.0));
    }
    return worst;
}

/// A = (4 / eps) (M / m^d)^{1/(d-1)}.
inline double hyperbolicity_bound(int d, double eps, double m, double M) {
    detail::require(d >= 2, "degree d must be >= 2");
    detail::require(m > 0.0 && m <= M, "need 0 < m <= M");
    detail::require(eps > 0.0 && 2.0 * eps < 1.0, "eps must lie in (0, 1/2)");
    const double eps1 = disc_condition_radius(d, eps);
    if (!(eps1 < std::min(1.0, std::sin(std::numbers::pi / d))))
        throw precondition_error("eps = " + std::to_string(eps) + " is too large for d = " + std::to_string(d) +
                                 ": the d preimage discs are not disjoint");
    return 4.0 / eps * std::pow(M / std::pow(m, d), 1.0 / (d - 1));
}

struct ChainCertificate {
    bool certified = false;
    std::vector<double> radii;            ///< R_1..R_N (R_0 = R_N)
    std::vector<double> margins;          ///< R_{i-1} - max |preimage| per map
    std::vector<double> relative_margins;
    double min_derivative = std::numeric_limits<double>::infinity();
    bool expansion_ok = false;
    int samples = 0;
};

/// Roots of the monic polynomial with coefficients a_0..a_{d-1} (z^d + ... + a_0).
inline std::vector<cplx> monic_roots(const std::vector<cplx>& a) {
    const auto d = static_cast<Eigen::Index>(a.size());
    detail::require(d >= 1, "polynomial degree must be >= 1");
    CMat comp = CMat::Zero(d, d);
    for (Eigen::Index i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < d; ++i) comp(i, d - 1) = -a[static_cast<std::size_t>(i)];
    Eigen::ComplexEigenSolver<CMat> es(comp, false);
    if (es.info() != Eigen::Success) throw numeric_error("root solver failed");
    std::vector<cplx> roots;
    for (Eigen::Index i = 0; i < d; ++i) {
        cplx z = es.eigenvalues()[i];
        for (int it = 0; it < 3; ++it) {
            cplx f = 1.0, df = 0.0;
            for (Eigen::Index j = d - 1; j >= 0; --j) {
                df = df * z + f;
                f = f * z + a[static_cast<std::size_t>(j)];
            }
            if (std::abs(df) == 0.0) break;
            z -= f / df;
        }
        roots.push_back(z);
    }
    return roots;
}

/// Checks f_i^{-1}(D(0, R_i)) in D(0, R_{i-1}) for f_i = P_i - b alpha_i, R_i = eps |b alpha_i|,
/// by solving P_i(z) = b alpha_i + w on `samples` boundary points w, plus min |P_i'| >= C there.
/// polys[i] holds the non-leading coefficients a_0..a_{d-1} of the monic P_i.
inline ChainCertificate disc_chain_certificate(const std::vector<std::vector<cplx>>& polys,
                                               const std::vector<cplx>& alphas, cplx b, double eps,
                                               double expansion = 1.0, int samples = 512) {
    detail::require(!polys.empty() && polys.size() == alphas.size(), "need as many alphas as polynomials");
    detail::require(samples >= 512, "use at least 512 boundary samples");
    detail::require(eps > 0.0, "eps must be positive");
    for (const auto& a : alphas) detail::require(a != cplx{0.0, 0.0}, "alphas must be nonzero");
    const std::size_t N = polys.size();
    ChainCertificate cert;
    cert.samples = samples;
    for (std::size_t i = 0; i < N; ++i) cert.radii.push_back(eps * std::abs(b * alphas[i]));
    bool ok = true;
    for (std::size_t i = 0; i < N; ++i) {
        const double R = cert.radii[i];
        const double Rprev = cert.radii[(i + N - 1) % N];
        double reach = 0.0;
        for (int s = 0; s < samples; ++s) {
            const cplx w = std::polar(R, 2.0 * std::numbers::pi * s / samples);
            std::vector<cplx> a = polys[i];
            a[0] -= b * alphas[i] + w;
            for (const auto& z : monic_roots(a)) {
                reach = std::max(reach, std::abs(z));
                cplx dp = static_cast<double>(a.size());  // Horner for P_i'
                for (std::size_t j = a.size() - 1; j >= 1; --j) dp = dp * z + static_cast<double>(j) * a[j];
                cert.min_derivative = std::min(cert.min_derivative, std::abs(dp));
            }
        }
        const double margin = Rprev - reach;
        if (std::abs(margin) < 1e-6 * Rprev)
            throw numeric_error("disc inclusion is inconclusive for map " + std::to_string(i + 1) +
                                " (margin " + std::to_string(margin) + ")");
        cert.margins.push_back(margin);
        cert.relative_margins.push_back(margin / Rprev);
        ok = ok && margin > 0.0;
    }
    cert.expansion_ok = cert.min_derivative >= expansion;
    cert.certified = ok && cert.expansion_ok;
    return cert;
}

} // namespace multispec
