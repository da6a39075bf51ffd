#pragma once

/**
 * @file combinatorics.hpp
 * @brief Dimension formulas and admissible perturbation directions.
 *
 * A perturbation direction of the power map is a monomial z^I placed in one
 * output coordinate. In the affine setting I has n entries and |I| <= d; in
 * the projective setting I has n+1 entries (leading entry for the
 * homogenizing coordinate z_0) and |I| = d. Admissible indices are the ones
 * whose monomial keeps the normalized family normalized; there are exactly
 * N_{d,n} = binom(d+n, n) - n - 1 of them in either setting.
 */

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"

namespace multispec {

enum class Setting { affine, projective };

inline const char* to_string(Setting s) { return s == Setting::affine ? "affine" : "projective"; }

/// Exponent vector indexing a monomial perturbation direction.
struct MultiIndex {
    std::vector<int> entries;
    Setting setting = Setting::affine;

    int total() const { return std::accumulate(entries.begin(), entries.end(), 0); }
    std::size_t size() const { return entries.size(); }
    int operator[](std::size_t i) const { return entries[i]; }

    /// Affine part (i_1..i_n) of a projective index; identity for affine ones.
    std::vector<int> affine_part() const {
        if (setting == Setting::affine) return entries;
        return {entries.begin() + 1, entries.end()};
    }

    std::string str() const {
        std::string out = "(";
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(entries[i]);
        }
        return out + ")";
    }

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

struct SpaceDims {
    int d = 0;
    int n = 0;
    std::int64_t N_dn = 0;
    std::int64_t affine_moduli_dim = 0;
    std::int64_t proj_moduli_dim = 0;
    std::int64_t coeff_count = 0;
};

inline std::int64_t binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t r = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        // r * (n-k+i) / i stays integral at every step
        if (r > std::numeric_limits<std::int64_t>::max() / (n - k + i))
            throw precondition_error("binomial coefficient overflows 64 bits");
        r = r * (n - k + i) / i;
    }
    return r;
}

inline SpaceDims space_dims(int d, int n) {
    detail::require(d >= 2, "degree d must be >= 2");
    detail::require(n >= 1, "dimension n must be >= 1");
    SpaceDims s;
    s.d = d;
    s.n = n;
    const std::int64_t b = binomial(d + n, n);
    s.N_dn = b - n - 1;
    s.affine_moduli_dim = n * s.N_dn;
    s.proj_moduli_dim = (n + 1) * s.N_dn;
    s.coeff_count = n * b;
    return s;
}

/// All exponent vectors of length `vars` with total exactly `degree`,
/// in descending lexicographic order ((2,0) before (1,1) before (0,2)).
inline std::vector<std::vector<int>> homogeneous_exponents(int vars, int degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(vars), 0);
    auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == vars - 1) {
            cur[pos] = left;
            out.push_back(cur);
            return;
        }
        for (int e = left; e >= 0; --e) {
            cur[pos] = e;
            self(self, pos + 1, left - e);
        }
    };
    if (vars > 0) rec(rec, 0, degree);
    return out;
}

/// All exponent vectors of length `vars` with total <= max_degree in graded
/// lexicographic order: by total degree, then descending lex within a degree.
inline std::vector<std::vector<int>> graded_exponents(int vars, int max_degree) {
    std::vector<std::vector<int>> out;
    for (int t = 0; t <= max_degree; ++t) {
        auto layer = homogeneous_exponents(vars, t);
        out.insert(out.end(), layer.begin(), layer.end());
    }
    return out;
}

inline bool is_admissible(const MultiIndex& I, int d) {
    const bool no_full_power = std::none_of(I.entries.begin(), I.entries.end(), [d](int e) { return e == d; });
    const bool nonneg = std::all_of(I.entries.begin(), I.entries.end(), [](int e) { return e >= 0; });
    if (!nonneg || !no_full_power) return false;
    if (I.setting == Setting::affine) return I.total() >= 1 && I.total() <= d;
    return I.total() == d;
}

/// The N_{d,n} admissible indices in graded lexicographic order. The order is
/// part of the contract: witness matrices use it for their columns.
inline std::vector<MultiIndex> enumerate_admissible(int d, int n, Setting setting) {
    detail::require(d >= 2, "degree d must be >= 2");
    detail::require(n >= 1, "dimension n must be >= 1");
    std::vector<std::vector<int>> pool = setting == Setting::affine ? graded_exponents(n, d)
                                                                    : homogeneous_exponents(n + 1, d);
    std::vector<MultiIndex> out;
    for (auto& e : pool) {
        MultiIndex I{std::move(e), setting};
        if (is_admissible(I, d)) out.push_back(std::move(I));
    }
    return out;
}

/// I with its k-th entry (1-based) set to zero.
inline MultiIndex drop_k(const MultiIndex& I, int k) {
    detail::require(I.setting == Setting::affine, "drop_k is defined for affine indices");
    detail::require(k >= 1 && k <= static_cast<int>(I.size()), "coordinate index k out of range");
    MultiIndex out = I;
    out.entries[static_cast<std::size_t>(k - 1)] = 0;
    return out;
}

} // namespace multispec
