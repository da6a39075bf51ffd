#pragma once

/**
 * @file powerlattice.hpp
 * @brief Exact periodic points of the power map F0(z) = (z_1^d, ..., z_n^d).
 *
 * Every nonzero periodic coordinate of z -> z^d is a root of unity
 * exp(2*pi*i*a/m) with gcd(m, d) = 1; the map acts on it as a -> d*a mod m.
 * Coordinates are kept as integer residues so that equality, period and
 * orbit questions are answered exactly.
 */

#include <algorithm>
#include <cmath>
#include <compare>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace multispec {

using u64 = std::uint64_t;
__extension__ typedef unsigned __int128 u128;
using cplx = std::complex<double>;

/// Largest d^p accepted anywhere in the library.
inline constexpr u64 max_power_value = u64{1} << 62;

/// d^p with an explicit overflow guard at 2^62.
inline u64 checked_pow(u64 d, int p, u64 cap = max_power_value) {
    detail::require(p >= 0, "negative exponent");
    u64 r = 1;
    for (int i = 0; i < p; ++i) {
        if (r > cap / d) throw precondition_error("d^p = " + std::to_string(d) + "^" + std::to_string(p) +
                                                  " exceeds the configured cap");
        r *= d;
    }
    return r;
}

inline u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>((static_cast<u128>(a) * b) % m); }

/// exp(2*pi*i*a/m) at full double precision; exact on the quarter turns.
inline cplx unit_root(u64 a, u64 m) {
    a %= m;
    if ((static_cast<u128>(a) * 4) % m == 0) {
        switch (static_cast<int>((static_cast<u128>(a) * 4) / m)) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
        }
    }
    // symmetric reduction keeps the argument in [-pi, pi]
    const long double num = (2 * static_cast<u128>(a) > m) ? -static_cast<long double>(m - a) : static_cast<long double>(a);
    const long double theta = 2.0L * std::numbers::pi_v<long double> * num / static_cast<long double>(m);
    return {static_cast<double>(std::cos(theta)), static_cast<double>(std::sin(theta))};
}

/// One coordinate of a periodic point: either 0 or the root of unity
/// exp(2*pi*i*a/m). The raw (a, m) pair is kept as constructed; comparisons
/// use the gcd-reduced form.
class RootCoord {
public:
    static RootCoord zero() { return RootCoord{}; }

    static RootCoord angle(u64 a, u64 m) {
        detail::require(m >= 1, "angle modulus must be positive");
        detail::require(a < m, "angle numerator must lie in [0, m)");
        RootCoord c;
        c.zero_ = false;
        c.a_ = a;
        c.m_ = m;
        return c;
    }

    bool is_zero() const { return zero_; }
    u64 numerator() const { return a_; }
    u64 modulus() const { return m_; }

    /// Lowest-terms form (0/m reduces to 0/1).
    RootCoord canonical() const {
        if (zero_) return *this;
        const u64 g = std::gcd(a_, m_);
        return angle(a_ / g, m_ / g);
    }

    /// Image under z -> z^d.
    RootCoord step(int d) const {
        if (zero_) return *this;
        return angle(mulmod(a_, static_cast<u64>(d), m_), m_);
    }

    /// Exact period under z -> z^d. Throws for preperiodic (non-periodic) roots.
    int period(int d) const {
        if (zero_) return 1;
        const RootCoord c = canonical();
        if (std::gcd(c.m_, static_cast<u64>(d)) != 1)
            throw precondition_error("root " + str() + " is not periodic under z^" + std::to_string(d));
        u64 x = c.a_;
        for (int q = 1; q <= 64; ++q) {
            x = mulmod(x, static_cast<u64>(d), c.m_);
            if (x == c.a_) return q;
        }
        throw precondition_error("period of " + str() + " exceeds 64");
    }

    /// Residue of this root with respect to a modulus M that its reduced modulus divides.
    u64 residue_mod(u64 M) const {
        detail::require(!zero_, "zero coordinate has no residue");
        const RootCoord c = canonical();
        detail::require(M % c.m_ == 0, "modulus " + std::to_string(M) + " is not a multiple of " + std::to_string(c.m_));
        return static_cast<u64>((static_cast<u128>(c.a_) * (M / c.m_)) % M);
    }

    cplx to_complex() const { return zero_ ? cplx{0.0, 0.0} : unit_root(a_, m_); }

    /// "zero" or the reduced fraction "a/m".
    std::string str() const {
        if (zero_) return "zero";
        const RootCoord c = canonical();
        return std::to_string(c.a_) + "/" + std::to_string(c.m_);
    }

    friend bool operator==(const RootCoord& x, const RootCoord& y) {
        if (x.zero_ || y.zero_) return x.zero_ == y.zero_;
        const RootCoord a = x.canonical(), b = y.canonical();
        return a.a_ == b.a_ && a.m_ == b.m_;
    }

    /// Zero first, then by the angle fraction a/m.
    friend std::strong_ordering operator<=>(const RootCoord& x, const RootCoord& y) {
        if (x.zero_ || y.zero_) return static_cast<int>(!x.zero_) <=> static_cast<int>(!y.zero_);
        const u128 l = static_cast<u128>(x.a_) * y.m_, r = static_cast<u128>(y.a_) * x.m_;
        return l <=> r;
    }

private:
    RootCoord() = default;
    bool zero_ = true;
    u64 a_ = 0;
    u64 m_ = 1;
};

/// Periodic point of F0 with its period and per-coordinate periods (type).
struct RootPoint {
    int degree = 2;
    std::vector<RootCoord> coords;
    int period = 1;
    std::vector<int> type_vector;

    static RootPoint make(int d, std::vector<RootCoord> coords) {
        detail::require(d >= 2, "degree d must be >= 2");
        detail::require(!coords.empty(), "a point needs at least one coordinate");
        RootPoint pt;
        pt.degree = d;
        pt.coords = std::move(coords);
        pt.type_vector.reserve(pt.coords.size());
        std::int64_t l = 1;
        for (const auto& c : pt.coords) {
            const int q = c.period(d);
            pt.type_vector.push_back(q);
            l = std::lcm(l, static_cast<std::int64_t>(q));
        }
        pt.period = static_cast<int>(l);
        return pt;
    }

    std::size_t dim() const { return coords.size(); }
    bool has_zero() const {
        return std::any_of(coords.begin(), coords.end(), [](const RootCoord& c) { return c.is_zero(); });
    }

    std::string str() const {
        std::string out = "(";
        for (std::size_t i = 0; i < coords.size(); ++i) {
            if (i) out += ',';
            out += coords[i].str();
        }
        return out + ")";
    }

    friend bool operator==(const RootPoint& x, const RootPoint& y) { return x.coords == y.coords; }
    friend std::strong_ordering operator<=>(const RootPoint& x, const RootPoint& y) {
        return std::lexicographical_compare_three_way(x.coords.begin(), x.coords.end(), y.coords.begin(),
                                                      y.coords.end());
    }
};

/// Nonzero solutions of w^(d^p) = w: Angle(a, d^p - 1) for a = 0..d^p-2.
inline std::vector<RootCoord> fix_set(int d, int p) {
    detail::require(d >= 2, "degree d must be >= 2");
    detail::require(p >= 1, "period p must be >= 1");
    const u64 M = checked_pow(static_cast<u64>(d), p) - 1;
    std::vector<RootCoord> out;
    out.reserve(M);
    for (u64 a = 0; a < M; ++a) out.push_back(RootCoord::angle(a, M));
    return out;
}

/// Coordinates of exact period p under z -> z^d (0 included for p = 1).
inline std::vector<RootCoord> per_set(int d, int p) {
    std::vector<RootCoord> out;
    if (p == 1) out.push_back(RootCoord::zero());
    for (auto& c : fix_set(d, p))
        if (c.period(d) == p) out.push_back(c);
    return out;
}

inline int point_period(const RootPoint& pt) { return RootPoint::make(pt.degree, pt.coords).period; }

inline RootPoint step(const RootPoint& pt) {
    RootPoint out = pt;
    for (auto& c : out.coords) c = c.step(pt.degree);
    return out;
}

/// The F0-orbit of pt in dynamical order, rotated to start at its
/// lexicographically least member.
inline std::vector<RootPoint> orbit_of(const RootPoint& pt) {
    std::vector<RootPoint> orbit;
    orbit.reserve(static_cast<std::size_t>(pt.period));
    RootPoint cur = pt;
    for (int i = 0; i < pt.period; ++i) {
        orbit.push_back(cur);
        cur = step(cur);
    }
    const auto least = std::min_element(orbit.begin(), orbit.end());
    std::rotate(orbit.begin(), least, orbit.end());
    return orbit;
}

/// Canonical orbit label: the least member of the orbit.
inline RootPoint orbit_key(const RootPoint& pt) { return orbit_of(pt).front(); }

inline std::vector<cplx> to_complex(const RootPoint& pt) {
    std::vector<cplx> out;
    out.reserve(pt.coords.size());
    for (const auto& c : pt.coords) out.push_back(c.to_complex());
    return out;
}

/// Parse "zero" or "a/m" (w = 1 is "0/1").
inline RootCoord parse_root_coord(const std::string& s) {
    if (s == "zero") return RootCoord::zero();
    const auto slash = s.find('/');
    detail::require(slash != std::string::npos, "root coordinate must be 'a/m' or 'zero': " + s);
    u64 a = 0, m = 0;
    try {
        a = std::stoull(s.substr(0, slash));
        m = std::stoull(s.substr(slash + 1));
    } catch (const std::logic_error&) {
        throw precondition_error("malformed root coordinate: " + s);
    }
    detail::require(m >= 1, "root modulus must be positive: " + s);
    return RootCoord::angle(a % m, m);
}

} // namespace multispec
