#pragma once

/**
 * @file polymap.hpp
 * @brief Dense polynomial self-maps of C^n and the SelfMap concept used by
 *        the continuation engine.
 *
 * Coordinates are 0-based here. The derivative/witness layer speaks in the
 * 1-based coordinates k, m of the perturbation directions and converts.
 */

#include <Eigen/Dense>

#include <complex>
#include <concepts>
#include <map>
#include <span>
#include <vector>

#include "combinatorics.hpp"
#include "errors.hpp"

namespace multispec {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Anything the continuation engine can iterate: a holomorphic self-map of
/// C^n with an analytic Jacobian.
template <class M>
concept SelfMap = requires(const M& f, const CVec& z) {
    { f.dim() } -> std::convertible_to<int>;
    { f.eval(z) } -> std::convertible_to<CVec>;
    { f.jacobian(z) } -> std::convertible_to<CMat>;
};

inline CVec to_cvec(std::span<const cplx> v) {
    CVec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

/// z^I for an exponent vector of the same length as z.
inline cplx monomial_value(const CVec& z, std::span<const int> I) {
    cplx v{1.0, 0.0};
    for (std::size_t j = 0; j < I.size(); ++j)
        for (int e = 0; e < I[j]; ++e) v *= z[static_cast<Eigen::Index>(j)];
    return v;
}

/// Degree-d polynomial map C^n -> C^n stored as an n x (#monomials) matrix
/// over the graded monomial basis {z^I : |I| <= d}.
class PolyMapDense {
public:
    PolyMapDense() = default;

    PolyMapDense(int n, int d) : n_(n), d_(d), monomials_(graded_exponents(n, d)) {
        detail::require(n >= 1, "dimension n must be >= 1");
        detail::require(d >= 1, "degree must be >= 1");
        coeffs_ = CMat::Zero(n, static_cast<Eigen::Index>(monomials_.size()));
        for (std::size_t c = 0; c < monomials_.size(); ++c) index_.emplace(monomials_[c], c);
    }

    /// F0(z) = (z_1^d, ..., z_n^d).
    static PolyMapDense power_map(int n, int d) {
        PolyMapDense f(n, d);
        for (int j = 0; j < n; ++j) f.add_term(j, unit_power(n, j, d), 1.0);
        return f;
    }

    /// F_c(z) = (z_1^d + c_1, ..., z_n^d + c_n).
    static PolyMapDense unicritical(int d, std::span<const cplx> c) {
        const int n = static_cast<int>(c.size());
        PolyMapDense f = power_map(n, d);
        const std::vector<int> zero(static_cast<std::size_t>(n), 0);
        for (int j = 0; j < n; ++j) f.add_term(j, zero, c[static_cast<std::size_t>(j)]);
        return f;
    }

    int dim() const { return n_; }
    int degree() const { return d_; }
    const std::vector<std::vector<int>>& monomials() const { return monomials_; }
    const CMat& coefficients() const { return coeffs_; }

    std::size_t monomial_index(const std::vector<int>& I) const {
        const auto it = index_.find(I);
        if (it == index_.end()) throw precondition_error("monomial " + MultiIndex{I, Setting::affine}.str() +
                                                         " is outside the degree-" + std::to_string(d_) + " basis");
        return it->second;
    }

    cplx coeff(int coord, const std::vector<int>& I) const {
        return coeffs_(coord, static_cast<Eigen::Index>(monomial_index(I)));
    }

    void add_term(int coord, const std::vector<int>& I, cplx value) {
        detail::require(coord >= 0 && coord < n_, "output coordinate out of range");
        coeffs_(coord, static_cast<Eigen::Index>(monomial_index(I))) += value;
    }

    /// F + t * z^I e_coord.
    PolyMapDense plus_monomial(int coord, const std::vector<int>& I, cplx t) const {
        PolyMapDense out = *this;
        out.add_term(coord, I, t);
        return out;
    }

    /// (1 - s) * this + s * other (same n and d).
    PolyMapDense lerp(const PolyMapDense& other, cplx s) const {
        detail::require(other.n_ == n_ && other.d_ == d_, "lerp needs maps of equal shape");
        PolyMapDense out = *this;
        out.coeffs_ = (1.0 - s) * coeffs_ + s * other.coeffs_;
        return out;
    }

    /// this + s * other (same n and d).
    PolyMapDense plus_scaled(const PolyMapDense& other, cplx s) const {
        detail::require(other.n_ == n_ && other.d_ == d_, "plus_scaled needs maps of equal shape");
        PolyMapDense out = *this;
        out.coeffs_ += s * other.coeffs_;
        return out;
    }

    /// Homogeneous part of degree exactly d.
    PolyMapDense top_part() const {
        PolyMapDense out(n_, d_);
        for (std::size_t c = 0; c < monomials_.size(); ++c)
            if (MultiIndex{monomials_[c], Setting::affine}.total() == d_)
                out.coeffs_.col(static_cast<Eigen::Index>(c)) = coeffs_.col(static_cast<Eigen::Index>(c));
        return out;
    }

    CVec eval(const CVec& z) const {
        check_dim(z);
        const auto table = powers(z);
        CVec out = CVec::Zero(n_);
        for (std::size_t c = 0; c < monomials_.size(); ++c) {
            const auto col = static_cast<Eigen::Index>(c);
            if (coeffs_.col(col).isZero(0.0)) continue;
            out += coeffs_.col(col) * mono(table, monomials_[c], -1);
        }
        return out;
    }

    CMat jacobian(const CVec& z) const {
        check_dim(z);
        const auto table = powers(z);
        CMat J = CMat::Zero(n_, n_);
        for (std::size_t c = 0; c < monomials_.size(); ++c) {
            const auto col = static_cast<Eigen::Index>(c);
            if (coeffs_.col(col).isZero(0.0)) continue;
            const auto& I = monomials_[c];
            for (int j = 0; j < n_; ++j) {
                if (I[static_cast<std::size_t>(j)] == 0) continue;
                const cplx dm = static_cast<double>(I[static_cast<std::size_t>(j)]) * mono(table, I, j);
                J.col(j) += coeffs_.col(col) * dm;
            }
        }
        return J;
    }

private:
    static std::vector<int> unit_power(int n, int j, int d) {
        std::vector<int> e(static_cast<std::size_t>(n), 0);
        e[static_cast<std::size_t>(j)] = d;
        return e;
    }

    void check_dim(const CVec& z) const {
        if (z.size() != n_) throw precondition_error("point dimension " + std::to_string(z.size()) +
                                                     " does not match map dimension " + std::to_string(n_));
    }

    std::vector<std::vector<cplx>> powers(const CVec& z) const {
        std::vector<std::vector<cplx>> t(static_cast<std::size_t>(n_), std::vector<cplx>(static_cast<std::size_t>(d_ + 1)));
        for (int j = 0; j < n_; ++j) {
            auto& row = t[static_cast<std::size_t>(j)];
            row[0] = 1.0;
            for (int e = 1; e <= d_; ++e) row[static_cast<std::size_t>(e)] = row[static_cast<std::size_t>(e - 1)] * z[j];
        }
        return t;
    }

    // z^I, or d(z^I)/dz_skip divided by the exponent when skip >= 0
    static cplx mono(const std::vector<std::vector<cplx>>& table, const std::vector<int>& I, int skip) {
        cplx v{1.0, 0.0};
        for (std::size_t j = 0; j < I.size(); ++j) {
            int e = I[j];
            if (static_cast<int>(j) == skip) --e;
            v *= table[j][static_cast<std::size_t>(e)];
        }
        return v;
    }

    int n_ = 0;
    int d_ = 0;
    std::vector<std::vector<int>> monomials_;
    std::map<std::vector<int>, std::size_t> index_;
    CMat coeffs_;
};

/// Affine-chart form of the projective perturbation F~ + t P_{0,I~}:
/// F_t(z) = F(z) / (1 + t z^I), I the affine part of I~. Exact in t.
class ChartPerturbation {
public:
    ChartPerturbation(PolyMapDense base, std::vector<int> I, cplx t)
        : base_(std::move(base)), I_(std::move(I)), t_(t) {
        detail::require(static_cast<int>(I_.size()) == base_.dim(), "chart monomial has wrong length");
    }

    int dim() const { return base_.dim(); }

    CVec eval(const CVec& z) const { return base_.eval(z) / denom(z); }

    CMat jacobian(const CVec& z) const {
        const cplx q = denom(z);
        const CVec F = base_.eval(z);
        CMat J = base_.jacobian(z) / q;
        // - F * t * grad(z^I)^T / q^2
        for (int j = 0; j < dim(); ++j) {
            if (I_[static_cast<std::size_t>(j)] == 0) continue;
            std::vector<int> Ij = I_;
            --Ij[static_cast<std::size_t>(j)];
            const cplx g = static_cast<double>(I_[static_cast<std::size_t>(j)]) * monomial_value(z, Ij);
            J.col(j) -= F * (t_ * g / (q * q));
        }
        return J;
    }

private:
    cplx denom(const CVec& z) const { return 1.0 + t_ * monomial_value(z, I_); }

    PolyMapDense base_;
    std::vector<int> I_;
    cplx t_;
};

static_assert(SelfMap<PolyMapDense>);
static_assert(SelfMap<ChartPerturbation>);

} // namespace multispec
