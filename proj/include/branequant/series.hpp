#pragma once

#include "branequant/polynomial.hpp"

#include <stdexcept>
#include <vector>

namespace branequant {

/// Truncated formal power series in the deformation parameter eps with
/// Polynomial<R> coefficients. eps is never substituted numerically; the
/// truncation order is explicit in every operation. `errs[k]` carries the
/// propagated standard-error budget of coefficient k (0 for exact data).
template <typename R>
struct EpsSeries {
    int dim = 0;
    int order = 0;                        // K: coefficients for eps^0 .. eps^K
    std::vector<Polynomial<R>> coeffs;    // size order+1
    std::vector<double> errs;             // size order+1

    EpsSeries() = default;
    EpsSeries(int dim_, int order_)
        : dim(dim_), order(order_),
          coeffs(order_ + 1, Polynomial<R>(dim_)), errs(order_ + 1, 0.0) {
        if (order_ < 0) throw std::invalid_argument("EpsSeries: negative order");
    }

    static EpsSeries from_poly(const Polynomial<R>& p, int order) {
        EpsSeries s(p.dim(), order);
        s.coeffs[0] = p;
        return s;
    }

    Polynomial<R>& at(int k) { return coeffs.at(k); }
    const Polynomial<R>& at(int k) const { return coeffs.at(k); }

    bool is_zero() const {
        for (const auto& c : coeffs)
            if (!c.is_zero()) return false;
        return true;
    }

    EpsSeries truncated(int K) const {
        if (K > order) throw std::invalid_argument("EpsSeries: insufficient truncation order");
        EpsSeries r(dim, K);
        for (int k = 0; k <= K; ++k) { r.coeffs[k] = coeffs[k]; r.errs[k] = errs[k]; }
        return r;
    }

    friend EpsSeries operator+(const EpsSeries& a, const EpsSeries& b) {
        int K = std::min(a.order, b.order);
        EpsSeries r(a.check_dim(b), K);
        for (int k = 0; k <= K; ++k) {
            r.coeffs[k] = a.coeffs[k] + b.coeffs[k];
            r.errs[k] = a.errs[k] + b.errs[k];
        }
        return r;
    }
    friend EpsSeries operator-(const EpsSeries& a, const EpsSeries& b) {
        int K = std::min(a.order, b.order);
        EpsSeries r(a.check_dim(b), K);
        for (int k = 0; k <= K; ++k) {
            r.coeffs[k] = a.coeffs[k] - b.coeffs[k];
            r.errs[k] = a.errs[k] + b.errs[k];
        }
        return r;
    }

    int check_dim(const EpsSeries& o) const {
        if (dim != o.dim) throw std::invalid_argument("EpsSeries: dim mismatch");
        return dim;
    }
};

/// Truncated Cauchy product; both factors must be truncated at >= K.
template <typename R>
EpsSeries<R> series_mul(const EpsSeries<R>& a, const EpsSeries<R>& b, int K) {
    if (a.order < K || b.order < K)
        throw std::invalid_argument("series_mul: insufficient truncation order");
    EpsSeries<R> r(a.check_dim(b), K);
    for (int k = 0; k <= K; ++k) {
        for (int i = 0; i <= k; ++i) {
            r.coeffs[k] += a.coeffs[i] * b.coeffs[k - i];
            // first-order error propagation through the bilinear product
            r.errs[k] += a.errs[i] * b.coeffs[k - i].max_abs_coeff() +
                         a.coeffs[i].max_abs_coeff() * b.errs[k - i];
        }
    }
    return r;
}

} // namespace branequant
