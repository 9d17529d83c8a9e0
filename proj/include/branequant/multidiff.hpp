#pragma once

#include "branequant/polynomial.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace branequant {

/// Multidifferential operator: a sum of terms
///   coeff(x) * D^{m_1} (.) (x) ... (x) D^{m_arity} (.)
/// where m_s is a derivative multi-index for argument slot s. An arity-0
/// operator is a plain function (apply with no arguments returns the sum
/// of coefficients).
template <typename R>
struct MultiDiffOp {
    struct Term {
        Polynomial<R> coeff;
        std::vector<std::vector<int>> partials;  // one multi-index per slot
    };

    int dim = 0;
    int arity = 0;
    std::vector<Term> terms;

    MultiDiffOp() = default;
    MultiDiffOp(int dim_, int arity_) : dim(dim_), arity(arity_) {
        if (arity_ < 0) throw std::invalid_argument("MultiDiffOp: negative arity");
    }

    bool is_zero() const {
        for (const auto& t : terms)
            if (!t.coeff.is_zero()) return false;
        return true;
    }

    void add_term(Polynomial<R> coeff, std::vector<std::vector<int>> partials) {
        if (static_cast<int>(partials.size()) != arity)
            throw std::invalid_argument("MultiDiffOp: slot count != arity");
        for (const auto& m : partials)
            if (static_cast<int>(m.size()) != dim)
                throw std::invalid_argument("MultiDiffOp: multi-index length != dim");
        if (coeff.is_zero()) return;
        for (auto& t : terms) {
            if (t.partials == partials) {
                t.coeff += coeff;
                return;
            }
        }
        terms.push_back({std::move(coeff), std::move(partials)});
    }

    void add_scaled(const MultiDiffOp& o, const R& s) {
        if (o.dim != dim || o.arity != arity)
            throw std::invalid_argument("MultiDiffOp: shape mismatch");
        for (const auto& t : o.terms) add_term(s * t.coeff, t.partials);
    }

    /// Drop terms whose coefficient cancelled to zero.
    void compress() {
        std::erase_if(terms, [](const Term& t) { return t.coeff.is_zero(); });
    }

    Polynomial<R> apply(std::span<const Polynomial<R>> args) const {
        if (static_cast<int>(args.size()) != arity)
            throw std::invalid_argument("MultiDiffOp: arity mismatch");
        Polynomial<R> out(dim);
        for (const auto& t : terms) {
            Polynomial<R> prod = t.coeff;
            for (int s = 0; s < arity && !prod.is_zero(); ++s)
                prod *= args[s].diff_multi(t.partials[s]);
            out += prod;
        }
        return out;
    }
    Polynomial<R> apply(std::initializer_list<Polynomial<R>> args) const {
        return apply(std::span<const Polynomial<R>>(args.begin(), args.size()));
    }

    double max_abs_coeff() const {
        double m = 0;
        for (const auto& t : terms) m = std::max(m, t.coeff.max_abs_coeff());
        return m;
    }

    template <typename T, typename F>
    MultiDiffOp<T> map_coeffs(F&& f) const {
        MultiDiffOp<T> r(dim, arity);
        for (const auto& t : terms)
            r.add_term(t.coeff.template map_coeffs<T>(f), t.partials);
        return r;
    }
};

} // namespace branequant
