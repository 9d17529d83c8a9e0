#pragma once

#include "branequant/rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace branequant {

/// Sparse multivariate polynomial in x^1..x^dim with coefficients in R
/// (R = Rat for exact structural data, R = double once numeric weights
/// have entered). Zero coefficients are never stored; the zero polynomial
/// is the empty term map.
template <typename R>
class Polynomial {
  public:
    using Exps = std::vector<int>;

    Polynomial() : dim_(0) {}
    explicit Polynomial(int dim) : dim_(dim) {
        if (dim < 0) throw std::invalid_argument("Polynomial: negative dim");
    }

    static Polynomial constant(int dim, R c) {
        Polynomial p(dim);
        p.add_term(Exps(dim, 0), std::move(c));
        return p;
    }
    /// The coordinate function x^var, 1-based.
    static Polynomial variable(int dim, int var) {
        Polynomial p(dim);
        Exps e(dim, 0);
        e.at(check_var(dim, var) - 1) = 1;
        p.add_term(std::move(e), R(1));
        return p;
    }

    int dim() const { return dim_; }
    const std::map<Exps, R>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(Exps e, R c) {
        if (static_cast<int>(e.size()) != dim_)
            throw std::invalid_argument("Polynomial: exponent length != dim");
        for (int k : e)
            if (k < 0) throw std::invalid_argument("Polynomial: negative exponent");
        if (coeff_is_zero(c)) return;
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            terms_.emplace(std::move(e), std::move(c));
        } else {
            it->second += c;
            if (coeff_is_zero(it->second)) terms_.erase(it);
        }
    }

    Polynomial& operator+=(const Polynomial& o) {
        check_same_dim(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        check_same_dim(o);
        for (const auto& [e, c] : o.terms_) add_term(e, R(-c));
        return *this;
    }
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    Polynomial operator-() const {
        Polynomial r(dim_);
        for (const auto& [e, c] : terms_) r.terms_.emplace(e, R(-c));
        return r;
    }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        a.check_same_dim(b);
        Polynomial r(a.dim_);
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                Exps e(a.dim_);
                for (int i = 0; i < a.dim_; ++i) e[i] = ea[i] + eb[i];
                r.add_term(std::move(e), R(ca * cb));
            }
        return r;
    }
    Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

    friend Polynomial operator*(const R& s, const Polynomial& p) {
        Polynomial r(p.dim_);
        for (const auto& [e, c] : p.terms_) r.add_term(e, R(s * c));
        return r;
    }
    friend Polynomial operator*(const Polynomial& p, const R& s) { return s * p; }

    bool operator==(const Polynomial& o) const {
        return dim_ == o.dim_ && terms_ == o.terms_;
    }

    /// Exact partial derivative with respect to x^var (1-based).
    Polynomial diff(int var) const {
        check_var(dim_, var);
        Polynomial r(dim_);
        for (const auto& [e, c] : terms_) {
            int k = e[var - 1];
            if (k == 0) continue;
            Exps d = e;
            d[var - 1] = k - 1;
            r.add_term(std::move(d), R(c * R(k)));
        }
        return r;
    }

    /// Repeated derivative: one order per variable.
    Polynomial diff_multi(const Exps& orders) const {
        if (static_cast<int>(orders.size()) != dim_)
            throw std::invalid_argument("diff_multi: order length != dim");
        Polynomial r = *this;
        for (int v = 1; v <= dim_; ++v)
            for (int j = 0; j < orders[v - 1]; ++j) r = r.diff(v);
        return r;
    }

    /// Substitute x^var = 0 for every var in the list (1-based).
    Polynomial subst_zero(std::span<const int> vars) const {
        Polynomial r(dim_);
        for (const auto& [e, c] : terms_) {
            bool kill = false;
            for (int v : vars)
                if (e[check_var(dim_, v) - 1] > 0) { kill = true; break; }
            if (!kill) r.add_term(e, c);
        }
        return r;
    }

    /// True when the polynomial involves x^var.
    bool depends_on(int var) const {
        check_var(dim_, var);
        for (const auto& [e, c] : terms_)
            if (e[var - 1] > 0) return true;
        return false;
    }

    int total_degree() const {
        int d = 0;
        for (const auto& [e, c] : terms_)
            d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
        return d;
    }

    double max_abs_coeff() const {
        double m = 0;
        for (const auto& [e, c] : terms_) m = std::max(m, std::abs(to_double(c)));
        return m;
    }

    template <typename T, typename F>
    Polynomial<T> map_coeffs(F&& f) const {
        Polynomial<T> r(dim_);
        for (const auto& [e, c] : terms_) r.add_term(e, f(c));
        return r;
    }
    Polynomial<double> to_double_coeffs() const {
        return map_coeffs<double>([](const R& c) { return to_double(c); });
    }

    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [e, c] : terms_) {
            if (!first) os << " + ";
            first = false;
            os << coeff_str(c);
            for (int i = 0; i < dim_; ++i) {
                if (e[i] == 0) continue;
                os << " x" << (i + 1);
                if (e[i] > 1) os << "^" << e[i];
            }
        }
        return os.str();
    }

  private:
    static int check_var(int dim, int var) {
        if (var < 1 || var > dim) throw std::out_of_range("variable index out of range");
        return var;
    }
    void check_same_dim(const Polynomial& o) const {
        if (dim_ != o.dim_) throw std::invalid_argument("Polynomial: dim mismatch");
    }
    static std::string coeff_str(const Rat& c) { return format_rational(c); }
    static std::string coeff_str(double c) { return std::to_string(c); }

    int dim_;
    std::map<Exps, R> terms_;
};

using PolyQ = Polynomial<Rat>;
using PolyD = Polynomial<double>;

} // namespace branequant
