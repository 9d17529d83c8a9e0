#pragma once

#include "branequant/operators.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace branequant {

struct LiftResult {
    bool ok = false;
    EpsSeries<double> series;
    std::vector<double> residuals;  // per order 1..K
    std::vector<double> tols;
    std::string message;
};

namespace detail {

inline void collect_monomials(const PolyD& p, std::map<std::vector<int>, int>& index) {
    for (const auto& [e, c] : p.terms())
        if (!index.count(e)) {
            int next = static_cast<int>(index.size());
            index.emplace(e, next);
        }
}

template <typename R>
GradedOp<double> to_double_ops(const GradedOp<R>& g) {
    GradedOp<double> r(g.dim, g.arity, g.order, g.eval_conormal);
    for (int k = 0; k <= g.order; ++k) {
        r.ops[k] = g.ops[k].template map_coeffs<double>([](const auto& c) { return to_double(c); });
        r.err_ops[k] = g.err_ops[k];
    }
    return r;
}

} // namespace detail

/// Order-by-order correction of a classically invariant f0 into the quantum
/// invariant algebra: finds f1, f2, ... with polynomial degree at most
/// degree_cap solving the membership conditions through eps^K by linear
/// least squares on monomial coefficients. Reports the obstruction residual
/// when no correction within the degree window solves an order.
template <typename Provider>
LiftResult lift(const PolyQ& f0, const PoissonStructure& pi, const Brane& c, int K,
                int degree_cap, const Provider& prov) {
    detail::require_vars_within(f0, c.tangent, "lift: f0");
    if (!is_invariant(f0, pi, c))
        throw std::invalid_argument("lift: f0 is not classically invariant");

    auto con = c.conormal();
    std::vector<GradedOp<double>> aops;
    for (int mu : con)
        aops.push_back(detail::to_double_ops(
            a_operators(pi, c, characteristic_field_full(pi, mu), K, prov)));

    // candidate monomial basis: tangential variables, total degree <= cap
    std::vector<std::vector<int>> basis;
    {
        std::vector<int> e(c.dim, 0);
        auto rec = [&](auto&& self, size_t ti, int left) -> void {
            if (ti == c.tangent.size()) {
                basis.push_back(e);
                return;
            }
            for (int d = 0; d <= left; ++d) {
                e[c.tangent[ti] - 1] = d;
                self(self, ti + 1, left - d);
            }
            e[c.tangent[ti] - 1] = 0;
        };
        rec(rec, 0, degree_cap);
    }

    LiftResult out;
    out.series = EpsSeries<double>(c.dim, K);
    out.series.coeffs[0] = f0.to_double_coeffs();
    out.ok = true;

    auto apply_order = [&](const GradedOp<double>& a, int l, const PolyD& p, double& err) {
        std::array<PolyD, 1> args{p};
        PolyD r = a.restrict_poly(a.ops[l].apply(args));
        std::array<PolyD, 1> aargs{detail::abs_poly(p)};
        err += a.err_ops[l].apply(aargs).max_abs_coeff();
        return r;
    };

    for (int j = 1; j <= K; ++j) {
        // rhs_mu = - sum_{l=1..j} A_l(f_{j-l}); unknown f_j enters via A_0
        std::vector<PolyD> rhs;
        double err = 0;
        for (auto& a : aops) {
            PolyD r(c.dim);
            for (int l = 1; l <= j; ++l) r += apply_order(a, l, out.series.coeffs[j - l], err);
            rhs.push_back(-r);
        }

        // images of the basis under each A_0
        std::vector<std::vector<PolyD>> img(aops.size());
        std::map<std::vector<int>, int> rowsym;
        for (size_t m = 0; m < aops.size(); ++m) {
            for (const auto& b : basis) {
                PolyQ mono(c.dim);
                mono.add_term(b, Rat(1));
                img[m].push_back(apply_order(aops[m], 0, mono.to_double_coeffs(), err));
            }
            detail::collect_monomials(rhs[m], rowsym);
            for (const auto& p : img[m]) detail::collect_monomials(p, rowsym);
        }

        int nrows = static_cast<int>(rowsym.size() * aops.size());
        int ncols = static_cast<int>(basis.size());
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(std::max(nrows, 1), ncols);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(std::max(nrows, 1));
        int block = static_cast<int>(rowsym.size());
        for (size_t m = 0; m < aops.size(); ++m) {
            for (int cidx = 0; cidx < ncols; ++cidx)
                for (const auto& [e, v] : img[m][cidx].terms())
                    M(static_cast<int>(m) * block + rowsym.at(e), cidx) = v;
            for (const auto& [e, v] : rhs[m].terms())
                b(static_cast<int>(m) * block + rowsym.at(e)) = v;
        }

        Eigen::VectorXd x = ncols > 0 ? M.colPivHouseholderQr().solve(b).eval()
                                      : Eigen::VectorXd::Zero(0).eval();
        PolyD fj(c.dim);
        for (int cidx = 0; cidx < ncols; ++cidx) {
            PolyQ mono(c.dim);
            mono.add_term(basis[cidx], Rat(1));
            fj += x(cidx) * mono.to_double_coeffs();
        }

        double resid = 0;
        for (size_t m = 0; m < aops.size(); ++m) {
            PolyD check = -rhs[m];
            for (int cidx = 0; cidx < ncols; ++cidx)
                check += x(cidx) * img[m][cidx];
            resid = std::max(resid, check.max_abs_coeff());
        }
        double tol = vanish_tolerance(err);
        out.residuals.push_back(resid);
        out.tols.push_back(tol);
        if (resid > tol) {
            out.ok = false;
            out.message = "obstruction at order " + std::to_string(j) + ": residual " +
                          std::to_string(resid) + " > " + std::to_string(tol);
        }
        out.series.coeffs[j] = fj;
        out.series.errs[j] = err;
    }
    return out;
}

} // namespace branequant
