#pragma once

#include "branequant/polynomial.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace branequant {

/// Coordinate-subspace brane: the tangential index set I of the subspace
/// { x^mu = 0 : mu not in I }. Indices are 1-based, stored sorted and
/// duplicate-free.
struct Brane {
    int dim = 0;
    std::vector<int> tangent;

    Brane() = default;
    Brane(int dim_, std::vector<int> tangent_) : dim(dim_), tangent(std::move(tangent_)) {
        std::sort(tangent.begin(), tangent.end());
        tangent.erase(std::unique(tangent.begin(), tangent.end()), tangent.end());
        for (int i : tangent)
            if (i < 1 || i > dim) throw std::out_of_range("Brane: tangent index out of range");
    }
    static Brane full(int dim) {
        std::vector<int> all(dim);
        for (int i = 0; i < dim; ++i) all[i] = i + 1;
        return Brane(dim, std::move(all));
    }

    bool is_tangent(int i) const {
        return std::binary_search(tangent.begin(), tangent.end(), i);
    }
    std::vector<int> conormal() const {
        std::vector<int> c;
        for (int i = 1; i <= dim; ++i)
            if (!is_tangent(i)) c.push_back(i);
        return c;
    }
    bool operator==(const Brane&) const = default;
};

inline std::vector<int> index_intersection(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> r;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
    return r;
}

/// Bivector field with polynomial components; stores pi^{ij} for i<j only,
/// antisymmetry is implied by the accessor. The Jacobi identity is not
/// assumed; jacobiator() checks it.
struct PoissonStructure {
    int dim = 0;
    std::map<std::pair<int, int>, PolyQ> upper;  // keys with i<j

    PoissonStructure() = default;
    explicit PoissonStructure(int dim_) : dim(dim_) {}

    void set(int i, int j, PolyQ p) {
        check(i); check(j);
        if (p.dim() != dim) throw std::invalid_argument("PoissonStructure: poly dim mismatch");
        if (i == j) throw std::invalid_argument("PoissonStructure: diagonal entry");
        if (i < j) upper[{i, j}] = std::move(p);
        else upper[{j, i}] = -p;
    }

    PolyQ component(int i, int j) const {
        check(i); check(j);
        if (i == j) return PolyQ(dim);
        auto it = upper.find({std::min(i, j), std::max(i, j)});
        if (it == upper.end()) return PolyQ(dim);
        return i < j ? it->second : -it->second;
    }

    bool is_constant() const {
        for (const auto& [ij, p] : upper)
            if (p.total_degree() > 0) return false;
        return true;
    }

  private:
    void check(int i) const {
        if (i < 1 || i > dim) throw std::out_of_range("PoissonStructure: index out of range");
    }
};

/// Vector field with polynomial components.
struct VectorFieldPoly {
    int dim = 0;
    std::vector<PolyQ> comp;  // size dim, comp[i-1] multiplies d/dx^i

    VectorFieldPoly() = default;
    explicit VectorFieldPoly(int dim_) : dim(dim_), comp(dim_, PolyQ(dim_)) {}

    bool is_zero() const {
        for (const auto& c : comp)
            if (!c.is_zero()) return false;
        return true;
    }
    /// Directional derivative sum_i comp[i] d_i f.
    PolyQ apply(const PolyQ& f) const {
        PolyQ r(dim);
        for (int i = 1; i <= dim; ++i) r += comp[i - 1] * f.diff(i);
        return r;
    }
};

/// Antisymmetric multivector of degree d with polynomial components,
/// stored on strictly increasing index tuples.
struct RelativeMultivector {
    int dim = 0;
    int degree = 0;
    std::map<std::vector<int>, PolyQ> comps;  // keys strictly increasing

    RelativeMultivector() = default;
    RelativeMultivector(int dim_, int degree_) : dim(dim_), degree(degree_) {}

    static int sort_sign(std::vector<int>& idx) {
        int sign = 1;
        for (size_t a = 0; a < idx.size(); ++a)
            for (size_t b = a + 1; b < idx.size(); ++b) {
                if (idx[a] == idx[b]) return 0;
                if (idx[a] > idx[b]) { std::swap(idx[a], idx[b]); sign = -sign; }
            }
        return sign;
    }

    void set(std::vector<int> idx, PolyQ p) {
        if (static_cast<int>(idx.size()) != degree)
            throw std::invalid_argument("RelativeMultivector: tuple size != degree");
        int s = sort_sign(idx);
        if (s == 0) throw std::invalid_argument("RelativeMultivector: repeated index");
        if (s < 0) p = -p;
        if (p.is_zero()) comps.erase(idx);
        else comps[std::move(idx)] = std::move(p);
    }

    PolyQ component(std::vector<int> idx) const {
        if (static_cast<int>(idx.size()) != degree)
            throw std::invalid_argument("RelativeMultivector: tuple size != degree");
        int s = sort_sign(idx);
        if (s == 0) return PolyQ(dim);
        auto it = comps.find(idx);
        if (it == comps.end()) return PolyQ(dim);
        return s > 0 ? it->second : -it->second;
    }

    bool is_zero() const {
        for (const auto& [k, p] : comps)
            if (!p.is_zero()) return false;
        return true;
    }
};

/// Trivector of Jacobi residuals
///   J^{jkl} = sum_i ( pi^{ij} d_i pi^{kl} + pi^{il} d_i pi^{jk} + pi^{ik} d_i pi^{lj} ).
/// pi is Poisson iff every component vanishes identically.
inline RelativeMultivector jacobiator(const PoissonStructure& pi) {
    int n = pi.dim;
    RelativeMultivector out(n, 3);
    for (int j = 1; j <= n; ++j)
        for (int k = j + 1; k <= n; ++k)
            for (int l = k + 1; l <= n; ++l) {
                PolyQ acc(n);
                for (int i = 1; i <= n; ++i) {
                    acc += pi.component(i, j) * pi.component(k, l).diff(i);
                    acc += pi.component(i, l) * pi.component(j, k).diff(i);
                    acc += pi.component(i, k) * pi.component(l, j).diff(i);
                }
                if (!acc.is_zero()) out.set({j, k, l}, std::move(acc));
            }
    return out;
}

inline bool is_poisson(const PoissonStructure& pi) { return jacobiator(pi).is_zero(); }

/// Coisotropy of a coordinate-subspace brane: pi^{mu nu}|_C = 0 for all
/// conormal pairs mu, nu.
inline bool check_coisotropic(const PoissonStructure& pi, const Brane& c) {
    if (pi.dim != c.dim) throw std::invalid_argument("check_coisotropic: dim mismatch");
    auto con = c.conormal();
    for (size_t a = 0; a < con.size(); ++a)
        for (size_t b = a + 1; b < con.size(); ++b)
            if (!pi.component(con[a], con[b]).subst_zero(con).is_zero()) return false;
    return true;
}

/// Full characteristic field E^mu = sum_{i=1..n} pi^{mu i} d_i on M
/// (components not restricted to the brane).
inline VectorFieldPoly characteristic_field_full(const PoissonStructure& pi, int mu) {
    VectorFieldPoly e(pi.dim);
    for (int i = 1; i <= pi.dim; ++i) e.comp[i - 1] = pi.component(mu, i);
    return e;
}

/// Characteristic fields spanning the foliation of the brane, one per
/// conormal index mu, restricted to C. By coisotropy the conormal
/// components vanish on C, so each field is returned with tangential
/// components only (conormal components identically zero).
inline std::vector<VectorFieldPoly> characteristic_fields(const PoissonStructure& pi,
                                                          const Brane& c) {
    if (!check_coisotropic(pi, c))
        throw std::invalid_argument("characteristic_fields: brane is not coisotropic");
    auto con = c.conormal();
    std::vector<VectorFieldPoly> out;
    out.reserve(con.size());
    for (int mu : con) {
        VectorFieldPoly e(pi.dim);
        for (int i : c.tangent) e.comp[i - 1] = pi.component(mu, i).subst_zero(con);
        out.push_back(std::move(e));
    }
    return out;
}

/// Classical invariance: E^mu(f) = 0 on C for every conormal mu.
/// f must depend on tangential variables only.
inline bool is_invariant(const PolyQ& f, const PoissonStructure& pi, const Brane& c) {
    if (f.dim() != c.dim) throw std::invalid_argument("is_invariant: dim mismatch");
    for (int mu : c.conormal())
        if (f.depends_on(mu))
            throw std::invalid_argument("is_invariant: f depends on a conormal variable");
    for (const auto& e : characteristic_fields(pi, c))
        if (!e.apply(f).is_zero()) return false;
    return true;
}

/// Membership in the relative multivector space of the brane: every
/// component whose indices are all conormal vanishes after restriction
/// to C. At degree 2 this coincides with check_coisotropic.
inline bool relative_membership(const RelativeMultivector& alpha, const Brane& c) {
    if (alpha.dim != c.dim) throw std::invalid_argument("relative_membership: dim mismatch");
    auto con = c.conormal();
    for (const auto& [idx, p] : alpha.comps) {
        bool all_conormal = true;
        for (int i : idx)
            if (c.is_tangent(i)) { all_conormal = false; break; }
        if (all_conormal && !p.subst_zero(con).is_zero()) return false;
    }
    return true;
}

} // namespace branequant
