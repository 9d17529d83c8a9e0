#pragma once

#include "branequant/cache.hpp"
#include "branequant/graphs.hpp"
#include "branequant/multidiff.hpp"
#include "branequant/poisson.hpp"
#include "branequant/series.hpp"
#include "branequant/weights.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace branequant {

constexpr double kCoeffTolFloor = 1e-6;

/// A series coefficient "vanishes" when every polynomial coefficient is
/// below max(3 * propagated stderr, the absolute floor).
inline double vanish_tolerance(double err) { return std::max(3.0 * err, kCoeffTolFloor); }

struct WeightRequest {
    std::string key;
    Scheme scheme = Scheme::HalfPlane;
    auto operator<=>(const WeightRequest&) const = default;
};

class MissingWeights : public std::runtime_error {
  public:
    explicit MissingWeights(std::vector<WeightRequest> reqs)
        : std::runtime_error(describe(reqs)), requests(std::move(reqs)) {}
    std::vector<WeightRequest> requests;

  private:
    static std::string describe(const std::vector<WeightRequest>& reqs) {
        std::string s = "missing weights for " + std::to_string(reqs.size()) + " graph(s):";
        for (const auto& r : reqs) s += "\n  " + r.key + " @ " + scheme_name(r.scheme);
        return s;
    }
};

template <typename R>
struct WeightVal {
    R value{};
    double err = 0;
};

/// Exact weights for the graphs whose configuration integrals factor into
/// half-plane wedges: every first-type vertex sends both edges straight to
/// the two boundary points. Used to separate algebraic identities from
/// integration error; anything else is reported missing.
struct ExactWeightProvider {
    using coeff_type = Rat;

    std::optional<WeightVal<Rat>> lookup(const AdmGraph& g, Scheme scheme) const {
        if (scheme != Scheme::HalfPlane || g.kinds != KindSet::SingleBrane) return std::nullopt;
        if (g.nBoundary != 2 || g.nXi != 0) return std::nullopt;
        Rat w(1);
        for (int v = 0; v < g.aerial; ++v) {
            const auto& es = g.edges[v];
            if (es.size() != 2) return std::nullopt;
            for (const auto& e : es)
                if (!g.is_boundary(e.target) || e.kind != EdgeKind::Straight) return std::nullopt;
            if (es[0].target == es[1].target) return {{Rat(0), 0.0}};
            // ordered wedge to (B1, B2) integrates to +1/2, swapped to -1/2
            w *= g.boundary_slot(es[0].target) == 0 ? Rat(1, 2) : Rat(-1, 2);
        }
        return {{w, 0.0}};
    }
};

/// Reads weights from a cache snapshot; never integrates.
struct CacheWeightProvider {
    using coeff_type = double;
    const WeightCache* cache = nullptr;

    std::optional<WeightVal<double>> lookup(const AdmGraph& g, Scheme scheme) const {
        auto r = cache->get(canonical_key(g), scheme);
        if (!r) return std::nullopt;
        return {{r->value, r->stderr_}};
    }
};

/// Integrates missing weights on demand and records them in the cache.
struct McWeightProvider {
    using coeff_type = double;
    WeightCache* cache = nullptr;
    std::int64_t samples = 1000000;
    std::uint64_t seed = 1;

    std::optional<WeightVal<double>> lookup(const AdmGraph& g, Scheme scheme) const {
        std::string key = canonical_key(g);
        if (cache) {
            auto hit = cache->get(key, scheme);
            if (hit && hit->samples >= samples) return {{hit->value, hit->stderr_}};
        }
        WeightResult r = weight_mc(g, scheme, samples, seed);
        if (cache) cache->put(key, r);
        return {{r.value, r.stderr_}};
    }
};

namespace detail {

inline Rat to_coeff(const Rat& x, Rat*) { return x; }
inline double to_coeff(const Rat& x, double*) { return to_double(x); }

template <typename R>
Polynomial<R> convert_poly(const PolyQ& p) {
    return p.template map_coeffs<R>([](const Rat& c) { return to_coeff(c, static_cast<R*>(nullptr)); });
}

inline Rat factorial(int k) {
    Rat r(1);
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

template <typename R>
MultiDiffOp<double> abs_op(const MultiDiffOp<R>& op) {
    return op.template map_coeffs<double>([](const auto& c) { return std::abs(to_double(c)); });
}

inline PolyD abs_poly(const PolyD& p) {
    return p.map_coeffs<double>([](double c) { return std::abs(c); });
}
inline PolyD abs_poly(const PolyQ& p) {
    return p.map_coeffs<double>([](const Rat& c) { return std::abs(to_double(c)); });
}

/// 0/1 indicator of the monomial support, scaled; stands in for an unknown
/// perturbation of size `err` when propagating argument errors.
template <typename R>
PolyD err_proxy(const Polynomial<R>& p, double err) {
    if (err == 0.0) return PolyD(p.dim());
    if (p.is_zero()) return PolyD::constant(p.dim(), err);
    return p.template map_coeffs<double>([err](const auto&) { return err; });
}

} // namespace detail

/// Deformation-graded family of multidifferential operators: ops[k] is the
/// eps^k coefficient operator (weights, 1/k! and the per-vertex edge-order
/// factors already folded in). err_ops[k] carries the linearized stderr
/// budget: the same graph sum with |coefficients| weighted by weight
/// standard errors. Applications evaluate at a point of the brane
/// (conormal coordinates of the evaluation locus set to zero afterwards).
template <typename R>
struct GradedOp {
    int dim = 0;
    int arity = 0;
    int order = 0;
    std::vector<MultiDiffOp<R>> ops;
    std::vector<MultiDiffOp<double>> err_ops;
    std::vector<int> eval_conormal;  // substituted to zero after application

    GradedOp() = default;
    GradedOp(int dim_, int arity_, int order_, std::vector<int> eval_conormal_)
        : dim(dim_), arity(arity_), order(order_),
          ops(order_ + 1, MultiDiffOp<R>(dim_, arity_)),
          err_ops(order_ + 1, MultiDiffOp<double>(dim_, arity_)),
          eval_conormal(std::move(eval_conormal_)) {}

    Polynomial<R> restrict_poly(const Polynomial<R>& p) const {
        return p.subst_zero(eval_conormal);
    }

    /// Apply to exact polynomial arguments.
    EpsSeries<R> apply(std::span<const Polynomial<R>> args) const {
        EpsSeries<R> out(dim, order);
        std::vector<PolyD> absargs;
        absargs.reserve(args.size());
        for (const auto& a : args) absargs.push_back(detail::abs_poly(a));
        for (int k = 0; k <= order; ++k) {
            out.coeffs[k] = restrict_poly(ops[k].apply(args));
            out.errs[k] = err_ops[k].apply(absargs).max_abs_coeff();
        }
        return out;
    }

    /// Apply to truncated series arguments (bilinear/linear extension order
    /// by order).
    EpsSeries<R> apply_series(std::span<const EpsSeries<R>> args) const {
        if (static_cast<int>(args.size()) != arity)
            throw std::invalid_argument("GradedOp: arity mismatch");
        for (const auto& a : args)
            if (a.order < order) throw std::invalid_argument("GradedOp: argument series too short");
        EpsSeries<R> out(dim, order);
        std::vector<int> idx(arity, 0);
        std::vector<Polynomial<R>> slot(arity, Polynomial<R>(dim));
        std::vector<PolyD> aslot(arity);
        // iterate over (l, i_1..i_arity) with l + sum(i) <= order
        auto rec = [&](auto&& self, int s, int used) -> void {
            if (s == arity) {
                for (int l = 0; l + used <= order; ++l) {
                    int k = l + used;
                    out.coeffs[k] += restrict_poly(ops[l].apply(slot));
                    double e = err_ops[l].apply(aslot).max_abs_coeff();
                    for (int t = 0; t < arity; ++t) {
                        std::vector<PolyD> tmp = aslot;
                        tmp[t] = detail::err_proxy(args[t].coeffs[idx[t]], args[t].errs[idx[t]]);
                        e += detail::abs_op(ops[l]).apply(tmp).max_abs_coeff();
                    }
                    out.errs[k] += e;
                }
                return;
            }
            for (int i = 0; used + i <= order; ++i) {
                idx[s] = i;
                slot[s] = args[s].coeffs[i];
                aslot[s] = detail::abs_poly(slot[s]);
                self(self, s + 1, used + i);
            }
        };
        rec(rec, 0, 0);
        return out;
    }

    EpsSeries<R> apply_series(std::initializer_list<EpsSeries<R>> args) const {
        return apply_series(std::span<const EpsSeries<R>>(args.begin(), args.size()));
    }
};

enum class GraphFamily { Star, OpA, FnF, Mod0, Mod1, CornerA };

namespace detail {

struct FamilyShape {
    int nXi;
    int nBoundary;
    Scheme scheme;
};

inline FamilyShape family_shape(GraphFamily f) {
    switch (f) {
        case GraphFamily::Star: return {0, 2, Scheme::HalfPlane};
        case GraphFamily::OpA: return {1, 1, Scheme::HalfPlane};
        case GraphFamily::FnF: return {2, 0, Scheme::HalfPlane};
        case GraphFamily::Mod0: return {0, 2, Scheme::QuadrantW0};
        case GraphFamily::Mod1: return {0, 2, Scheme::QuadrantW1};
        case GraphFamily::CornerA: return {1, 1, Scheme::QuadrantCorner};
    }
    throw std::logic_error("family_shape: bad family");
}

} // namespace detail

/// The multidifferential operator of a decorated graph: first-type vertices
/// carry components of pi (field vertices the components of their vector
/// field), each edge differentiates the object at its target by the
/// summation index, straight/wavy and class kinds fix the index ranges, and
/// the result is evaluated on the brane (intersection). Boundary arguments
/// are only ever differentiated along their tangential directions; this is
/// asserted on every term.
inline MultiDiffOp<Rat> graph_operator(const AdmGraph& g, const PoissonStructure& pi,
                                       std::span<const Brane> branes,
                                       std::span<const VectorFieldPoly> fields, Scheme scheme) {
    g.validate();
    if (static_cast<int>(fields.size()) != g.nXi)
        throw std::invalid_argument("graph_operator: field count != nXi");
    for (const auto& b : branes)
        if (b.dim != pi.dim) throw std::invalid_argument("graph_operator: brane dim mismatch");

    const int n = pi.dim;
    std::vector<int> eval_conormal;
    if (branes.size() == 1) {
        eval_conormal = branes[0].conormal();
    } else {
        auto both = index_intersection(branes[0].tangent, branes[1].tangent);
        for (int i = 1; i <= n; ++i)
            if (!std::binary_search(both.begin(), both.end(), i)) eval_conormal.push_back(i);
    }

    MultiDiffOp<Rat> op(n, g.nBoundary);

    // flat edge list in (vertex, slot) order with summation ranges
    struct FlatEdge {
        int src, tgt;
        std::vector<int> range;
    };
    std::vector<FlatEdge> fe;
    for (int v = 0; v < g.aerial; ++v)
        for (const auto& e : g.edges[v]) {
            auto range = kind_index_range(e.kind, branes);
            if (range.empty()) return op;  // empty summation: zero operator
            if (g.is_boundary(e.target)) {
                auto allowed = boundary_tangent_set(scheme, g.boundary_slot(e.target), branes);
                if (index_intersection(range, allowed) != range)
                    throw std::logic_error(
                        "graph_operator: conormal derivative on a boundary argument "
                        "(graph not structurally pruned)");
            }
            fe.push_back({v, e.target, std::move(range)});
        }

    std::vector<size_t> pick(fe.size(), 0);
    std::vector<int> assign(fe.size(), 0);
    for (;;) {
        for (size_t i = 0; i < fe.size(); ++i) assign[i] = fe[i].range[pick[i]];

        // incoming derivative multi-index per vertex / boundary slot
        std::vector<std::vector<int>> vertex_orders(g.aerial, std::vector<int>(n, 0));
        std::vector<std::vector<int>> slot_orders(g.nBoundary, std::vector<int>(n, 0));
        for (size_t i = 0; i < fe.size(); ++i) {
            if (g.is_boundary(fe[i].tgt)) slot_orders[g.boundary_slot(fe[i].tgt)][assign[i] - 1]++;
            else vertex_orders[fe[i].tgt][assign[i] - 1]++;
        }

        PolyQ coeff = PolyQ::constant(n, Rat(1));
        size_t cursor = 0;  // index into fe of the current vertex's first edge
        for (int v = 0; v < g.aerial && !coeff.is_zero(); ++v) {
            PolyQ base(n);
            if (g.is_field_vertex(v)) {
                int a = assign[cursor];
                base = fields[v - (g.aerial - g.nXi)].comp[a - 1];
                cursor += 1;
            } else {
                int a = assign[cursor], b = assign[cursor + 1];
                base = pi.component(a, b);
                cursor += 2;
            }
            if (base.is_zero()) {
                coeff = PolyQ(n);
                break;
            }
            coeff *= base.diff_multi(vertex_orders[v]);
        }
        if (!coeff.is_zero()) {
            coeff = coeff.subst_zero(eval_conormal);
            if (!coeff.is_zero()) op.add_term(std::move(coeff), slot_orders);
        }

        // odometer
        size_t p = 0;
        while (p < fe.size()) {
            if (++pick[p] < fe[p].range.size()) break;
            pick[p] = 0;
            ++p;
        }
        if (p == fe.size()) break;
        if (fe.empty()) break;
    }
    op.compress();
    return op;
}

/// Assemble the eps-graded operator family of a graph expansion. The eps^k
/// coefficient is (1/k!) * sum over surviving order-k graphs of
/// w_Gamma * B_Gamma, divided by out-degree factorials of the first-type
/// vertices (2 per pi-vertex); the division compensates the double counting
/// of ordered edge pairs in the labeled sum, anchoring the eps^1 star term
/// at (1/2) pi^{ij} d_i (.) d_j (.).
template <typename Provider>
GradedOp<typename Provider::coeff_type> assemble_family(
    GraphFamily family, const PoissonStructure& pi, std::span<const Brane> branes,
    std::span<const VectorFieldPoly> fields, int K, const Provider& prov) {
    using R = typename Provider::coeff_type;
    auto shape = detail::family_shape(family);
    if (static_cast<int>(fields.size()) != shape.nXi)
        throw std::invalid_argument("assemble_family: field count mismatch");
    std::vector<int> eval_conormal;
    if (branes.size() == 1) {
        eval_conormal = branes[0].conormal();
    } else if (branes.size() == 2) {
        auto both = index_intersection(branes[0].tangent, branes[1].tangent);
        for (int i = 1; i <= pi.dim; ++i)
            if (!std::binary_search(both.begin(), both.end(), i)) eval_conormal.push_back(i);
    } else {
        throw std::invalid_argument("assemble_family: need one or two branes");
    }

    GradedOp<R> graded(pi.dim, shape.nBoundary, K, eval_conormal);
    std::vector<WeightRequest> missing;

    const int k_from = (family == GraphFamily::FnF) ? 0 : 1;
    for (int k = k_from; k <= K; ++k) {
        int aerial = k + shape.nXi;
        auto graphs = enumerate_graphs(aerial, shape.nXi, shape.nBoundary,
                                       scheme_kind_set(shape.scheme));
        graphs = prune_structural(graphs, shape.scheme, branes);
        Rat norm = Rat(1) / detail::factorial(k);
        for (int v = 0; v < aerial - shape.nXi; ++v) norm /= 2;  // ordered edge pairs
        for (const auto& g : graphs) {
            MultiDiffOp<Rat> B = graph_operator(g, pi, branes, fields, shape.scheme);
            if (B.is_zero()) continue;
            auto w = prov.lookup(g, shape.scheme);
            if (!w) {
                missing.push_back({canonical_key(g), shape.scheme});
                continue;
            }
            if (coeff_is_zero(w->value) && w->err == 0.0) continue;
            R scale = detail::to_coeff(norm, static_cast<R*>(nullptr)) * w->value;
            graded.ops[k].add_scaled(B.template map_coeffs<R>([](const Rat& c) {
                return detail::to_coeff(c, static_cast<R*>(nullptr));
            }), scale);
            if (w->err != 0.0)
                graded.err_ops[k].add_scaled(detail::abs_op(B),
                                             std::abs(to_double(norm)) * w->err);
        }
    }
    if (!missing.empty()) throw MissingWeights(std::move(missing));
    for (auto& o : graded.ops) o.compress();

    // order-0 parts
    if (family == GraphFamily::Star || family == GraphFamily::Mod0 ||
        family == GraphFamily::Mod1) {
        std::vector<std::vector<int>> partials(2, std::vector<int>(pi.dim, 0));
        graded.ops[0].add_term(Polynomial<R>::constant(pi.dim, R(1)), partials);
    } else if (family == GraphFamily::OpA || family == GraphFamily::CornerA) {
        std::vector<int> tangent = branes.size() == 1
                                       ? branes[0].tangent
                                       : index_intersection(branes[0].tangent, branes[1].tangent);
        for (int i : tangent) {
            PolyQ c = fields[0].comp[i - 1].subst_zero(eval_conormal);
            if (c.is_zero()) continue;
            std::vector<std::vector<int>> partials(1, std::vector<int>(pi.dim, 0));
            partials[0][i - 1] = 1;
            graded.ops[0].add_term(detail::convert_poly<R>(c), partials);
        }
    }
    return graded;
}

// ---- public entry points ------------------------------------------------

template <typename Provider>
GradedOp<typename Provider::coeff_type> star_operators(const PoissonStructure& pi, const Brane& c,
                                                       int K, const Provider& prov) {
    std::array<Brane, 1> branes{c};
    return assemble_family(GraphFamily::Star, pi, branes, {}, K, prov);
}

/// A(xi): arity-1 operator family on brane functions; pass the full
/// characteristic field (components on M) for xi = E^mu.
template <typename Provider>
GradedOp<typename Provider::coeff_type> a_operators(const PoissonStructure& pi, const Brane& c,
                                                    const VectorFieldPoly& xi, int K,
                                                    const Provider& prov) {
    std::array<Brane, 1> branes{c};
    std::array<VectorFieldPoly, 1> fields{xi};
    return assemble_family(GraphFamily::OpA, pi, branes, fields, K, prov);
}

template <typename Provider>
GradedOp<typename Provider::coeff_type> a_operators_corner(const PoissonStructure& pi,
                                                           const Brane& c0, const Brane& c1,
                                                           const VectorFieldPoly& xi, int K,
                                                           const Provider& prov) {
    std::array<Brane, 2> branes{c0, c1};
    std::array<VectorFieldPoly, 1> fields{xi};
    return assemble_family(GraphFamily::CornerA, pi, branes, fields, K, prov);
}

/// F(xi, eta): function-valued series on the brane.
template <typename Provider>
EpsSeries<typename Provider::coeff_type> f_series(const PoissonStructure& pi, const Brane& c,
                                                  const VectorFieldPoly& xi,
                                                  const VectorFieldPoly& eta, int K,
                                                  const Provider& prov) {
    using R = typename Provider::coeff_type;
    std::array<Brane, 1> branes{c};
    std::array<VectorFieldPoly, 2> fields{xi, eta};
    GradedOp<R> graded = assemble_family(GraphFamily::FnF, pi, branes, fields, K, prov);
    return graded.apply(std::span<const Polynomial<R>>{});
}

template <typename Provider>
GradedOp<typename Provider::coeff_type> mod_operators(const PoissonStructure& pi, const Brane& c0,
                                                      const Brane& c1, int K, const Provider& prov,
                                                      bool right) {
    std::array<Brane, 2> branes{c0, c1};
    return assemble_family(right ? GraphFamily::Mod0 : GraphFamily::Mod1, pi, branes, {}, K, prov);
}

namespace detail {

inline void require_vars_within(const PolyQ& f, const std::vector<int>& allowed,
                                const char* what) {
    for (int i = 1; i <= f.dim(); ++i)
        if (f.depends_on(i) && !std::binary_search(allowed.begin(), allowed.end(), i))
            throw std::invalid_argument(std::string(what) +
                                        " depends on variable x" + std::to_string(i) +
                                        " outside its brane");
}

} // namespace detail

/// f * g as a truncated series. Inputs must be functions on the brane.
template <typename R>
EpsSeries<R> star(const PolyQ& f, const PolyQ& g, const GradedOp<R>& ops, const Brane& c) {
    detail::require_vars_within(f, c.tangent, "star: f");
    detail::require_vars_within(g, c.tangent, "star: g");
    std::array<Polynomial<R>, 2> args{detail::convert_poly<R>(f), detail::convert_poly<R>(g)};
    return ops.apply(args);
}

/// psi *_0 f: right action of the C0 algebra on functions on the brane
/// intersection. psi must live on C0 and C1, f on C0.
template <typename R>
EpsSeries<R> mod_product_right(const PolyQ& psi, const PolyQ& f, const GradedOp<R>& ops,
                               const Brane& c0, const Brane& c1) {
    detail::require_vars_within(psi, index_intersection(c0.tangent, c1.tangent),
                                "mod_product_right: psi");
    detail::require_vars_within(f, c0.tangent, "mod_product_right: f");
    std::array<Polynomial<R>, 2> args{detail::convert_poly<R>(psi), detail::convert_poly<R>(f)};
    return ops.apply(args);
}

/// f *_1 psi: left action of the C1 algebra.
template <typename R>
EpsSeries<R> mod_product_left(const PolyQ& f, const PolyQ& psi, const GradedOp<R>& ops,
                              const Brane& c0, const Brane& c1) {
    detail::require_vars_within(f, c1.tangent, "mod_product_left: f");
    detail::require_vars_within(psi, index_intersection(c0.tangent, c1.tangent),
                                "mod_product_left: psi");
    std::array<Polynomial<R>, 2> args{detail::convert_poly<R>(f), detail::convert_poly<R>(psi)};
    return ops.apply(args);
}

/// A(xi) f.
template <typename R>
EpsSeries<R> apply_a(const GradedOp<R>& aops, const PolyQ& f) {
    std::array<Polynomial<R>, 1> args{detail::convert_poly<R>(f)};
    return aops.apply(args);
}

struct AssumptionEntry {
    int mu = 0, nu = 0;
    std::vector<double> residual;  // per eps order
    std::vector<double> tol;
    bool pass = true;
};

/// F(E^mu, E^nu) for all ordered conormal pairs, with per-order pass/fail
/// at the propagated tolerance.
template <typename Provider>
std::vector<AssumptionEntry> check_assumption(const PoissonStructure& pi, const Brane& c, int K,
                                              const Provider& prov) {
    std::vector<AssumptionEntry> out;
    auto con = c.conormal();
    for (int mu : con)
        for (int nu : con) {
            auto F = f_series(pi, c, characteristic_field_full(pi, mu),
                              characteristic_field_full(pi, nu), K, prov);
            AssumptionEntry e;
            e.mu = mu;
            e.nu = nu;
            for (int k = 0; k <= K; ++k) {
                e.residual.push_back(F.coeffs[k].max_abs_coeff());
                e.tol.push_back(vanish_tolerance(F.errs[k]));
                if (e.residual.back() > e.tol.back()) e.pass = false;
            }
            out.push_back(std::move(e));
        }
    return out;
}

struct MembershipResult {
    bool pass = true;
    double max_residual = 0;
    double max_tol = 0;
};

/// Quantum membership: A(E^mu) f = 0 up to order K for every conormal mu
/// (single brane) or every mu conormal to both branes (intersection).
template <typename Provider>
MembershipResult quantum_membership(const EpsSeries<typename Provider::coeff_type>& f,
                                    const PoissonStructure& pi, std::span<const Brane> branes,
                                    int K, const Provider& prov) {
    using R = typename Provider::coeff_type;
    std::vector<int> mus;
    if (branes.size() == 1) {
        mus = branes[0].conormal();
    } else {
        for (int i = 1; i <= pi.dim; ++i)
            if (!branes[0].is_tangent(i) && !branes[1].is_tangent(i)) mus.push_back(i);
    }
    MembershipResult res;
    for (int mu : mus) {
        GradedOp<R> aops =
            branes.size() == 1
                ? a_operators(pi, branes[0], characteristic_field_full(pi, mu), K, prov)
                : a_operators_corner(pi, branes[0], branes[1], characteristic_field_full(pi, mu),
                                     K, prov);
        std::array<EpsSeries<R>, 1> args{f};
        auto af = aops.apply_series(args);
        for (int k = 0; k <= K; ++k) {
            double r = af.coeffs[k].max_abs_coeff();
            double t = vanish_tolerance(af.errs[k]);
            res.max_residual = std::max(res.max_residual, r);
            res.max_tol = std::max(res.max_tol, t);
            if (r > t) res.pass = false;
        }
    }
    return res;
}

} // namespace branequant
