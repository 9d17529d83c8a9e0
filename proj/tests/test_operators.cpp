#include "branequant/lift.hpp"
#include "branequant/operators.hpp"
#include "branequant/verify.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace branequant;
using Catch::Approx;

namespace {

std::mt19937 rng(424242);

PolyQ random_poly(int dim, int max_deg = 2) {
    std::uniform_int_distribution<int> nd(1, 3);
    std::uniform_int_distribution<int> ed(0, max_deg);
    std::uniform_int_distribution<int> cd(-3, 3);
    PolyQ p(dim);
    int n = nd(rng);
    for (int t = 0; t < n; ++t) {
        std::vector<int> e(dim);
        for (int i = 0; i < dim; ++i) e[i] = ed(rng);
        p.add_term(e, Rat(cd(rng)));
    }
    return p;
}

const Brane kFullR2 = Brane::full(2);
const Brane kLineR2 = fixtures::lagrangian_line_r2();

} // namespace

TEST_CASE("graph operator of the k=1 wedge") {
    auto pi = fixtures::moyal_r2();
    AdmGraph wedge = parse_key("1;0;2;H;v1:(B1,s),(B2,s)");
    std::array<Brane, 1> branes{kFullR2};
    auto op = graph_operator(wedge, pi, branes, {}, Scheme::HalfPlane);
    PolyQ x1 = PolyQ::variable(2, 1), x2 = PolyQ::variable(2, 2);
    // pi^{ij} d_i f d_j g summed over both index orders
    CHECK(op.apply({x1, x2}) == PolyQ::constant(2, Rat(1)));
    CHECK(op.apply({x2, x1}) == PolyQ::constant(2, Rat(-1)));
    CHECK(op.apply({x1, x1}).is_zero());
}

TEST_CASE("graph operator of a three-vertex graph matches a hand expansion") {
    // v1 carries pi^{i lam} (first edge straight to f, second wavy to v2),
    // v2 carries pi^{jk} (straight to f and g), v3 carries pi^{l mu}
    // (straight to v1, wavy to v2); brane {x3 = 0}.
    AdmGraph g = parse_key("3;0;2;H;v1:(B1,s),(2,w);v2:(B1,s),(B2,s);v3:(1,s),(2,w)");
    PoissonStructure pi(3);
    for (int i = 1; i <= 3; ++i)
        for (int j = i + 1; j <= 3; ++j) pi.set(i, j, random_poly(3));
    Brane c(3, {1, 2});
    std::array<Brane, 1> branes{c};
    auto op = graph_operator(g, pi, branes, {}, Scheme::HalfPlane);

    PolyQ f = random_poly(3, 3).subst_zero(std::vector<int>{3});
    PolyQ gg = random_poly(3, 3).subst_zero(std::vector<int>{3});
    PolyQ expected(3);
    std::vector<int> con{3};
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j)
            for (int k = 1; k <= 2; ++k)
                for (int l = 1; l <= 2; ++l) {
                    int lam = 3, mu = 3;
                    PolyQ coeff = pi.component(i, lam).diff(l) *
                                  pi.component(j, k).diff(lam).diff(mu) * pi.component(l, mu);
                    expected += coeff.subst_zero(con) * f.diff(i).diff(j) * gg.diff(k);
                }
    CHECK(op.apply({f, gg}) == expected);
}

TEST_CASE("zero structure gives zero operators at every positive order") {
    PoissonStructure zero(2);
    for (const auto& g : enumerate_graphs(1, 0, 2, KindSet::SingleBrane)) {
        if (classify_graph(g, Scheme::HalfPlane, std::array<Brane, 1>{kFullR2}) !=
            PruneReason::Kept)
            continue;
        auto op = graph_operator(g, zero, std::array<Brane, 1>{kFullR2}, {}, Scheme::HalfPlane);
        CHECK(op.is_zero());
    }
}

TEST_CASE("graph operator rejects structurally unpruned boundary derivatives") {
    AdmGraph bad = parse_key("1;0;2;H;v1:(B1,s),(B2,w)");
    std::array<Brane, 1> branes{kLineR2};
    CHECK_THROWS_AS(graph_operator(bad, fixtures::moyal_r2(), branes, {}, Scheme::HalfPlane),
                    std::logic_error);
}

TEST_CASE("edge swap with index transposition leaves w * B unchanged") {
    auto pi = fixtures::so3();
    std::array<Brane, 1> branes{Brane::full(3)};
    AdmGraph g = parse_key("2;0;2;H;v1:(2,s),(B1,s);v2:(B1,s),(B2,s)");
    AdmGraph gs = parse_key("2;0;2;H;v1:(B1,s),(2,s);v2:(B1,s),(B2,s)");
    auto b1 = graph_operator(g, pi, branes, {}, Scheme::HalfPlane);
    auto b2 = graph_operator(gs, pi, branes, {}, Scheme::HalfPlane);
    // B(gs) = -B(g): pi index transposition
    PolyQ f = random_poly(3), h = random_poly(3);
    CHECK(b1.apply({f, h}) == -b2.apply({f, h}));
    // and the weights negate pointwise (determinant row swap)
    GaugeLayout lo = make_layout(g, Scheme::HalfPlane);
    double uv[4] = {0.3, 0.45, 0.52, 0.61};
    CHECK(weight_integrand(g, lo, uv) == Approx(-weight_integrand(gs, lo, uv)).margin(1e-12));
}

TEST_CASE("exact-weight star product reproduces the Moyal expansion") {
    auto pi = fixtures::moyal_r2();
    ExactWeightProvider exact;
    auto ops = star_operators(pi, kFullR2, 2, exact);
    PolyQ x1 = PolyQ::variable(2, 1), x2 = PolyQ::variable(2, 2);

    SECTION("x1 * x2 = x1 x2 + eps/2") {
        auto s = star(x1, x2, ops, kFullR2);
        CHECK(s.coeffs[0] == x1 * x2);
        CHECK(s.coeffs[1] == PolyQ::constant(2, Rat(1, 2)));
        CHECK(s.coeffs[2].is_zero());
    }
    SECTION("(x1)^2 * (x2)^2 matches the closed form at every order") {
        auto s = star(x1 * x1, x2 * x2, ops, kFullR2);
        auto oracle = oracles::moyal_series(pi, x1 * x1, x2 * x2, 2);
        for (int k = 0; k <= 2; ++k) CHECK(s.coeffs[k] == oracle[k]);
        // frozen closed-form values
        CHECK(s.coeffs[1] == Rat(2) * (x1 * x2));
        CHECK(s.coeffs[2] == PolyQ::constant(2, Rat(1, 2)));
    }
    SECTION("functions of x1 alone multiply commutatively") {
        auto s = star(x1 * x1 + x1, x1, ops, kFullR2);
        CHECK(s.coeffs[0] == (x1 * x1 + x1) * x1);
        CHECK(s.coeffs[1].is_zero());
        CHECK(s.coeffs[2].is_zero());
    }
    SECTION("random polynomials agree with the closed form") {
        for (int t = 0; t < 10; ++t) {
            PolyQ f = random_poly(2, 3), g = random_poly(2, 3);
            auto s = star(f, g, ops, kFullR2);
            auto oracle = oracles::moyal_series(pi, f, g, 2);
            for (int k = 0; k <= 2; ++k) CHECK(s.coeffs[k] == oracle[k]);
        }
    }
}

TEST_CASE("MC star product matches Moyal within propagated tolerance") {
    auto pi = fixtures::moyal_r2();
    McWeightProvider prov{nullptr, 200000, 17};
    auto ops = star_operators(pi, kFullR2, 2, prov);
    PolyQ x1 = PolyQ::variable(2, 1), x2 = PolyQ::variable(2, 2);
    auto s = star(x1 * x1, x2 * x2, ops, kFullR2);
    auto oracle = oracles::moyal_series(pi, x1 * x1, x2 * x2, 2);
    for (int k = 0; k <= 2; ++k) {
        auto diff = s.coeffs[k] - oracle[k].to_double_coeffs();
        CHECK(diff.max_abs_coeff() <= std::max(3 * s.errs[k], 1e-4));
    }
}

TEST_CASE("star validates argument domains") {
    auto pi = fixtures::moyal_r2();
    ExactWeightProvider exact;
    auto ops = star_operators(pi, kLineR2, 1, exact);
    PolyQ x2 = PolyQ::variable(2, 2);
    CHECK_THROWS_AS(star(x2, x2, ops, kLineR2), std::invalid_argument);
}

TEST_CASE("missing weights are reported with graph keys") {
    auto pi = fixtures::so3();
    ExactWeightProvider exact;  // knows nothing about linear structures' k=2 graphs
    try {
        auto ops = star_operators(pi, Brane::full(3), 2, exact);
        FAIL("expected MissingWeights");
    } catch (const MissingWeights& e) {
        CHECK(!e.requests.empty());
        for (const auto& r : e.requests) {
            CHECK(r.scheme == Scheme::HalfPlane);
            CHECK_NOTHROW(parse_key(r.key));
        }
    }
}

TEST_CASE("A operators") {
    SECTION("zero structure: A(xi) = xi") {
        PoissonStructure zero(2);
        VectorFieldPoly xi(2);
        xi.comp[0] = PolyQ::variable(2, 1);
        ExactWeightProvider exact;
        auto aops = a_operators(zero, kFullR2, xi, 2, exact);
        PolyQ f = random_poly(2);
        auto af = apply_a(aops, f);
        CHECK(af.coeffs[0] == xi.comp[0] * f.diff(1));
        CHECK(af.coeffs[1].is_zero());
        CHECK(af.coeffs[2].is_zero());
    }
    SECTION("constant structure, Lagrangian brane: A(E^mu) = E^mu exactly") {
        auto pi = fixtures::symplectic_r4();
        Brane c = fixtures::lagrangian_plane_r4();
        ExactWeightProvider exact;  // would throw if any weight were requested
        for (int mu : c.conormal()) {
            auto aops = a_operators(pi, c, characteristic_field_full(pi, mu), 2, exact);
            CHECK_FALSE(aops.ops[0].is_zero());
            CHECK(aops.ops[1].is_zero());
            CHECK(aops.ops[2].is_zero());
            // order 0 is the tangential directional derivative
            PolyQ f = PolyQ::variable(4, 1) * PolyQ::variable(4, 3);
            auto fields = characteristic_fields(pi, c);
            auto af = apply_a(aops, f);
            size_t idx = mu == 2 ? 0 : 1;
            CHECK(af.coeffs[0] == fields[idx].apply(f).subst_zero(c.conormal()));
        }
    }
    SECTION("two-brane corner A with trivial intersection conditions") {
        auto pi = fixtures::moyal_r2();
        VectorFieldPoly xi(2);
        xi.comp[0] = PolyQ::variable(2, 1);
        McWeightProvider prov{nullptr, 50000, 3};
        auto aops = a_operators_corner(pi, kFullR2, kLineR2, xi, 1, prov);
        PolyQ f = PolyQ::variable(2, 1);
        auto af = aops.apply(std::array<PolyD, 1>{f.to_double_coeffs()});
        CHECK(af.coeffs[0].max_abs_coeff() == Approx(1.0));  // x1 d1 x1 = x1
    }
}

TEST_CASE("F series") {
    SECTION("zero structure with constant fields vanishes at every order") {
        PoissonStructure zero(2);
        VectorFieldPoly xi(2), eta(2);
        xi.comp[0] = PolyQ::constant(2, Rat(1));
        eta.comp[1] = PolyQ::constant(2, Rat(2));
        McWeightProvider prov{nullptr, 20000, 5};
        auto F = f_series(zero, kLineR2, xi, eta, 2, prov);
        for (int k = 0; k <= 2; ++k) CHECK(F.coeffs[k].is_zero());
    }
    SECTION("constant structure: F(E^mu, E^nu) = 0 structurally") {
        auto pi = fixtures::symplectic_r4();
        Brane c = fixtures::lagrangian_plane_r4();
        ExactWeightProvider exact;  // no weight may be requested
        auto con = c.conormal();
        for (int mu : con)
            for (int nu : con) {
                auto F = f_series(pi, c, characteristic_field_full(pi, mu),
                                  characteristic_field_full(pi, nu), 2, exact);
                for (int k = 0; k <= 2; ++k) CHECK(F.coeffs[k].is_zero());
            }
    }
    SECTION("so(3) hyperplane: F(E^3, E^3) vanishes within tolerance") {
        auto pi = fixtures::so3();
        Brane c = fixtures::so3_hyperplane();
        McWeightProvider prov{nullptr, 400000, 9};
        auto F = f_series(pi, c, characteristic_field_full(pi, 3),
                          characteristic_field_full(pi, 3), 2, prov);
        for (int k = 0; k <= 2; ++k)
            CHECK(F.coeffs[k].max_abs_coeff() <= vanish_tolerance(F.errs[k]));
    }
}

TEST_CASE("check_assumption across fixtures") {
    McWeightProvider prov{nullptr, 300000, 21};
    SECTION("codimension one, 2d Lie dual") {
        auto entries = check_assumption(fixtures::lie2d(), fixtures::lie2d_annihilator(), 2, prov);
        REQUIRE(entries.size() == 1);
        CHECK(entries[0].pass);
    }
    SECTION("constant structures pass structurally") {
        auto entries =
            check_assumption(fixtures::symplectic_r4(), fixtures::lagrangian_plane_r4(), 2, prov);
        REQUIRE(entries.size() == 4);
        for (const auto& e : entries) {
            CHECK(e.pass);
            for (double r : e.residual) CHECK(r == 0.0);
        }
    }
}

TEST_CASE("quantum membership") {
    SECTION("zero structure admits everything") {
        PoissonStructure zero(2);
        ExactWeightProvider exact;
        auto f = EpsSeries<Rat>::from_poly(random_poly(2), 2);
        auto res = quantum_membership(f, zero, std::array<Brane, 1>{kLineR2}, 2, exact);
        CHECK(res.pass);
    }
    SECTION("constant structure: membership is order-wise classical invariance") {
        auto pi = fixtures::moyal_r2();
        ExactWeightProvider exact;
        // E^2 = -d_1 on the line: invariants are the constants
        auto good = EpsSeries<Rat>::from_poly(PolyQ::constant(2, Rat(3)), 1);
        CHECK(quantum_membership(good, pi, std::array<Brane, 1>{kLineR2}, 1, exact).pass);
        auto bad = EpsSeries<Rat>::from_poly(PolyQ::variable(2, 1), 1);
        CHECK_FALSE(quantum_membership(bad, pi, std::array<Brane, 1>{kLineR2}, 1, exact).pass);
        // a non-invariant higher coefficient also fails
        auto mixed = EpsSeries<Rat>::from_poly(PolyQ::constant(2, Rat(1)), 1);
        mixed.coeffs[1] = PolyQ::variable(2, 1);
        CHECK_FALSE(quantum_membership(mixed, pi, std::array<Brane, 1>{kLineR2}, 1, exact).pass);
    }
    SECTION("so(3) rotational invariant at order 0") {
        auto pi = fixtures::so3();
        Brane c = fixtures::so3_hyperplane();
        PolyQ x1 = PolyQ::variable(3, 1), x2 = PolyQ::variable(3, 2);
        McWeightProvider prov{nullptr, 200000, 31};
        auto f = EpsSeries<double>::from_poly((x1 * x1 + x2 * x2).to_double_coeffs(), 1);
        auto res = quantum_membership(f, pi, std::array<Brane, 1>{c}, 1, prov);
        CHECK(res.pass);
        auto g = EpsSeries<double>::from_poly(x1.to_double_coeffs(), 1);
        CHECK_FALSE(quantum_membership(g, pi, std::array<Brane, 1>{c}, 1, prov).pass);
    }
}

TEST_CASE("lift") {
    SECTION("zero structure: identity") {
        PoissonStructure zero(2);
        ExactWeightProvider exact;
        PolyQ f0 = random_poly(2).subst_zero(std::vector<int>{2});
        auto res = lift(f0, zero, kLineR2, 2, 3, exact);
        CHECK(res.ok);
        CHECK(res.series.coeffs[0] == f0.to_double_coeffs());
        CHECK(res.series.coeffs[1].is_zero());
        CHECK(res.series.coeffs[2].is_zero());
    }
    SECTION("constant structure: invariants need no correction") {
        auto pi = fixtures::symplectic_r4();
        Brane c = fixtures::lagrangian_plane_r4();
        ExactWeightProvider exact;
        PolyQ f0 = PolyQ::constant(4, Rat(5));
        auto res = lift(f0, pi, c, 2, 2, exact);
        CHECK(res.ok);
        CHECK(res.series.coeffs[1].is_zero());
        CHECK(res.series.coeffs[2].is_zero());
    }
    SECTION("non-invariant input is rejected") {
        auto pi = fixtures::moyal_r2();
        ExactWeightProvider exact;
        CHECK_THROWS_AS(lift(PolyQ::variable(2, 1), pi, kLineR2, 2, 2, exact),
                        std::invalid_argument);
    }
    SECTION("2d Lie dual annihilator: x1 lifts through eps^2") {
        auto pi = fixtures::lie2d();
        Brane c = fixtures::lie2d_annihilator();
        McWeightProvider prov{nullptr, 100000, 13};
        auto res = lift(PolyQ::variable(2, 1), pi, c, 2, 3, prov);
        CHECK(res.ok);
        for (size_t j = 0; j < res.residuals.size(); ++j)
            CHECK(res.residuals[j] <= res.tols[j]);
    }
}

TEST_CASE("module products") {
    auto pi = fixtures::moyal_r2();
    Brane c0 = kFullR2, c1 = kLineR2;
    McWeightProvider prov{nullptr, 150000, 19};
    auto mod0 = mod_operators(pi, c0, c1, 1, prov, true);
    auto mod1 = mod_operators(pi, c0, c1, 1, prov, false);
    PolyQ one = PolyQ::constant(2, Rat(1));
    PolyQ x1 = PolyQ::variable(2, 1), x2 = PolyQ::variable(2, 2);

    SECTION("order-0 coefficient is the restricted pointwise product") {
        auto s = mod_product_right(x1, x1 * x2, mod0, c0, c1);
        CHECK(s.coeffs[0] == (x1 * x1 * x2).subst_zero(std::vector<int>{2}).to_double_coeffs());
        auto t = mod_product_left(x1, x1, mod1, c0, c1);
        CHECK(t.coeffs[0] == (x1 * x1).to_double_coeffs());
    }
    SECTION("zero structure: exact pointwise product") {
        PoissonStructure zero(2);
        ExactWeightProvider exact;
        auto m0 = mod_operators(zero, c0, c1, 2, exact, true);
        auto s = mod_product_right(x1, x1, m0, c0, c1);
        CHECK(s.coeffs[0] == x1 * x1);
        CHECK(s.coeffs[1].is_zero());
        CHECK(s.coeffs[2].is_zero());
    }
    SECTION("psi = 1, f = x1 gives x1 + O(eps)") {
        auto s = mod_product_right(one, x1, mod0, c0, c1);
        CHECK(s.coeffs[0] == x1.to_double_coeffs());
    }
    SECTION("argument domains are validated") {
        CHECK_THROWS_AS(mod_product_right(x2, x1, mod0, c0, c1), std::invalid_argument);
        CHECK_THROWS_AS(mod_product_left(x2, x1, mod1, c0, c1), std::invalid_argument);
    }
}

TEST_CASE("left and right quadrant weights map onto each other by reflection") {
    // reflecting the quadrant across its diagonal maps the W1 slice onto the
    // W0 slice: every class transposes, the two boundary roles exchange, each
    // edge form flips sign and the domain orientation flips once per free
    // point, so at k=1 (two edges, one point) the weights negate
    AdmGraph g = parse_key("1;0;2;Q;v1:(B1,mp),(B2,pp)");
    AdmGraph gt = parse_key("1;0;2;Q;v1:(B2,pm),(B1,pp)");
    auto w1 = weight_mc(g, Scheme::QuadrantW1, 400000, 23);
    auto w0 = weight_mc(gt, Scheme::QuadrantW0, 400000, 29);
    CHECK(std::abs(w1.value + w0.value) <= 3 * std::hypot(w1.stderr_, w0.stderr_));

    AdmGraph h = parse_key("1;0;2;Q;v1:(B1,pp),(B2,pp)");
    AdmGraph ht = parse_key("1;0;2;Q;v1:(B2,pp),(B1,pp)");
    auto v1 = weight_mc(h, Scheme::QuadrantW1, 400000, 23);
    auto v0 = weight_mc(ht, Scheme::QuadrantW0, 400000, 29);
    CHECK(std::abs(v1.value + v0.value) <= 3 * std::hypot(v1.stderr_, v0.stderr_));
}
