#include "branequant/poisson.hpp"
#include "branequant/verify.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace branequant;

namespace {

std::mt19937 rng(77001);

PolyQ random_poly(int dim, int max_deg = 2) {
    std::uniform_int_distribution<int> nd(0, 3);
    std::uniform_int_distribution<int> ed(0, max_deg);
    std::uniform_int_distribution<int> cd(-4, 4);
    PolyQ p(dim);
    int n = nd(rng);
    for (int t = 0; t < n; ++t) {
        std::vector<int> e(dim);
        for (int i = 0; i < dim; ++i) e[i] = ed(rng);
        p.add_term(e, Rat(cd(rng)));
    }
    return p;
}

PoissonStructure random_bivector(int dim) {
    PoissonStructure pi(dim);
    for (int i = 1; i <= dim; ++i)
        for (int j = i + 1; j <= dim; ++j) pi.set(i, j, random_poly(dim, 1));
    return pi;
}

// independent oracle: {f,g} via explicit double sum, composed twice
PolyQ bracket(const PoissonStructure& pi, const PolyQ& f, const PolyQ& g) {
    PolyQ r(pi.dim);
    for (int i = 1; i <= pi.dim; ++i)
        for (int j = 1; j <= pi.dim; ++j) r += pi.component(i, j) * f.diff(i) * g.diff(j);
    return r;
}

PolyQ jacobi_oracle(const PoissonStructure& pi, int j, int k, int l) {
    PolyQ xj = PolyQ::variable(pi.dim, j);
    PolyQ xk = PolyQ::variable(pi.dim, k);
    PolyQ xl = PolyQ::variable(pi.dim, l);
    return bracket(pi, xj, bracket(pi, xk, xl)) + bracket(pi, xk, bracket(pi, xl, xj)) +
           bracket(pi, xl, bracket(pi, xj, xk));
}

} // namespace

TEST_CASE("jacobiator vanishes for constant structures") {
    PoissonStructure pi(4);
    pi.set(1, 2, PolyQ::constant(4, Rat(2)));
    pi.set(3, 4, PolyQ::constant(4, Rat(-1, 3)));
    pi.set(1, 3, PolyQ::constant(4, Rat(5)));
    CHECK(jacobiator(pi).is_zero());
    CHECK(is_poisson(pi));
}

TEST_CASE("jacobiator matches the bracket composition oracle") {
    for (int trial = 0; trial < 15; ++trial) {
        auto pi = random_bivector(3);
        auto jac = jacobiator(pi);
        for (int j = 1; j <= 3; ++j)
            for (int k = 1; k <= 3; ++k)
                for (int l = 1; l <= 3; ++l) {
                    if (j == k || k == l || j == l) continue;
                    // {x^j,{x^k,x^l}} + cyc = -J^{jkl}
                    CHECK(jacobi_oracle(pi, j, k, l) == -jac.component({j, k, l}));
                }
    }
}

TEST_CASE("so(3) structure is Poisson, breaking one component is not") {
    CHECK(jacobiator(fixtures::so3()).is_zero());
    auto bad = fixtures::nonpoisson_r3();
    auto jac = jacobiator(bad);
    CHECK_FALSE(jac.is_zero());
    // oracle agrees it is nonzero
    CHECK_FALSE(jacobi_oracle(bad, 1, 2, 3).is_zero());
}

TEST_CASE("jacobiator is antisymmetric under index transposition") {
    for (int trial = 0; trial < 10; ++trial) {
        auto pi = random_bivector(4);
        auto jac = jacobiator(pi);
        for (int t = 0; t < 8; ++t) {
            int a = 1 + int(rng() % 4), b = 1 + int(rng() % 4), c = 1 + int(rng() % 4);
            if (a == b || b == c || a == c) continue;
            CHECK(jac.component({a, b, c}) == -jac.component({b, a, c}));
            CHECK(jac.component({a, b, c}) == -jac.component({a, c, b}));
        }
    }
}

TEST_CASE("coisotropy of coordinate branes") {
    // codimension one is automatic
    for (int trial = 0; trial < 10; ++trial) {
        auto pi = random_bivector(3);
        for (int drop = 1; drop <= 3; ++drop) {
            std::vector<int> tang;
            for (int i = 1; i <= 3; ++i)
                if (i != drop) tang.push_back(i);
            CHECK(check_coisotropic(pi, Brane(3, tang)));
        }
    }
    // annihilator of span(e2) in a 2d nonabelian dual presented as pi^{12} = x1
    PoissonStructure aff(2);
    aff.set(1, 2, PolyQ::variable(2, 1));
    CHECK(check_coisotropic(aff, Brane(2, {1})));
    // standard symplectic R4, {x3 = x4 = 0} is not coisotropic
    CHECK_FALSE(check_coisotropic(fixtures::symplectic_r4(), Brane(4, {1, 2})));
    // but the Lagrangian plane {x2 = x4 = 0} is
    CHECK(check_coisotropic(fixtures::symplectic_r4(), fixtures::lagrangian_plane_r4()));
}

TEST_CASE("characteristic fields") {
    SECTION("constant symplectic R2, C = {x2=0}") {
        auto pi = fixtures::moyal_r2();
        Brane c(2, {1});
        auto fields = characteristic_fields(pi, c);
        REQUIRE(fields.size() == 1);
        // E^2 = pi^{21} d_1 = -d_1
        CHECK(fields[0].comp[0] == PolyQ::constant(2, Rat(-1)));
        CHECK(fields[0].comp[1].is_zero());
    }
    SECTION("zero structure") {
        PoissonStructure pi(3);
        auto fields = characteristic_fields(pi, Brane(3, {1}));
        REQUIRE(fields.size() == 2);
        for (const auto& f : fields) CHECK(f.is_zero());
    }
    SECTION("so(3), C = {x3=0}: E^3 = x2 d_1 - x1 d_2") {
        auto fields = characteristic_fields(fixtures::so3(), fixtures::so3_hyperplane());
        REQUIRE(fields.size() == 1);
        CHECK(fields[0].comp[0] == PolyQ::variable(3, 2));
        CHECK(fields[0].comp[1] == -PolyQ::variable(3, 1));
        CHECK(fields[0].comp[2].is_zero());
    }
    SECTION("non-coisotropic brane is rejected") {
        CHECK_THROWS_AS(characteristic_fields(fixtures::symplectic_r4(), Brane(4, {1, 2})),
                        std::invalid_argument);
    }
}

TEST_CASE("characteristic fields kill conormal coordinates on C") {
    for (int trial = 0; trial < 10; ++trial) {
        auto pi = random_bivector(3);
        for (int drop = 1; drop <= 3; ++drop) {
            std::vector<int> tang;
            for (int i = 1; i <= 3; ++i)
                if (i != drop) tang.push_back(i);
            Brane c(3, tang);
            if (!check_coisotropic(pi, c)) continue;
            auto con = c.conormal();
            auto fields = characteristic_fields(pi, c);
            for (size_t m = 0; m < con.size(); ++m)
                for (int nu : con) {
                    // E^mu(x^nu)|_C = pi^{mu nu}|_C = 0
                    auto v = fields[m].apply(PolyQ::variable(3, nu)).subst_zero(con);
                    CHECK(v.is_zero());
                }
        }
    }
}

TEST_CASE("classical invariance") {
    auto so3 = fixtures::so3();
    Brane c = fixtures::so3_hyperplane();
    PolyQ x1 = PolyQ::variable(3, 1), x2 = PolyQ::variable(3, 2);
    CHECK(is_invariant(x1 * x1 + x2 * x2, so3, c));
    CHECK_FALSE(is_invariant(x1, so3, c));
    PoissonStructure zero(3);
    CHECK(is_invariant(x1, zero, c));
    CHECK_THROWS_AS(is_invariant(PolyQ::variable(3, 3), so3, c), std::invalid_argument);
}

TEST_CASE("relative multivector membership") {
    SECTION("degree 2 coincides with coisotropy") {
        for (int trial = 0; trial < 20; ++trial) {
            auto pi = random_bivector(3);
            RelativeMultivector alpha(3, 2);
            for (int i = 1; i <= 3; ++i)
                for (int j = i + 1; j <= 3; ++j) alpha.set({i, j}, pi.component(i, j));
            std::vector<int> tang{1 + int(rng() % 3)};
            Brane c(3, tang);
            CHECK(relative_membership(alpha, c) == check_coisotropic(pi, c));
        }
    }
    SECTION("degree 1: tangent vector fields belong") {
        RelativeMultivector v(3, 1);
        v.set({1}, PolyQ::variable(3, 2));
        v.set({2}, PolyQ::constant(3, Rat(1)));
        CHECK(relative_membership(v, Brane(3, {1, 2})));
        v.set({3}, PolyQ::constant(3, Rat(1)));
        CHECK_FALSE(relative_membership(v, Brane(3, {1, 2})));
    }
    SECTION("symplectic R4 bivector fails for a non-coisotropic plane") {
        auto pi = fixtures::symplectic_r4();
        RelativeMultivector alpha(4, 2);
        for (int i = 1; i <= 4; ++i)
            for (int j = i + 1; j <= 4; ++j) alpha.set({i, j}, pi.component(i, j));
        CHECK_FALSE(relative_membership(alpha, Brane(4, {1, 2})));
        CHECK(relative_membership(alpha, fixtures::lagrangian_plane_r4()));
    }
}

TEST_CASE("antisymmetric storage of multivectors") {
    RelativeMultivector a(3, 2);
    a.set({2, 1}, PolyQ::variable(3, 3));
    CHECK(a.component({1, 2}) == -PolyQ::variable(3, 3));
    CHECK(a.component({2, 1}) == PolyQ::variable(3, 3));
    CHECK(a.component({1, 1}).is_zero());
    CHECK_THROWS_AS(a.set({1, 1}, PolyQ::variable(3, 1)), std::invalid_argument);
}
