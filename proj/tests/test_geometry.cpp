#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cantorlab/geometry.hpp"

using namespace cantorlab;

static Dyadic frac(long long m, long long den_pow2) { return Dyadic::from_mant_exp(m, -den_pow2); }

TEST_CASE("scale sequences at n=3, beta=4") {
    Sequences s(3, 4);
    CHECK(s.valid());
    CHECK(s.alpha(0) == Dyadic::from_int(1));
    CHECK(s.beta_pow(0) == Dyadic::from_int(1));
    CHECK(s.r(0) == Dyadic::from_int(1));
    CHECK(s.rt(0) == Dyadic::from_int(1));

    CHECK(s.alpha(1) == frac(17, 5));    // 17/32
    CHECK(s.r(1) == frac(17, 6));        // 17/64
    CHECK(s.rp(1) == frac(1, 1));        // 1/2 = r_0 / 2
    CHECK(s.rt(1) == frac(1, 5));        // 1/32
    CHECK(s.rtp(1) == frac(1, 1));       // 1/2: first squeezed frame is flush

    // primed cubes tile their parent exactly: r'_k = r_{k-1}/2
    for (int k = 1; k <= 10; ++k) CHECK(s.rp(k) == s.r(k - 1).half());
    // affine frame profile has slope (beta-gap)/(alpha-gap) = 2 exactly
    for (int k = 1; k <= 10; ++k) {
        Dyadic num = s.beta_pow(k - 1) - s.beta_pow(k);
        Dyadic den = s.alpha(k - 1) - s.alpha(k);
        CHECK(num == den.mul_pow2(1));
    }
}

TEST_CASE("slot bijection") {
    int n = 3;
    CHECK(slot_of_vertex({-1, -1, -1}, n) == 1);
    CHECK(slot_of_vertex({+1, +1, +1}, n) == 8);
    CHECK(slot_of_vertex({-1, +1, -1}, n) == 3);
    for (int j = 1; j <= 8; ++j) CHECK(slot_of_vertex(vertex_of_slot(j, n), n) == j);
    CHECK(slot_of_vertex({-1, -1}, 2) == 1);
    CHECK(slot_of_vertex({+1, -1}, 2) == 3);
    for (int j = 1; j <= 4; ++j) CHECK(slot_of_vertex(vertex_of_slot(j, 2), 2) == j);
}

TEST_CASE("vertex paths serialize as slash strings") {
    auto p = VertexPath::parse("+++/-+-", 3);
    REQUIRE(p.has_value());
    CHECK(p->depth() == 2);
    CHECK(p->v[1][0] == -1);
    CHECK(p->v[1][1] == +1);
    CHECK(p->to_string() == "+++/-+-");
    CHECK(!VertexPath::parse("++", 3).has_value());
    CHECK(!VertexPath::parse("+++/++", 3).has_value());
    CHECK(VertexPath::parse("", 3)->depth() == 0);
    auto q = VertexPath::parse("-+-", 3);
    CHECK(q->slots() == std::vector<int>{3});
}

TEST_CASE("centers from the defining sums") {
    CantorGeometry g(Sequences(3, 4));
    auto p1 = *VertexPath::parse("+++", 3);
    DPoint z1 = g.corner_center(p1);
    for (int i = 0; i < 3; ++i) CHECK(z1.x[i] == frac(1, 1));
    DPoint zt1 = g.tilde_center(p1);
    for (int i = 0; i < 3; ++i) CHECK(zt1.x[i] == frac(1, 1));

    // depth 2, first coordinate: (1/2)(1*1 + (17/64)*sign)
    auto p2 = *VertexPath::parse("+++/-++", 3);
    CHECK(g.corner_center(p2).x[0] == frac(47, 7));   // 47/128
    auto p2b = *VertexPath::parse("+++/+++", 3);
    CHECK(g.corner_center(p2b).x[0] == frac(81, 7));  // 81/128

    // tower: slot 1 at depth 1 sits at height -7/8
    DPoint zh = g.tower_center({1});
    CHECK(zh.x[0] == Dyadic{});
    CHECK(zh.x[1] == Dyadic{});
    CHECK(zh.x[2] == frac(-7, 3));
    // depth 2 stacks with step rh_1 = 1/32
    DPoint zh2 = g.tower_center({1, 8});
    CHECK(zh2.x[2] == frac(-7, 3) + frac(1, 5).mul(frac(7, 3)));
}

TEST_CASE("locate walks the unprimed cubes") {
    CantorGeometry g(Sequences(3, 4));
    DPoint origin = DPoint::zeros(3);
    auto l0 = g.locate(origin);
    CHECK(l0.inside_root);
    CHECK(l0.path.depth() == 0);  // origin is strictly between generation-1 cubes

    DPoint z1 = DPoint::zeros(3);
    for (auto& c : z1.x) c = frac(1, 1);
    auto l1 = g.locate(z1);
    CHECK(l1.path.depth() == 1);
    CHECK(l1.path.to_string() == "+++");

    // a face point of the generation-1 cube still counts (closed containment)
    DPoint face = z1;
    face.x[0] = face.x[0] + g.seq.r(1);
    auto lf = g.locate(face);
    CHECK(lf.path.depth() == 1);

    // outside the root
    DPoint far = DPoint::zeros(3);
    far.x[0] = Dyadic::from_int(2);
    CHECK(!g.locate(far).inside_root);

    // deep chain: center of a depth-8 cube locates to depth 8
    VertexPath chain;
    chain.n = 3;
    for (int j = 0; j < 8; ++j) chain.v.push_back(Vertex{j % 2 ? 1 : -1, 1, -1});
    auto lc = g.locate(g.corner_center(chain), 8);
    CHECK(lc.path.depth() == 8);
    CHECK(lc.path.to_string() == chain.to_string());
}

TEST_CASE("volume identities are exact") {
    for (int n : {2, 3}) {
        CantorGeometry g(Sequences(n, n + 1));
        for (int k = 0; k <= 8; ++k) CHECK(g.volume_identity_holds(k));
        // frame volume matches the closed form 2^{(1-k)n} (alpha_{k-1}^n - alpha_k^n)
        for (int k = 1; k <= 8; ++k) {
            Dyadic closed = (g.seq.alpha(k - 1).pow(n) - g.seq.alpha(k).pow(n))
                                .mul_pow2((i128)(1 - k) * n);
            CHECK(g.generation_volume(k) == closed);
        }
    }
}

TEST_CASE("stage volumes approach the Cantor set measure 1") {
    // run at n=3, beta=4 (the rate n * 2^-k*beta is fastest here)
    CantorGeometry g(Sequences(3, 4));
    Dyadic one = Dyadic::from_int(1);
    Dyadic err = g.cantor_stage_volume(10) - one;
    CHECK(err > Dyadic{});
    CHECK(err < Dyadic::pow2(-35));
    // and it is monotone decreasing in k
    for (int k = 1; k <= 9; ++k)
        CHECK(g.cantor_stage_volume(k + 1) < g.cantor_stage_volume(k));
}

TEST_CASE("frame measure comparability against the display shorthand") {
    // exact ratio of |Q'\Q| to 2^{-nk} (alpha_{k-1} - alpha_k) alpha_k^{n-1}
    // is 2^n * sum_{i<n} (alpha_{k-1}/alpha_k)^i, strictly inside (n 2^n, 4^n)
    for (int n : {2, 3}) {
        CantorGeometry g(Sequences(n, n + 1));
        for (int k = 1; k <= 8; ++k) {
            double frame = g.generation_volume(k).to_double();
            double shorthand = ((g.seq.alpha(k - 1) - g.seq.alpha(k)) * g.seq.alpha(k).pow(n - 1))
                                   .mul_pow2(-(i128)n * k)
                                   .to_double();
            double ratio = frame / shorthand;
            CHECK(ratio > n * (1 << n));
            CHECK(ratio < std::pow(4.0, n));
            double a = (g.seq.alpha(k - 1).to_double() / g.seq.alpha(k).to_double());
            double expect = 0.0;
            for (int i = 0; i < n; ++i) expect += std::pow(a, i);
            expect *= (1 << n);
            CHECK(ratio == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("tower geometry is admissible for beta >= n+1 only") {
    CHECK(CantorGeometry(Sequences(3, 4)).tower_valid());
    CHECK(CantorGeometry(Sequences(2, 3)).tower_valid());
    CHECK(CantorGeometry(Sequences(3, 5)).tower_valid());
    CHECK(!CantorGeometry(Sequences(3, 3)).tower_valid());  // beta = n fails
    CHECK(!Sequences(3, 3).valid());
}
