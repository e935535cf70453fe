#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "cantorlab/tentacle.hpp"

using namespace cantorlab;

namespace {

const TentacleParams& params3() {
    static TentacleParams p = autotune_widths(Sequences(3, 4), 4);
    return p;
}
const TentacleParams& params2() {
    static TentacleParams p = autotune_widths(Sequences(2, 4), 4);
    return p;
}

Dyadic dy(long long m, long long e) { return Dyadic::from_mant_exp(m, e); }

}  // namespace

TEST_CASE("axis endpoints at (3,4), generation 1") {
    Sequences s(3, 4);
    TentacleAxis ax = axis_params(s, 1);
    CHECK(ax.atil.cmp(dy(1, -4)) == 0);                   // 2 rh_1 = 2^-4
    CHECK(ax.ctil.cmp(dy(2, 0)) == 0);                    // 2 rh_0 = 2
    CHECK(ax.c.cmp(Dyadic::from_int(1).sub(dy(1, -10))) == 0);
    CHECK(ax.a.cmp(Dyadic::from_int(1).sub(dy(1, -10)).sub(dy(1, -15))) == 0);
    // chart lengths subtract the head radius
    CHECK(ax.A.cmp(ax.a.sub(s.rh(1))) == 0);
    CHECK(ax.C.cmp(ax.c.sub(s.rh(1))) == 0);
}

TEST_CASE("axis telescoping and monotonicity") {
    for (int n : {2, 3}) {
        Sequences s(n, 4);
        Dyadic prev_a;
        for (int k = 1; k <= 5; ++k) {
            TentacleAxis ax = axis_params(s, k);
            if (k >= 2) {
                CHECK(ax.c.cmp(prev_a) == 0);            // c_k = a_{k-1}
                CHECK(prev_a.cmp(ax.a) > 0);             // a_k strictly decreasing
            }
            CHECK(ax.c.sub(ax.a).cmp(s.rh(k + 2)) == 0); // c_k - a_k = rh_{k+2}
            CHECK(ax.a.to_double() > 0.99);              // beta = 4
            // (1 - a_k)(1 - 2^{-beta-1}) < 2^{-2 beta - 2}, exact
            Dyadic lhs = Dyadic::from_int(1).sub(ax.a).mul(
                Dyadic::from_int(1).sub(Dyadic::pow2(-5)));
            CHECK(lhs.cmp(Dyadic::pow2(-10)) < 0);
            CHECK(ax.atil.cmp(s.rh(k).mul_pow2(1)) == 0);
            CHECK(ax.ctil.cmp(s.rh(k - 1).mul_pow2(1)) == 0);
            prev_a = ax.a;
        }
    }
}

TEST_CASE("tuner output at (3,4): collar sizes, widths, bindings") {
    const TentacleParams& p = params3();
    CHECK(p.K == 4);
    // collar exponent bands (derived values; the constraint margins below pin
    // the meaning, the bands guard the magnitudes)
    CHECK(p.widths(1).N > 1e7);
    CHECK(p.widths(1).N < 1e9);
    CHECK(p.widths(2).N > 1e15);
    CHECK(p.widths(2).N < 1e17);
    CHECK(p.widths(3).N > 1e23);
    CHECK(p.widths(3).N < 1e25);
    CHECK(p.widths(4).N > 1e30);
    CHECK(p.widths(4).N < 1e32);
    // d_1 visible and bulk-bound; deeper widths routing-bound
    i128 ed1 = p.widths(1).d.log2_trailing();
    CHECK((long long)ed1 >= -17);
    CHECK((long long)ed1 <= -13);
    CHECK(p.widths(1).caps.binding_name == "bulk");
    for (int k = 2; k <= 4; ++k) {
        CHECK(p.widths(k).caps.binding_name == "routing");
        CHECK(p.widths(k).caps.has_routing);
        // d_k = 2^{e(b_{k-1}) - n - 1} exactly
        i128 want = p.widths(k - 1).b.log2_trailing() - 3 - 1;
        CHECK(p.widths(k).d.log2_trailing() == want);
    }
    // b_1 = d_1 2^{-N_1}: a concrete 10^8-bit exponent
    i128 eb1 = p.widths(1).b.log2_trailing();
    CHECK(eb1 == ed1 - (i128)(long long)p.widths(1).N);
    CHECK((long long)(ed1 - eb1) == 134217728);
}

TEST_CASE("tuner output at (2,4): fixed collar, routing chain") {
    const TentacleParams& p = params2();
    for (int k = 1; k <= 4; ++k) CHECK(p.widths(k).N == 32.0);
    i128 ed1 = p.widths(1).d.log2_trailing();
    CHECK((long long)ed1 >= -20);
    CHECK((long long)ed1 <= -13);
    for (int k = 1; k <= 4; ++k) {
        i128 ed = p.widths(k).d.log2_trailing();
        CHECK(ed == ed1 - (i128)35 * (k - 1));           // step -(n+1) - N
        CHECK(p.widths(k).b.log2_trailing() == ed - 32);
        // everything double-visible at n = 2
        CHECK(p.dd(k) > 0.0);
        CHECK(p.bd(k) > 0.0);
    }
}

TEST_CASE("width caps hold and doubling the width trips the binding cap") {
    struct Case { int n; int k; } cases[] = {{3, 1}, {3, 2}, {2, 1}, {2, 2}};
    for (auto cs : cases) {
        Sequences s(cs.n, 4);
        const TentacleParams& p = cs.n == 3 ? params3() : params2();
        CHECK(check_width_constraints(s, p, cs.k).empty());
        Dyadic doubled = p.widths(cs.k).d.mul_pow2(1);
        std::vector<std::string> bad = check_width_constraints(s, p, cs.k, doubled);
        CHECK(!bad.empty());
        bool names_binding = false;
        for (const std::string& v : bad)
            if (v == p.widths(cs.k).caps.binding_name) names_binding = true;
        CHECK(names_binding);
    }
}

TEST_CASE("stage ceiling: (3,4) tops out at K = 4") {
    Sequences s(3, 4);
    CHECK(max_stage(s) == 4);
    CHECK_THROWS_AS(autotune_widths(s, 5), std::runtime_error);
    CHECK(max_stage(Sequences(2, 4)) >= 8);
}

TEST_CASE("energy budget met at n = 3, honestly missed at n = 2") {
    const TentacleParams& p3 = params3();
    CHECK(p3.all_achieved);
    for (int k = 1; k <= 4; ++k) {
        const EnergyTerms& e = p3.energy[(size_t)k];
        CHECK(e.achieved);
        CHECK(e.total() < e.delta);
        CHECK(e.total() > 0.0);
    }
    const TentacleParams& p2 = params2();
    CHECK(!p2.all_achieved);
    for (int k = 1; k <= 4; ++k) {
        const EnergyTerms& e = p2.energy[(size_t)k];
        CHECK(!e.achieved);
        CHECK(e.floor_lower > e.delta);   // profile-independent obstruction
        CHECK(e.floor_lower <= e.total());
    }
}

TEST_CASE("station pattern numerators are odd and inside the face") {
    for (int n : {2, 3}) {
        std::set<int> seen;
        for (int slot = 1; slot <= (1 << n); ++slot) {
            int num = 2 * slot - 1 - (1 << n);
            CHECK(num % 2 != 0);
            CHECK(std::abs(num) < (1 << n));
            seen.insert(num);
        }
        CHECK((int)seen.size() == (1 << n));
    }
}

TEST_CASE("route pieces chain continuously and end on the parent face") {
    Sequences s(2, 4);
    const TentacleParams& p = params2();
    for (int slot = 1; slot <= 4; ++slot) {
        LocalRoute rt = build_route(s, p, 2, slot);
        CHECK(rt.pieces.size() == 5);
        CHECK(rt.l_face == doctest::Approx(l_face_d(s, p, 2, slot)).epsilon(1e-15));
        // piece boundaries shared, positions continuous
        for (size_t i = 0; i + 1 < rt.pieces.size(); ++i)
            CHECK(rt.pieces[i].l1 == doctest::Approx(rt.pieces[i + 1].l0));
        // |sigma| < b_1: the corridor lands inside the parent core
        CHECK(std::abs(rt.sigma) < p.bd(1));
        CHECK(rt.sigma != 0.0);
    }
    // hop length depends on |pat| only (mirror symmetry), but the corridor
    // offsets sigma separate all four branches
    std::set<double> lens, sigmas;
    for (int slot = 1; slot <= 4; ++slot) {
        lens.insert(l_face_d(s, p, 2, slot));
        sigmas.insert(build_route(s, p, 2, slot).sigma);
    }
    CHECK(lens.size() == 2);
    CHECK(sigmas.size() == 4);
}

TEST_CASE("chart evaluation is continuous across pieces and hop faces") {
    Sequences s(2, 4);
    const TentacleParams& p = params2();
    for (std::vector<int> slots : {std::vector<int>{2, 1}, {3, 4}, {1, 2, 3}}) {
        TentacleChart ch = TentacleChart::build(s, p, slots);
        int k = ch.gen();
        CHECK(ch.l_total == doctest::Approx(p.Cd(k)).epsilon(1e-15));
        Vec t = Vec::zeros(s.n);
        t.c[0] = 0.4 * p.dd(k);
        std::vector<double> joints;
        double off = 0;
        for (int j = k; j >= 2; --j) {
            for (const ChartPiece& q : ch.hops[(size_t)j - 1].pieces)
                joints.push_back(off + q.l1);
            off += ch.hops[(size_t)j - 1].l_face;
        }
        for (double lj : joints) {
            if (lj <= 1e-9 || lj >= ch.l_total - 1e-9) continue;
            Vec lo = ch.eval(lj - 1e-10, t);
            Vec hi = ch.eval(lj + 1e-10, t);
            CHECK(lo.dist_inf(hi) < 1e-9);
        }
    }
}

TEST_CASE("frames are rotations and elbow speed matches the radius ratio") {
    Sequences s(2, 4);
    const TentacleParams& p = params2();
    TentacleChart ch = TentacleChart::build(s, p, {4, 2});
    const LocalRoute& hop = ch.hops[1];
    for (const ChartPiece& q : hop.pieces) {
        if (!q.elbow) continue;
        for (double f : {0.1, 0.5, 0.9}) {
            double l = q.l0 + f * (q.l1 - q.l0);
            Vec t = Vec::zeros(s.n);
            t.c[s.n - 2] = 0.3 * p.dd(2);  // turn-plane coordinate
            double speed = 0;
            Mat Q = ch.frame(l, t, &speed);
            CHECK(speed == doctest::Approx((q.R + q.sr * t.c[s.n - 2]) / q.R).epsilon(1e-12));
            CHECK(std::abs(Q.det() - 1.0) < 1e-12);
            Mat QtQ = Q;  // Q^T Q
            for (int i = 0; i < s.n; ++i)
                for (int j = 0; j < s.n; ++j) {
                    double v = 0;
                    for (int r = 0; r < s.n; ++r) v += Q.at(r, i) * Q.at(r, j);
                    QtQ.at(i, j) = v;
                }
            CHECK(QtQ.sub(Mat::identity(s.n)).frob() < 1e-12);
        }
    }
}

TEST_CASE("elbow image volume equals the flat chart volume") {
    // odd symmetry of the speed factor: quadrature of speed over the chart
    // box reproduces length x width exactly
    Sequences s(2, 4);
    const TentacleParams& p = params2();
    TentacleChart ch = TentacleChart::build(s, p, {1, 3});
    const ChartPiece& q = ch.hops[1].pieces[1];
    REQUIRE(q.elbow);
    double w = p.dd(2);
    double sum = 0;
    int nl = 64, nt = 64;
    for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nt; ++j) {
            double tt = -w + 2.0 * w * (j + 0.5) / nt;
            sum += (q.R + q.sr * tt) / q.R;
        }
    sum *= (q.l1 - q.l0) / nl * 2.0 * w / nt;
    CHECK(sum == doctest::Approx((q.l1 - q.l0) * 2.0 * w).epsilon(1e-12));
    CHECK(q.l1 - q.l0 == doctest::Approx(3.14159265358979323846 * p.dd(2)).epsilon(1e-12));
}

TEST_CASE("locate inverts eval through elbows and rides") {
    Sequences s(2, 4);
    const TentacleParams& p = params2();
    // generation 1: generic transverse offsets are representable
    {
        TentacleChart ch = TentacleChart::build(s, p, {3});
        for (double f : {0.001, 0.3, 0.7, 0.999}) {
            Vec t = Vec::zeros(s.n);
            t.c[0] = -0.6 * p.dd(1);
            double l = f * ch.l_total;
            auto hit = ch.locate(ch.eval(l, t), p.dd(1));
            REQUIRE(hit);
            CHECK(std::abs(hit->first - l) < 1e-12);
            CHECK(std::abs(hit->second.c[0] - t.c[0]) < 1e-15);
        }
    }
    // generation 2: d_2 = 2^-53 sits at the ulp of O(1) positions, so generic
    // offsets survive only near the head; elsewhere test the centerline
    {
        TentacleChart ch = TentacleChart::build(s, p, {2, 4});
        Vec t = Vec::zeros(s.n);
        t.c[0] = 0.5 * p.dd(2);
        double l = 0.4 * p.rhd(2);  // inside the stub, coordinates ~ 2^-10
        auto hit = ch.locate(ch.eval(l, t), p.dd(2));
        REQUIRE(hit);
        CHECK(std::abs(hit->first - l) < 1e-15);
        CHECK(hit->second.c[0] == doctest::Approx(t.c[0]).epsilon(1e-9));
        for (double f : {0.01, 0.2, 0.5, 0.9, 0.999}) {
            double ll = f * ch.l_total;
            auto h2 = ch.locate(ch.eval(ll, Vec::zeros(s.n)), p.dd(2));
            REQUIRE(h2);
            CHECK(std::abs(h2->first - ll) < 1e-12);
        }
    }
}

TEST_CASE("locate at (3,4): visible generation 1, exact centerline deeper") {
    Sequences s(3, 4);
    const TentacleParams& p = params3();
    {
        TentacleChart ch = TentacleChart::build(s, p, {6});
        Vec t = Vec::zeros(s.n);
        t.c[0] = 0.3 * p.dd(1);
        t.c[1] = -0.8 * p.dd(1);
        double l = 0.55 * ch.l_total;
        auto hit = ch.locate(ch.eval(l, t), p.dd(1));
        REQUIRE(hit);
        CHECK(std::abs(hit->first - l) < 1e-12);
        CHECK(hit->second.dist_inf(t) < 1e-15);
    }
    {
        // d_2 underflows to zero width: the tube degenerates to its exact
        // dyadic centerline, which eval/locate still agree on
        TentacleChart ch = TentacleChart::build(s, p, {5, 2});
        CHECK(p.dd(2) == 0.0);
        for (double f : {0.05, 0.5, 0.95}) {
            double l = f * ch.l_total;
            auto hit = ch.locate(ch.eval(l, Vec::zeros(s.n)), p.dd(2));
            REQUIRE(hit);
            CHECK(std::abs(hit->first - l) < 1e-12);
        }
    }
}

TEST_CASE("locate_tube finds the branch on both route and ride") {
    Sequences s(2, 4);
    const TentacleParams& p = params2();
    TentacleChart ch = TentacleChart::build(s, p, {3, 2});
    // own route (before the parent face)
    double l_own = 0.5 * ch.hops[1].l_face;
    auto own = locate_tube(s, p, 2, ch.eval(l_own, Vec::zeros(s.n)));
    REQUIRE(own);
    CHECK(own->slots == std::vector<int>{3, 2});
    CHECK(std::abs(own->l - l_own) < 1e-12);
    // ride (through the parent chart)
    double l_ride = ch.hops[1].l_face + 0.6 * p.Cd(1);
    auto ride = locate_tube(s, p, 2, ch.eval(l_ride, Vec::zeros(s.n)));
    REQUIRE(ride);
    CHECK(ride->slots == std::vector<int>{3, 2});
    CHECK(std::abs(ride->l - l_ride) < 1e-12);
    // a parent-route point clear of every child band is a generation-1 hit
    // but not a generation-2 one
    TentacleChart par = TentacleChart::build(s, p, {3});
    Vec t = Vec::zeros(s.n);
    t.c[0] = 0.9 * p.dd(1);  // way outside |sigma| + d_2 < b_1 << d_1
    Vec x = par.eval(0.6 * par.l_total, t);
    CHECK(locate_tube(s, p, 1, x));
    CHECK(!locate_tube(s, p, 2, x));
}

TEST_CASE("nesting certificate passes for both profiles") {
    NestReport r3 = verify_nesting(Sequences(3, 4), params3(), 4);
    CHECK(r3.pass);
    CHECK(r3.violations.empty());
    CHECK(r3.ineq_checks > 0);
    NestReport r2 = verify_nesting(Sequences(2, 4), params2(), 4);
    CHECK(r2.pass);
    CHECK(r2.violations.empty());
    CHECK(r2.box_checks > 0);        // boxes materialize at n = 2
    CHECK(r2.disjoint_pairs > 0);
}

TEST_CASE("nesting gate rejects oversized widths before any geometry") {
    Sequences s(2, 4);
    TentacleParams p = params2();
    // d_2 far above the routing cap
    p.w[2].d = Dyadic::pow2(p.w[1].b.log2_trailing() + 2 * s.n + 1);
    NestReport r = verify_nesting(s, p, 2);
    CHECK(!r.pass);
    CHECK(!r.violations.empty());
    CHECK(r.box_checks == 0);
    CHECK(r.ineq_checks == 0);
}

TEST_CASE("squeeze profile: exact knee, exact inverse") {
    for (int n : {2, 3}) {
        const TentacleParams& p = n == 3 ? params3() : params2();
        for (int k = 1; k <= 2; ++k) {
            SqueezeProfile pr = SqueezeProfile::make(p, k);
            CHECK(pr.S(pr.A) == pr.rh);                 // knee hits the stub end exactly
            CHECK(pr.S(0.0) == 0.0);
            CHECK(pr.S(pr.C) == doctest::Approx(pr.C).epsilon(1e-15));
            for (double l : {0.1 * pr.A, 0.9 * pr.A, pr.A, 0.5 * (pr.A + pr.C), pr.C}) {
                CHECK(pr.S_inv(pr.S(l)) == doctest::Approx(l).epsilon(1e-12));
                if (pr.d > 0.0) {
                    double m = 0.5 * pr.d;
                    CHECK(pr.inv(pr.fwd(l, m), m) == doctest::Approx(l).epsilon(1e-11));
                }
                CHECK(pr.inv(pr.fwd(l, 0.0), 0.0) == doctest::Approx(l).epsilon(1e-11));
            }
            if (pr.d > 0.0) CHECK(pr.mu(pr.d) == 0.0);
            CHECK(pr.mu(0.0) == 1.0);
            if (pr.b > 0.0) CHECK(pr.mu(pr.b) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("squeeze pulls the core tip onto the stub: a_k to 2 rh_k") {
    Sequences s(2, 4);
    const TentacleParams& p = params2();
    SqueezeTower tw(s, p, 2);
    TentacleChart ch = TentacleChart::build(s, p, {2, 4});
    Vec tip = ch.eval(p.Ad(2), Vec::zeros(s.n));
    Vec y = tw.forward(tip);
    // tower centers have no x1 component, so absolute x1 is the chart reach
    CHECK(y.c[0] == doctest::Approx(2.0 * p.rhd(2)).epsilon(1e-12));
    CHECK(std::abs(y.c[1] - ch.zh[2].c[1]) < 1e-12);
    // and the chart agrees about where it landed
    auto hit = ch.locate(y, p.dd(2));
    REQUIRE(hit);
    CHECK(hit->first == doctest::Approx(p.rhd(2)).epsilon(1e-12));
}

TEST_CASE("squeeze tower round trips and keeps orientation") {
    Sequences s2(2, 4);
    const TentacleParams& p2 = params2();
    SqueezeTower tw2(s2, p2, 2);
    TentacleChart ch2 = TentacleChart::build(s2, p2, {1, 4});
    for (double f : {0.05, 0.3, 0.8, 0.97}) {
        Vec x = ch2.eval(f * ch2.l_total, Vec::zeros(s2.n));
        Vec y = tw2.forward(x);
        CHECK(tw2.inverse(y).dist_inf(x) < 1e-11);
        CHECK(tw2.jac(x) > 0.0);
    }
    // off the tubes: identity with identity jet
    Vec far = Vec::zeros(s2.n);
    far.c[0] = -0.5;
    far.c[1] = 0.5;
    CHECK(tw2.forward(far).dist_inf(far) == 0.0);
    CHECK(tw2.support_gen(far) == 0);
    CHECK(tw2.jet(far).sub(Mat::identity(s2.n)).frob() == 0.0);

    Sequences s3(3, 4);
    const TentacleParams& p3 = params3();
    SqueezeTower tw3(s3, p3, 2);
    TentacleChart ch3 = TentacleChart::build(s3, p3, {7, 1});
    for (double f : {0.1, 0.6, 0.95}) {
        Vec x = ch3.eval(f * ch3.l_total, Vec::zeros(s3.n));
        Vec y = tw3.forward(x);
        CHECK(tw3.inverse(y).dist_inf(x) < 1e-11);
        CHECK(tw3.jac(x) > 0.0);
    }
    // generation-1 interior point with visible transverse offset
    TentacleChart g1 = TentacleChart::build(s3, p3, {4});
    Vec t = Vec::zeros(s3.n);
    t.c[0] = 0.4 * p3.dd(1);
    Vec x1 = g1.eval(0.5 * g1.l_total, t);
    SqueezeTower tw1(s3, p3, 1);
    CHECK(tw1.inverse(tw1.forward(x1)).dist_inf(x1) < 1e-11);
    CHECK(tw1.support_gen(x1) == 1);
}

TEST_CASE("jet matches central differences inside the collar") {
    Sequences s(2, 4);
    const TentacleParams& p = params2();
    SqueezeTower tw(s, p, 1);
    TentacleChart ch = TentacleChart::build(s, p, {3});
    Vec t = Vec::zeros(s.n);
    t.c[0] = 1.3 * std::ldexp(1.0, -30);  // solidly inside (b_1, d_1)
    Vec x = ch.eval(0.4 * ch.l_total, t);
    Mat J = tw.jet(x);
    double h = std::ldexp(1.0, -40);
    Mat F = Mat::identity(s.n);
    for (int j = 0; j < s.n; ++j) {
        Vec xp = x, xm = x;
        xp.c[j] += h;
        xm.c[j] -= h;
        Vec d = tw.forward(xp) - tw.forward(xm);
        for (int i = 0; i < s.n; ++i) F.at(i, j) = d.c[i] / (2.0 * h);
    }
    CHECK(J.sub(F).frob() / J.frob() < 1e-5);
    CHECK(tw.jac(x) == doctest::Approx(J.det()).epsilon(1e-12));
}

TEST_CASE("centerline jet determinant is the slope ladder") {
    // first branch: the image lands in the own stub inside the parent head,
    // every older squeeze is the identity there, det = lambda_k; on the ride
    // the parent core contributes its own slope once
    Sequences s(2, 4);
    const TentacleParams& p = params2();
    SqueezeTower tw(s, p, 2);
    TentacleChart ch = TentacleChart::build(s, p, {2, 4});
    Vec x_first = ch.eval(0.35 * p.Ad(2), Vec::zeros(s.n));
    CHECK(tw.jac(x_first) == doctest::Approx(p.lam(2)).epsilon(1e-9));
    Sequences s3(3, 4);
    const TentacleParams& p3 = params3();
    SqueezeTower tw3(s3, p3, 2);
    TentacleChart ch3 = TentacleChart::build(s3, p3, {5, 2});
    Vec y_first = ch3.eval(0.5 * p3.Ad(2), Vec::zeros(s3.n));
    CHECK(tw3.jac(y_first) == doctest::Approx(p3.lam(2)).epsilon(1e-9));
}

TEST_CASE("regions: extents, ball bound, exact volumes") {
    Sequences s2(2, 4);
    const TentacleParams& p2 = params2();
    for (int k : {1, 2}) {
        std::vector<int> slots(k, 2);
        TentacleRegion sq = tentacle_region(s2, p2, slots, true, true);
        double ctil = p2.ax[(size_t)k].ctil.to_double();
        CHECK(sq.axis_extent <= ctil);
        CHECK(sq.axis_extent > 0.0);
        CHECK(sq.ball_radius <= 4.0 * (k >= 2 ? p2.rhd(k - 1) : 1.0));
        TentacleRegion un = tentacle_region(s2, p2, slots, true, false);
        CHECK(un.axis_extent == doctest::Approx(2.0 * p2.rhd(k)));
        // unsqueezed body reaches almost across the cell but stays inside
        TentacleRegion full = tentacle_region(s2, p2, slots, false, false);
        CHECK(full.axis_extent > 0.9);
        CHECK(full.axis_extent < 1.0);
        // exact volume bookkeeping: squeezed unprimed body is rh x (2b)^{n-1}
        CHECK(un.body_volume.cmp(s2.rh(k).mul(p2.w[(size_t)k].b.mul_pow2(1))) == 0);
    }
    Sequences s3(3, 4);
    const TentacleParams& p3 = params3();
    TentacleRegion sq3 = tentacle_region(s3, p3, {3, 6}, true, true);
    CHECK(sq3.axis_extent <= p3.ax[2].ctil.to_double());
    CHECK(sq3.ball_radius <= 4.0 * p3.rhd(1));
    CHECK(sq3.head.half.cmp(s3.rh(2)) == 0);
}

TEST_CASE("tube measures: exact primed/unprimed ratio, rapid decay") {
    Sequences s(2, 4);
    const TentacleParams& p = params2();
    Dyadic prev;
    for (int k = 1; k <= 4; ++k) {
        Dyadic primed = tube_measure(s, p, k, true);
        Dyadic unprimed = tube_measure(s, p, k, false);
        // d/b = 2^32 per transverse direction, exactly
        CHECK(primed.cmp(unprimed.mul_pow2(32)) == 0);
        if (k >= 2) CHECK(primed.mul_pow2(30).cmp(prev) < 0);
        prev = primed;
    }
}

TEST_CASE("collar energy: quadrature, closed form, and budget agree at (3,4)") {
    Sequences s(3, 4);
    const TentacleParams& p = params3();
    double re = 0;
    double quad = stage_local_energy_quad(s, p, 1, 2.0, &re);
    double exact = stage_local_energy_exact(s, p, 1);
    CHECK(re < 1e-4);
    CHECK(std::abs(quad - exact) / exact < 1e-3);
    CHECK(exact <= p.energy[1].total());
    CHECK(exact > 0.5 * p.energy[1].total());  // the bound is not slack by much
    CHECK(quad < p.energy[1].delta);
    // deeper stages have subatomic collars: closed form only
    CHECK(stage_local_energy_exact(s, p, 2) < p.energy[2].delta);
    CHECK_THROWS_AS(stage_local_energy_quad(s, p, 2, 2.0, nullptr),
                    std::invalid_argument);
}

TEST_CASE("collar energy at (2,4): floor <= quadrature <= upper bound") {
    Sequences s(2, 4);
    const TentacleParams& p = params2();
    for (int k : {1, 2}) {
        double re = 0;
        double quad = stage_local_energy_quad(s, p, k, 1.0, &re);
        CHECK(re < 1e-6);
        CHECK(p.energy[(size_t)k].floor_lower <= quad);
        CHECK(quad <= p.energy[(size_t)k].total() * (1.0 + 1e-9));
    }
}

TEST_CASE("quadrature at exponent zero reproduces the tube volume") {
    Sequences s3(3, 4);
    const TentacleParams& p3 = params3();
    double vol3 = stage_local_energy_quad(s3, p3, 1, 0.0, nullptr);
    CHECK(vol3 == doctest::Approx(tube_measure(s3, p3, 1, true).to_double()).epsilon(1e-6));
    Sequences s2(2, 4);
    const TentacleParams& p2 = params2();
    double vol2 = stage_local_energy_quad(s2, p2, 1, 0.0, nullptr);
    CHECK(vol2 == doctest::Approx(tube_measure(s2, p2, 1, true).to_double()).epsilon(1e-6));
}

TEST_CASE("supercritical exponent refuses to fake a value") {
    Sequences s(3, 4);
    CHECK_THROWS_AS(stage_local_energy_quad(s, params3(), 1, 2.5, nullptr),
                    std::domain_error);
}

TEST_CASE("squeeze_energy wraps the budget at the natural exponent") {
    Sequences s(3, 4);
    const TentacleParams& p = params3();
    SqueezeEnergy e = squeeze_energy(s, p, 1, 2.0);
    CHECK(e.value == p.energy[1].total());
    CHECK(e.quadrature);
    CHECK(e.rel_err < 1e-3);
    SqueezeEnergy e2 = squeeze_energy(s, p, 2, 2.0);
    CHECK(e2.value == p.energy[2].total());
    CHECK(!e2.quadrature);   // collar below double range, bound only
}
