#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cantorlab/composite.hpp"

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

std::vector<int> slots_of(long long idx, int gen, int n) {
    std::vector<int> s((size_t)gen);
    for (int j = 0; j < gen; ++j) {
        s[(size_t)j] = 1 + (int)(idx % (1LL << n));
        idx /= (1LL << n);
    }
    return s;
}

// midpoint of the longest straight piece of a hop, in hop-local arclength
double mid_straight(const LocalRoute& r) {
    double best0 = 0, best1 = 0;
    for (const ChartPiece& pc : r.pieces) {
        if (pc.elbow) continue;
        double l1 = std::min(pc.l1, r.l_face > 0 ? r.l_face : pc.l1);
        if (l1 - pc.l0 > best1 - best0) {
            best0 = pc.l0;
            best1 = l1;
        }
    }
    return 0.5 * (best0 + best1);
}

// domain point on a tube centerline, pulled back through the given stage
Vec tube_point(const Sequences& s, const TentacleParams& p, int stage,
               const std::vector<int>& slots, double l, double toff = 0) {
    TentacleChart ch = TentacleChart::build(s, p, slots);
    Vec t = Vec::zeros(s.n - 1);
    t[0] = toff;
    Vec xi = ch.eval(l, t);
    CornerMap g(s, stage);
    TowerMap L(s, stage);
    return g.inverse(L.inverse(xi));
}

// direct quadrature of |Df_k - Df_{k-1}|^q over the generation-k band down
// to log-depth ucap, using only the public composite jets
double direct_difference(const Sequences& s, const TentacleParams& p, int k, double q,
                         int lpan, int upan, double ucap) {
    CompositeMap fk = CompositeMap::build(s, p, k);
    CompositeMap fk1 = CompositeMap::build(s, p, k - 1);
    CornerMap g(s, k);
    TowerMap L(s, k);
    SqueezeProfile pr = SqueezeProfile::make(p, k);
    double U = std::min(ucap, pr.L);
    double total = 0;
    int nb = 1 << (s.n * k);
    for (int idx = 0; idx < nb; ++idx) {
        TentacleChart ch = TentacleChart::build(s, p, slots_of(idx, k, s.n));
        double C = ch.l_total;
        for (int i = 0; i < lpan; ++i) {
            double l = (i + 0.5) * C / lpan;
            double wl = C / lpan;
            auto sample = [&](const Vec& t, double weight) {
                Vec xi = ch.eval(l, t);
                Vec x1 = L.inverse(xi);
                Vec x0 = g.inverse(x1);
                double jp = 1.0 / std::abs(L.jet(x1).mul(g.jet(x0)).det());
                double sp = 1;
                ch.frame(l, t, &sp);
                Mat D = fk.jet(x0).sub(fk1.jet(x0));
                total += wl * weight * jp * sp * std::pow(D.frob(), q);
            };
            for (int j = 0; j < upan; ++j) {
                double u = (j + 0.5) * U / upan;
                double m = pr.d * std::exp(-u);
                double wm = m * U / upan;  // dm = m du per transverse side
                if (s.n == 2) {
                    for (int sg = -1; sg <= 1; sg += 2) {
                        Vec t = Vec::zeros(1);
                        t[0] = sg * m;
                        sample(t, wm);
                    }
                } else {
                    // eight points around the sup-radius ring, weight 8 m dm
                    for (int e = 0; e < 8; ++e) {
                        Vec t = Vec::zeros(2);
                        double half = (e & 2) ? 0.5 : -0.5;
                        double sgn = (e & 1) ? 1.0 : -1.0;
                        if (e < 4) {
                            t[0] = sgn * m;
                            t[1] = half * m;
                        } else {
                            t[0] = half * m;
                            t[1] = sgn * m;
                        }
                        sample(t, m * wm);
                    }
                }
            }
            // core below the collar, present only when it is representable
            if (ucap >= pr.L && pr.b > 0) {
                if (s.n == 2) {
                    for (int sg = -1; sg <= 1; sg += 2) {
                        Vec t = Vec::zeros(1);
                        t[0] = sg * 0.5 * pr.b;
                        sample(t, pr.b);
                    }
                } else {
                    for (int e = 0; e < 4; ++e) {
                        Vec t = Vec::zeros(2);
                        t[0] = (e & 1 ? 0.5 : -0.5) * pr.b;
                        t[1] = (e & 2 ? 0.5 : -0.5) * pr.b;
                        sample(t, pr.b * pr.b);
                    }
                }
            }
        }
    }
    return total;
}

}  // namespace

TEST_CASE("stage zero composite is the identity") {
    const TentacleParams& p = params2();
    Sequences s(2, 4);
    CompositeMap f = CompositeMap::build(s, p, 0);
    Vec x = Vec::zeros(2);
    x[0] = 0.3721;
    x[1] = -0.554;
    Vec y = f.forward(x);
    CHECK(y[0] == x[0]);
    CHECK(y[1] == x[1]);
    CHECK(f.support_gen(x) == 0);
    CHECK(f.jac(x) == 1.0);
    Mat J = f.jet(x);
    CHECK(J.at(0, 0) == 1.0);
    CHECK(J.at(0, 1) == 0.0);
}

TEST_CASE("composite build validates its inputs") {
    CHECK_THROWS_AS(CompositeMap::build(Sequences(2, 4), params2(), 5), std::invalid_argument);
    CHECK_THROWS_AS(CompositeMap::build(Sequences(2, 4), params2(), -1), std::invalid_argument);
    CHECK_THROWS_AS(CompositeMap::build(Sequences(3, 4), params2(), 1), std::invalid_argument);
    CHECK_THROWS_AS(CompositeMap::build(Sequences(2, 5), params2(), 1), std::invalid_argument);
}

TEST_CASE("boundary, corners, and kept centers stay fixed") {
    FixedPointReport r2 = fixed_point_check(Sequences(2, 4), params2(), 2, 64, 300);
    CHECK(r2.violations == 0);
    CHECK(r2.samples > 500);
    CHECK(r2.max_dev <= 1e-10);

    FixedPointReport r3 = fixed_point_check(Sequences(3, 4), params3(), 2, 25, 150);
    CHECK(r3.violations == 0);
    CHECK(r3.samples > 300);
}

TEST_CASE("tube points move and return") {
    Sequences s2(2, 4);
    const TentacleParams& p2 = params2();

    CompositeMap f1 = CompositeMap::build(s2, p2, 1);
    TentacleChart c1 = TentacleChart::build(s2, p2, {2});
    Vec xa = tube_point(s2, p2, 1, {2}, 0.37 * c1.l_total);
    CHECK(f1.support_gen(xa) == 1);
    Vec ya = f1.forward(xa);
    CHECK(ya.dist_inf(xa) > 1e-6);
    CHECK(f1.inverse(ya).dist_inf(xa) < 1e-9);
    CHECK(f1.jac(xa) > 0);

    // ride segment of a second-generation tube, still on the centerline;
    // the ride width is about one ulp of the coordinates there, so the
    // round trip back through the outer factors cannot re-resolve the tube
    // and the inverse is not asserted at this depth
    CompositeMap f2 = CompositeMap::build(s2, p2, 2);
    TentacleChart c2 = TentacleChart::build(s2, p2, {2, 3});
    double lf2 = c2.hops[1].l_face;
    REQUIRE(lf2 < c2.l_total);
    double lride = lf2 + 0.6 * (c2.l_total - lf2);
    Vec xb = tube_point(s2, p2, 2, {2, 3}, lride);
    CHECK(f2.support_gen(xb) == 2);
    Vec yb = f2.forward(xb);
    CHECK(yb.dist_inf(xb) > 1e-9);
    CHECK(f2.jac(xb) > 0);

    // at n = 3 the second-generation offsets are below double range, so the
    // same construction resolves as a first-generation point and the map
    // honestly acts at that depth
    Sequences s3(3, 4);
    const TentacleParams& p3 = params3();
    CompositeMap g2 = CompositeMap::build(s3, p3, 2);
    TentacleChart c3 = TentacleChart::build(s3, p3, {3, 5});
    double lf3 = c3.hops[1].l_face;
    Vec xc = tube_point(s3, p3, 2, {3, 5}, lf3 + 0.6 * (c3.l_total - lf3));
    CHECK(g2.support_gen(xc) == 1);
    Vec yc = g2.forward(xc);
    CHECK(yc.dist_inf(xc) > 0);
    CHECK(g2.inverse(yc).dist_inf(xc) < 1e-7);
}

TEST_CASE("consecutive stages agree away from the deeper tubes") {
    Sequences s(2, 4);
    const TentacleParams& p = params2();
    CompositeMap f1 = CompositeMap::build(s, p, 1);
    CompositeMap f2 = CompositeMap::build(s, p, 2);

    // inside the first tube but clear of every second-generation ride
    TentacleChart c1 = TentacleChart::build(s, p, {3});
    double d1 = p.dd(1);
    Vec x = tube_point(s, p, 2, {3}, 0.52 * c1.l_total, d1 / 3);
    CHECK(f2.support_gen(x) == 1);
    CHECK(f1.support_gen(x) == 1);
    Vec y1 = f1.forward(x);
    Vec y2 = f2.forward(x);
    CHECK(y1.dist_inf(x) > 1e-9);
    CHECK(y2.dist_inf(y1) < 1e-13);

    // inside a second-generation tube head-side branch: the shallower map
    // does not see it at all
    TentacleChart c2 = TentacleChart::build(s, p, {1, 4});
    double lown = mid_straight(c2.hops[1]);
    Vec xz = tube_point(s, p, 2, {1, 4}, lown);
    CHECK(f2.support_gen(xz) == 2);
    CHECK(f1.support_gen(xz) == 0);
    Vec z1 = f1.forward(xz);
    CHECK(z1[0] == xz[0]);
    CHECK(z1[1] == xz[1]);
    Mat J1 = f1.jet(xz);
    CHECK(J1.at(0, 0) == 1.0);
    CHECK(J1.at(1, 0) == 0.0);
    CHECK(f2.forward(xz).dist_inf(xz) > 1e-12);

    // far from every tube: the composite is bitwise the identity
    Vec far = Vec::zeros(2);
    far[0] = 0.8342;
    far[1] = 0.6177;
    REQUIRE(f2.support_gen(far) == 0);
    Vec yf = f2.forward(far);
    CHECK(yf[0] == far[0]);
    CHECK(yf[1] == far[1]);
}

namespace {

// Two-sided difference of f along a tube centerline against the jet. The
// collar profile is steeper than doubles can resolve transversally, so a
// sample only admits a clean comparison when all three points resolve to
// the same generation and the jet magnitude keeps the roundoff floor of the
// difference quotient below five percent; the helper scans for such a
// sample and the tolerance tracks that floor.
bool jet_fd_agrees(const Sequences& s, const TentacleParams& p, int stage,
                   const std::vector<int>& slots) {
    TentacleChart ch = TentacleChart::build(s, p, slots);
    double lf = slots.size() > 1 ? ch.hops[slots.size() - 1].l_face : 0.0;
    CompositeMap f = CompositeMap::build(s, p, stage);
    CornerMap g(s, stage);
    TowerMap L(s, stage);
    auto xat = [&](double la) {
        Vec xi = ch.eval(la, Vec::zeros(s.n - 1));
        return g.inverse(L.inverse(xi));
    };
    for (double frac : {0.45, 0.65, 0.55, 0.35, 0.6, 0.5, 0.42}) {
        double l = lf + frac * (ch.l_total - lf);
        for (double dl : {1e-5, 1e-6}) {
            Vec xm = xat(l - dl), x0 = xat(l), xp = xat(l + dl);
            int g0 = f.support_gen(x0);
            if (g0 == 0 || f.support_gen(xm) != g0 || f.support_gen(xp) != g0) continue;
            Mat J = f.jet(x0);
            double jmax = 0;
            for (int i = 0; i < s.n; ++i)
                for (int j = 0; j < s.n; ++j) jmax = std::max(jmax, std::fabs(J.at(i, j)));
            Vec ym = f.forward(xm), yp = f.forward(xp);
            Vec dxdl = Vec::zeros(s.n), dydl = Vec::zeros(s.n);
            for (int i = 0; i < s.n; ++i) {
                dxdl[i] = (xp[i] - xm[i]) / (2 * dl);
                dydl[i] = (yp[i] - ym[i]) / (2 * dl);
            }
            double scale = std::max(1.0, dydl.max_abs());
            double tol = std::max(2e-4, 5e-15 * jmax / (2 * dl * scale));
            if (tol > 0.05) continue;
            if (J.apply(dxdl).dist_inf(dydl) / scale < tol) return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("jet matches the map along the centerline") {
    Sequences s2(2, 4);
    const TentacleParams& p2 = params2();
    CHECK(jet_fd_agrees(s2, p2, 1, {2}));
    CHECK(jet_fd_agrees(s2, p2, 2, {2, 3}));

    Sequences s3(3, 4);
    const TentacleParams& p3 = params3();
    CHECK(jet_fd_agrees(s3, p3, 1, {4}));
    CHECK(jet_fd_agrees(s3, p3, 2, {6, 2}));
}

TEST_CASE("difference integral brackets a direct quadrature") {
    Sequences s2(2, 4);
    const TentacleParams& p2 = params2();
    CauchyRow row = cauchy_difference(s2, p2, 1, 1.0, 48, 64);
    CHECK(std::isfinite(row.value));
    CHECK(row.value > 0);
    CHECK(row.walked == 4);
    CHECK(row.rel_err < 0.2);
    CHECK(row.support >= row.support_lo * 0.98);
    CHECK(row.support <= row.support_hi * 1.02);
    double direct = direct_difference(s2, p2, 1, 1.0, 64, 48, 1e300);
    CHECK(direct <= row.value * 1.03);
    CHECK(row.value <= 15 * direct);

    // truncated to a band that doubles resolve in space, exponent two
    Sequences s3(3, 4);
    const TentacleParams& p3 = params3();
    CauchyRow rt = cauchy_difference(s3, p3, 1, 2.0, 40, 64, 18.0);
    CHECK(rt.value > 0);
    double direct3 = direct_difference(s3, p3, 1, 2.0, 32, 24, 18.0);
    CHECK(direct3 <= rt.value * 1.05);
    CHECK(rt.value <= 60 * direct3);
}

TEST_CASE("difference integral survives invisible widths") {
    Sequences s3(3, 4);
    const TentacleParams& p3 = params3();
    // the second-generation width is below double range, yet the critical
    // shear moment keeps the value visible
    CHECK(p3.dd(2) == 0.0);
    CauchyRow r2 = cauchy_difference(s3, p3, 2, 2.0, 32, 48);
    CHECK(std::isfinite(r2.value));
    CHECK(r2.value > 0);
    CHECK(r2.support == 0.0);
    CHECK(r2.support_hi == 0.0);
    CHECK(r2.branches == 64);
    CHECK(r2.walked == 32);

    CauchyRow r3 = cauchy_difference(s3, p3, 3, 2.0, 24, 16);
    CHECK(std::isfinite(r3.value));
    CHECK(r3.value > 0);
}

TEST_CASE("difference integral refuses bad exponents and stages") {
    Sequences s2(2, 4);
    Sequences s3(3, 4);
    CHECK_THROWS_AS(cauchy_difference(s2, params2(), 1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(cauchy_difference(s2, params2(), 0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(cauchy_difference(s2, params2(), 1, 1.5), std::domain_error);
    CHECK_THROWS_AS(cauchy_difference(s3, params3(), 1, 2.5), std::domain_error);
}

TEST_CASE("tube accounting is exact per part") {
    Sequences s2(2, 4);
    Sequences s3(3, 4);
    const TentacleParams& p2 = params2();
    const TentacleParams& p3 = params3();

    std::vector<TubeSet> t2, t3;
    for (int k = 0; k <= 4; ++k) {
        t2.push_back(tube_set(s2, p2, k));
        t3.push_back(tube_set(s3, p3, k));
        CHECK(t2.back().within_bound());
        CHECK(t3.back().within_bound());
    }
    for (int k = 0; k < 4; ++k) {
        CHECK(t2[(size_t)k].halves(t2[(size_t)k + 1]));
        CHECK(t3[(size_t)k].halves(t3[(size_t)k + 1]));
    }

    // stage zero: the heads are the whole cube, nothing else
    CHECK(t2[0].heads.to_double() == 4.0);
    CHECK(t2[0].body.is_zero());
    CHECK(t2[0].pullback_heads.to_double() == 4.0);
    CHECK(t3[0].heads.to_double() == 8.0);

    // head volumes shrink by exactly 2^{-n beta} per generation
    for (int k = 0; k < 4; ++k) {
        CHECK(t2[(size_t)k + 1].heads.mul_pow2(8).cmp(t2[(size_t)k].heads) == 0);
        CHECK(t3[(size_t)k + 1].heads.mul_pow2(12).cmp(t3[(size_t)k].heads) == 0);
    }

    CHECK(t3[2].bound() <= 1.6e-2);
}

TEST_CASE("grid image counts certify the kept volume") {
    Sequences s2(2, 4);
    const TentacleParams& p2 = params2();
    LusinReport rep = lusin_report(s2, p2, 4, 1 << 17);
    REQUIRE(!rep.refused);
    REQUIRE(rep.rows.size() == 5);
    CHECK(rep.rows[0].ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.rows[0].image_grid == doctest::Approx(4.0));
    for (size_t k = 1; k < rep.rows.size(); ++k) {
        const LusinRow& r = rep.rows[k];
        const LusinRow& prev = rep.rows[k - 1];
        CHECK(r.tube_tower <= 0.5000001 * prev.tube_tower);
        CHECK(r.image_grid <= r.image_exact + 1e-9);
        CHECK(r.image_grid >= r.image_exact - 0.02);
        CHECK(r.image_exact >= 1.0);
        CHECK(r.ratio > 1.5 * prev.ratio);
        CHECK(r.grid_cells > 0);
    }

    LusinReport coarse = lusin_report(s2, p2, 4, 4);
    CHECK(coarse.refused);
    CHECK(coarse.required_grid > 4);
    CHECK(coarse.rows.empty());
    LusinReport ok = lusin_report(s2, p2, 4, coarse.required_grid);
    CHECK(!ok.refused);

    Sequences s3(3, 4);
    LusinReport r3 = lusin_report(s3, params3(), 3, 1 << 12);
    REQUIRE(!r3.refused);
    REQUIRE(r3.rows.size() == 4);
    for (size_t k = 1; k < r3.rows.size(); ++k) {
        CHECK(r3.rows[k].tube_tower <= 0.5000001 * r3.rows[k - 1].tube_tower);
        CHECK(r3.rows[k].ratio > 1.5 * r3.rows[k - 1].ratio);
        CHECK(r3.rows[k].image_grid >= r3.rows[k].image_exact - 0.05);
    }

    CHECK_THROWS_AS(lusin_report(s2, p2, 4, 48), std::invalid_argument);
    CHECK_THROWS_AS(lusin_report(s2, p2, 9, 1 << 10), std::invalid_argument);
}

TEST_CASE("jacobian mass stays at the cube volume") {
    Sequences s2(2, 4);
    const TentacleParams& p2 = params2();
    MassReport m0 = jacobian_mass(s2, p2, 0);
    CHECK(m0.mass == 4.0);

    MassReport m1 = jacobian_mass(s2, p2, 1, 40, 64);
    double band1 = 4.0 - m1.off_volume;
    CHECK(band1 > 0);
    CHECK(std::abs(m1.mass - 4.0) <= 0.08 * band1 + 4.0 * m1.rel_err + 1e-12);

    MassReport m2 = jacobian_mass(s2, p2, 2, 40, 64);
    double band2 = 4.0 - m2.off_volume;
    CHECK(band2 > band1 * 0.999);
    CHECK(std::abs(m2.mass - 4.0) <= 0.08 * band2 + 4.0 * m2.rel_err + 1e-12);

    Sequences s3(3, 4);
    const TentacleParams& p3 = params3();
    MassReport n1 = jacobian_mass(s3, p3, 1, 32, 64);
    double band3 = 8.0 - n1.off_volume;
    CHECK(band3 > 0);
    CHECK(std::abs(n1.mass - 8.0) <= 0.08 * band3 + 8.0 * n1.rel_err + 1e-12);

    // deeper stages only add slabs whose volume is below double range
    MassReport n3 = jacobian_mass(s3, p3, 3, 32, 64);
    CHECK(std::isfinite(n3.mass));
    CHECK(std::abs(n3.mass - 8.0) <= 0.08 * (8.0 - n3.off_volume) + 8.0 * n3.rel_err + 1e-12);
}
