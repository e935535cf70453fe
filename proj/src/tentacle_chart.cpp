#include "cantorlab/tentacle.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cantorlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

int pat_num(int slot, int n) { return 2 * slot - 1 - (1 << n); }  // pat = pat_num / 2^n
int pat_rank(int slot, int n) { return (std::abs(pat_num(slot, n)) + 1) / 2; }

double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (int i = 0; i < a.n; ++i) s += a.c[(size_t)i] * b.c[(size_t)i];
    return s;
}

Vec unit(int n, int idx, double sgn) {
    Vec v = Vec::zeros(n);
    v.c[(size_t)idx] = sgn;
    return v;
}

Vec vsub(const Vec& a, const Vec& b) {
    Vec r = a;
    for (int i = 0; i < a.n; ++i) r.c[(size_t)i] -= b.c[(size_t)i];
    return r;
}

// strict tube membership; a width that underflowed to 0.0 admits only the
// exact centerline (the real width is positive but below double range)
bool inb(double v, double w) { return w > 0 ? std::abs(v) < w : v == 0.0; }

}  // namespace

double l_face_d(const Sequences& s, const TentacleParams& p, int k, int slot) {
    if (k == 1) return p.Cd(1);
    int n = s.n;
    double rhp = p.rhd(k - 1), rh = p.rhd(k);
    double apat = std::abs((double)pat_num(slot, n)) * std::ldexp(1.0, -n);
    return (rhp - rh) + apat * (rhp - p.bd(k - 1)) + (2.0 * kPi - 8.0) * p.dd(k);
}

LocalRoute build_route(const Sequences& s, const TentacleParams& p, int k, int slot) {
    int n = s.n;
    LocalRoute r;
    r.k = k;
    r.slot = slot;
    if (k == 1) {
        double pat = (double)pat_num(slot, n) * std::ldexp(1.0, -n);
        ChartPiece st;
        st.l0 = 0;
        st.l1 = p.Cd(1);
        st.base = unit(n, 0, 1.0).scaled(p.rhd(1));
        st.base.c[(size_t)n - 1] = pat;
        st.axis = unit(n, 0, 1.0);
        st.turndir = unit(n, n - 1, 1.0);
        r.pieces.push_back(st);
        r.l_face = st.l1;
        r.sigma = 0;
        return r;
    }
    double rhp = p.rhd(k - 1), rh = p.rhd(k);
    double pat = (double)pat_num(slot, n) * std::ldexp(1.0, -n);
    double h = pat * rhp;
    double sig = pat * p.bd(k - 1);
    double d = p.dd(k), R = 2.0 * d;
    double X = rhp * (0.5 + (double)pat_rank(slot, n) * std::ldexp(1.0, -n - 2));
    bool down = pat > 0;  // jog toward the corridor height sigma
    double P1 = X - 2.0 * d - rh;
    double P2 = P1 + kPi * d;
    double P3 = P2 + std::abs(h - sig) - 4.0 * d;
    double P4 = P3 + kPi * d;
    r.sigma = sig;

    ChartPiece stub;
    stub.l0 = 0;
    stub.l1 = P1;
    stub.base = unit(n, 0, 1.0).scaled(rh);
    stub.base.c[(size_t)n - 1] = h;
    stub.axis = unit(n, 0, 1.0);
    stub.turndir = unit(n, n - 1, 1.0);
    r.pieces.push_back(stub);

    ChartPiece e1;
    e1.elbow = true;
    e1.l0 = P1;
    e1.l1 = P2;
    e1.R = R;
    e1.pivot = Vec::zeros(n);
    e1.pivot.c[0] = X - 2.0 * d;
    e1.pivot.c[(size_t)n - 1] = down ? h - 2.0 * d : h + 2.0 * d;
    e1.u0 = unit(n, n - 1, down ? 1.0 : -1.0);
    e1.u1 = unit(n, 0, 1.0);
    e1.sr = down ? 1 : -1;
    r.pieces.push_back(e1);

    ChartPiece vert;
    vert.l0 = P2;
    vert.l1 = P3;
    vert.base = Vec::zeros(n);
    vert.base.c[0] = X;
    vert.base.c[(size_t)n - 1] = down ? h - 2.0 * d : h + 2.0 * d;
    vert.axis = unit(n, n - 1, down ? -1.0 : 1.0);
    vert.turndir = unit(n, 0, down ? 1.0 : -1.0);
    r.pieces.push_back(vert);

    ChartPiece e2;
    e2.elbow = true;
    e2.l0 = P3;
    e2.l1 = P4;
    e2.R = R;
    e2.pivot = Vec::zeros(n);
    e2.pivot.c[0] = X + 2.0 * d;
    e2.pivot.c[(size_t)n - 1] = down ? sig + 2.0 * d : sig - 2.0 * d;
    e2.u0 = unit(n, 0, -1.0);
    e2.u1 = unit(n, n - 1, down ? -1.0 : 1.0);
    e2.sr = down ? -1 : 1;
    r.pieces.push_back(e2);

    ChartPiece cor;
    cor.l0 = P4;
    cor.l1 = P4 + (rhp - X - 2.0 * d);
    cor.base = Vec::zeros(n);
    cor.base.c[0] = X + 2.0 * d;
    cor.base.c[(size_t)n - 1] = sig;
    cor.axis = unit(n, 0, 1.0);
    cor.turndir = unit(n, n - 1, 1.0);
    r.pieces.push_back(cor);

    r.l_face = cor.l1;
    return r;
}

TentacleChart TentacleChart::build(const Sequences& s, const TentacleParams& p,
                                   const std::vector<int>& slots) {
    if (slots.empty()) throw std::invalid_argument("TentacleChart: empty branch");
    TentacleChart ch;
    ch.seq = s;
    ch.par = &p;
    ch.slots = slots;
    int n = s.n;
    ch.zh.push_back(Vec::zeros(n));
    for (size_t j = 0; j < slots.size(); ++j) {
        Vec z = ch.zh.back();
        double step = (j == 0) ? 1.0 : p.rhd((int)j);
        z.c[(size_t)n - 1] += (double)pat_num(slots[j], n) * std::ldexp(1.0, -n) * step;
        ch.zh.push_back(z);
        ch.hops.push_back(build_route(s, p, (int)j + 1, slots[j]));
    }
    ch.l_total = p.Cd((int)slots.size());
    return ch;
}

namespace {

// evaluate one hop's piece chain at local (l, t); t[n-2] is the turn coordinate
Vec eval_hop(const LocalRoute& r, int n, double l, const Vec& t) {
    const ChartPiece* pc = &r.pieces.back();
    for (const ChartPiece& q : r.pieces)
        if (l < q.l1) {
            pc = &q;
            break;
        }
    Vec pos;
    double tt = t.c[(size_t)n - 2];
    if (!pc->elbow) {
        pos = pc->base;
        for (int i = 0; i < n; ++i)
            pos.c[(size_t)i] += (l - pc->l0) * pc->axis.c[(size_t)i] + tt * pc->turndir.c[(size_t)i];
    } else {
        double th = (l - pc->l0) / pc->R;
        double rho = pc->R + pc->sr * tt;
        pos = pc->pivot;
        double c = std::cos(th), s = std::sin(th);
        for (int i = 0; i < n; ++i)
            pos.c[(size_t)i] += rho * (c * pc->u0.c[(size_t)i] + s * pc->u1.c[(size_t)i]);
    }
    for (int i = 0; i + 2 < n; ++i) pos.c[(size_t)i + 1] += t.c[(size_t)i];
    return pos;
}

}  // namespace

Vec TentacleChart::eval(double l, const Vec& t) const {
    int n = seq.n;
    int j = gen();
    Vec tc = t;
    while (j >= 2 && l >= hops[(size_t)j - 1].l_face) {
        l -= hops[(size_t)j - 1].l_face;
        tc.c[(size_t)n - 2] += hops[(size_t)j - 1].sigma;
        --j;
    }
    Vec local = eval_hop(hops[(size_t)j - 1], n, l, tc);
    Vec pos = zh[(size_t)j - 1];
    for (int i = 0; i < n; ++i) pos.c[(size_t)i] += local.c[(size_t)i];
    return pos;
}

Mat TentacleChart::frame(double l, const Vec& t, double* speed) const {
    int n = seq.n;
    int j = gen();
    Vec tc = t;
    while (j >= 2 && l >= hops[(size_t)j - 1].l_face) {
        l -= hops[(size_t)j - 1].l_face;
        tc.c[(size_t)n - 2] += hops[(size_t)j - 1].sigma;
        --j;
    }
    const LocalRoute& r = hops[(size_t)j - 1];
    const ChartPiece* pc = &r.pieces.back();
    for (const ChartPiece& q : r.pieces)
        if (l < q.l1) {
            pc = &q;
            break;
        }
    Mat Q = Mat::identity(n);
    double sp = 1.0;
    Vec tan = pc->axis, turn = pc->turndir;
    if (pc->elbow) {
        double th = (l - pc->l0) / pc->R;
        double c = std::cos(th), s = std::sin(th);
        tan = Vec::zeros(n);
        turn = Vec::zeros(n);
        for (int i = 0; i < n; ++i) {
            tan.c[(size_t)i] = -s * pc->u0.c[(size_t)i] + c * pc->u1.c[(size_t)i];
            turn.c[(size_t)i] = pc->sr * (c * pc->u0.c[(size_t)i] + s * pc->u1.c[(size_t)i]);
        }
        sp = (pc->R + pc->sr * tc.c[(size_t)n - 2]) / pc->R;
    }
    for (int i = 0; i < n; ++i) {
        Q.at(i, 0) = tan.c[(size_t)i];
        Q.at(i, n - 1) = turn.c[(size_t)i];
    }
    if (speed) *speed = sp;
    return Q;
}

std::optional<std::pair<double, Vec>> TentacleChart::locate(const Vec& x, double w) const {
    int n = seq.n;
    int K = gen();
    for (int j = K; j >= 1; --j) {
        Vec local = vsub(x, zh[(size_t)j - 1]);
        // loose band: sub-tube centerlines sit within b_j of this hop's
        double slack = (j < K) ? par->bd(j) : 0.0;
        double wav = w + slack;
        for (const ChartPiece& pc : hops[(size_t)j - 1].pieces) {
            double lc, tt;
            bool hit = false;
            if (!pc.elbow) {
                Vec rel = vsub(local, pc.base);
                double sax = dot(rel, pc.axis);
                lc = pc.l0 + sax;
                if (lc >= pc.l0 && lc < pc.l1) {
                    tt = dot(rel, pc.turndir);
                    hit = std::abs(tt) <= wav;
                }
            } else {
                Vec rel = vsub(local, pc.pivot);
                double a0 = dot(rel, pc.u0), a1 = dot(rel, pc.u1);
                double th = std::atan2(a1, a0);
                if (th >= 0 && th < kPi / 2.0) {
                    lc = pc.l0 + th * pc.R;
                    if (lc < pc.l1) {
                        tt = pc.sr * (std::hypot(a0, a1) - pc.R);
                        hit = std::abs(tt) <= wav;
                    }
                }
            }
            if (!hit) continue;
            // perpendicular coordinates never rotate
            Vec t = Vec::zeros(n - 1);
            bool ok = true;
            for (int i = 0; i + 2 < n; ++i) {
                t.c[(size_t)i] = local.c[(size_t)i + 1];
                if (!inb(t.c[(size_t)i], w)) ok = false;
            }
            double l = lc;
            for (int m = j + 1; m <= K; ++m) {
                l += hops[(size_t)m - 1].l_face;
                tt -= hops[(size_t)m - 1].sigma;
            }
            t.c[(size_t)n - 2] = tt;
            if (!ok || !inb(tt, w)) continue;
            if (l <= 0 || l >= l_total) continue;
            return std::make_pair(l, t);
        }
    }
    return std::nullopt;
}

std::optional<TubeHit> locate_tube(const Sequences& s, const TentacleParams& p, int k,
                                   const Vec& x) {
    if (k < 1) return std::nullopt;
    int n = s.n;
    double w = p.dd(k);
    // walk the tower cubes to find the head this tentacle grows from
    std::vector<int> head;
    Vec z = Vec::zeros(n);
    bool walked = true;
    for (int j = 1; j < k; ++j) {
        double step = (j == 1) ? 1.0 : p.rhd(j - 1);
        double scaled = (x.c[(size_t)n - 1] - z.c[(size_t)n - 1]) / step;
        int slot = (int)std::lround((scaled + 1.0) * std::ldexp(1.0, n - 1) + 0.5);
        if (slot < 1) slot = 1;
        if (slot > (1 << n)) slot = 1 << n;
        Vec zc = z;
        zc.c[(size_t)n - 1] += (double)pat_num(slot, n) * std::ldexp(1.0, -n) * step;
        double rad = p.rhd(j);
        bool inside = true;
        for (int i = 0; i < n; ++i)
            if (std::abs(x.c[(size_t)i] - zc.c[(size_t)i]) >= rad) inside = false;
        if (!inside) {
            walked = false;
            break;
        }
        head.push_back(slot);
        z = zc;
    }
    if (walked) {
        for (int sk = 1; sk <= (1 << n); ++sk) {
            std::vector<int> branch = head;
            branch.push_back(sk);
            TentacleChart ch = TentacleChart::build(s, p, branch);
            // own-route part only: l below the hop's face length
            auto hit = ch.locate(x, w);
            if (hit) return TubeHit{branch, hit->first, hit->second};
        }
    }
    if (k == 1) return std::nullopt;
    // ride part: x lies inside the parent tube with a sigma offset
    auto up = locate_tube(s, p, k - 1, x);
    if (!up) return std::nullopt;
    for (int sk = 1; sk <= (1 << n); ++sk) {
        double sig = (double)pat_num(sk, n) * std::ldexp(1.0, -n) * p.bd(k - 1);
        double tt = up->t.c[(size_t)n - 2] - sig;
        bool ok = inb(tt, w);
        for (int i = 0; i + 2 < n; ++i)
            if (!inb(up->t.c[(size_t)i], w)) ok = false;
        if (!ok) continue;
        double lf = l_face_d(s, p, k, sk);
        double l = up->l + lf;
        if (l <= 0 || l >= p.Cd(k)) continue;
        TubeHit hit;
        hit.slots = up->slots;
        hit.slots.push_back(sk);
        hit.l = l;
        hit.t = up->t;
        hit.t.c[(size_t)n - 2] = tt;
        return hit;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// regions and nesting
// ---------------------------------------------------------------------------

bool DyBox::contains(const DyBox& inner) const {
    for (size_t i = 0; i < lo.size(); ++i)
        if (inner.lo[i].cmp(lo[i]) < 0 || inner.hi[i].cmp(hi[i]) > 0) return false;
    return true;
}

bool DyBox::disjoint_interiors(const DyBox& other) const {
    for (size_t i = 0; i < lo.size(); ++i)
        if (hi[i].cmp(other.lo[i]) <= 0 || other.hi[i].cmp(lo[i]) <= 0) return true;
    return false;
}

namespace {

Dyadic pat_dyadic_times(const Dyadic& v, int slot, int n) {
    return v.mul_int(pat_num(slot, n)).mul_pow2(-n);
}

DyBox make_box(int n, const std::vector<Dyadic>& lo, const std::vector<Dyadic>& hi) {
    DyBox b;
    b.lo = lo;
    b.hi = hi;
    (void)n;
    return b;
}

// own-route cover boxes in parent-local coordinates; requires the width to be
// close enough to the head scale for exact sums
std::vector<DyBox> route_boxes(const Sequences& s, const TentacleParams& p, int k, int slot,
                               const Dyadic& w) {
    int n = s.n;
    std::vector<DyBox> out;
    auto box = [&](const Dyadic& x0, const Dyadic& x1, const Dyadic& zn0, const Dyadic& zn1) {
        std::vector<Dyadic> lo((size_t)n), hi((size_t)n);
        lo[0] = x0;
        hi[0] = x1;
        for (int i = 1; i + 1 < n; ++i) {
            lo[(size_t)i] = w.neg();
            hi[(size_t)i] = w;
        }
        lo[(size_t)n - 1] = zn0;
        hi[(size_t)n - 1] = zn1;
        out.push_back(make_box(n, lo, hi));
    };
    if (k == 1) {
        Dyadic pat = pat_dyadic_times(Dyadic::from_int(1), slot, n);
        Dyadic len = p.axis(1).C;
        box(s.rh(1), s.rh(1).add(len), pat.sub(w), pat.add(w));
        return out;
    }
    Dyadic rhp = s.rh(k - 1), rh = s.rh(k);
    Dyadic d = p.widths(k).d;
    Dyadic h = pat_dyadic_times(rhp, slot, n);
    Dyadic sig = pat_dyadic_times(p.widths(k - 1).b, slot, n);
    int rank = pat_rank(slot, n);
    Dyadic X = rhp.mul_int((1 << (n + 1)) + 2 * rank).mul_pow2(-n - 2);
    Dyadic d2 = d.mul_pow2(1);
    bool down = pat_num(slot, n) > 0;
    // stub
    box(rh, X.sub(d2), h.sub(w), h.add(w));
    if (down) {
        box(X.sub(d2), X.add(d), h.sub(d2), h.add(d));                    // elbow 1 hull
        box(X.sub(d), X.add(d), sig.add(d2), h.sub(d2));                  // descent
        box(X.sub(d), X.add(d2), sig.sub(d), sig.add(d2));                // elbow 2 hull
    } else {
        box(X.sub(d2), X.add(d), h.sub(d), h.add(d2));
        box(X.sub(d), X.add(d), h.add(d2), sig.sub(d2));
        box(X.sub(d), X.add(d2), sig.sub(d2), sig.add(d));
    }
    box(X.add(d2), rhp, sig.sub(d), sig.add(d));                          // corridor
    return out;
}

bool boxes_feasible(const Sequences& s, const TentacleParams& p, int k) {
    // exact sums need the width exponent within the alignment guard of the
    // head scale
    i128 gap = s.rh(k == 1 ? 1 : k - 1).log2_trailing() - p.widths(k).b.log2_trailing();
    return gap < (i128)1 << 20;
}

}  // namespace

TentacleRegion tentacle_region(const Sequences& s, const TentacleParams& p,
                               const std::vector<int>& slots, bool squeezed, bool primed) {
    int k = (int)slots.size();
    int n = s.n;
    TentacleRegion reg;
    reg.k = k;
    reg.slots = slots;
    reg.squeezed = squeezed;
    reg.primed = primed;

    DPoint zc = DPoint::zeros(n);
    for (int j = 1; j <= k; ++j) {
        Dyadic step = (j == 1) ? Dyadic::from_int(1) : s.rh(j - 1);
        zc.x[(size_t)n - 1] = zc.x[(size_t)n - 1].add(pat_dyadic_times(step, slots[(size_t)j - 1], n));
    }
    reg.head = Cube{zc, s.rh(k)};

    Dyadic w = primed ? p.widths(k).d : p.widths(k).b;
    Dyadic cross = Dyadic::from_int(1);
    for (int i = 0; i < n - 1; ++i) cross = cross.mul(w.mul_pow2(1));
    Dyadic len;
    if (!squeezed) {
        len = primed ? p.axis(k).C : p.axis(k).A;
    } else if (!primed) {
        len = s.rh(k);  // the core lands on the stub
    } else {
        len = p.axis(k).ctil;  // extent bound; the image rides only the parent stub
    }
    reg.body_volume = len.mul(cross);

    // axis extent: forward reach measured from the head center
    double rhk = p.rhd(k);
    if (!squeezed) {
        // winds through every ancestor; the deepest reach along e1 is the
        // generation-1 chart position of the far end
        double l = (primed ? p.Cd(k) : p.Ad(k));
        for (int j = k; j >= 2; --j) l -= l_face_d(s, p, j, slots[(size_t)j - 1]);
        reg.axis_extent = p.rhd(1) + l;  // absolute x1 of the tip
        if (k == 1) reg.axis_extent = rhk + l;
        reg.ball_radius = reg.axis_extent + 1.0;  // coarse: spans the tower column too
    } else if (!primed) {
        reg.axis_extent = 2.0 * rhk;
        reg.ball_radius = std::sqrt((double)n) * 2.0 * rhk;
    } else {
        double rhp = (k >= 2) ? p.rhd(k - 1) : 1.0;
        if (k == 1) {
            reg.axis_extent = p.rhd(1) + p.Cd(1);
        } else {
            // own route to the parent face, then the image of the ride is
            // pinned inside the parent stub
            double lp = p.Cd(k) - l_face_d(s, p, k, slots[(size_t)k - 1]);
            SqueezeProfile prof = SqueezeProfile::make(p, k - 1);
            reg.axis_extent = rhp + prof.S(lp);
        }
        // own route stays within sup-distance 2 r-hat_{k-1} of the head
        // center (the parent face is at x1 = r-hat_{k-1} because tower
        // offsets have no x1 part) and the ride image is pinned inside the
        // parent stub, so the whole image fits that sup cube
        reg.ball_radius = std::sqrt((double)n) * 2.0 * rhp;
    }

    reg.boxes_exact = boxes_feasible(s, p, k);
    if (reg.boxes_exact) reg.boxes = route_boxes(s, p, k, slots.empty() ? 1 : slots.back(), w);
    return reg;
}

namespace {

void add_violation(NestReport& rep, int k, const char* what) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "k=%d: %s", k, what);
    rep.violations.push_back(buf);
}

}  // namespace

NestReport verify_nesting(const Sequences& s, const TentacleParams& p, int K) {
    NestReport rep;
    rep.K = K;
    int n = s.n;

    // width gate runs before any geometry is touched
    for (int k = 1; k <= K; ++k) {
        for (const std::string& v : check_width_constraints(s, p, k))
            add_violation(rep, k, ("width cap " + v).c_str());
    }
    if (!rep.violations.empty()) {
        rep.pass = false;
        return rep;
    }

    for (int k = 2; k <= K; ++k) {
        const Dyadic& d = p.widths(k).d;
        const Dyadic& bprev = p.widths(k - 1).b;
        const Dyadic& rhp = s.rh(k - 1);
        auto check = [&](bool ok, const char* what) {
            ++rep.ineq_checks;
            if (!ok) add_violation(rep, k, what);
        };
        // corridor rides strictly inside the parent core: |sigma| + d < b_{k-1}
        for (int slot = 1; slot <= (1 << n); ++slot) {
            Dyadic reach = bprev.mul_int(std::abs(pat_num(slot, n))).mul_pow2(-n).add(d);
            check(reach.cmp(bprev) < 0, "corridor outside the parent core");
        }
        // elbow columns clear the head wall: |h| + 2d < rh_{k-1}
        check(d.cmp(rhp.mul_pow2(-n - 1)) < 0, "jog touches the head wall");
        // stub has positive length: X - 2d > rh_k  (X >= rh(1/2 + 2^{-n-2}))
        {
            long long numer = (1LL << (s.beta + n + 1)) + (1LL << s.beta) - (1LL << (n + 1));
            Dyadic lhs = rhp.mul_int(numer).mul_pow2(-(s.beta + n + 2));
            check(d.mul_pow2(1).cmp(lhs) < 0, "stub has no room before the first elbow");
        }
        // vertical run is positive: |pat|(rh - b) > 4d, with b <= rh/2
        check(bprev.cmp(rhp.mul_pow2(-1)) < 0, "collar width reaches the head scale");
        check(d.cmp(rhp.mul_pow2(-n - 4)) < 0, "elbows overlap on the vertical run");
        // corridor is positive: rh - X - 2d > 0 with the largest station
        {
            long long numer = (1LL << (n + 2)) - (1LL << (n + 1)) - 2 * (1LL << (n - 1));
            Dyadic lhs = rhp.mul_int(numer).mul_pow2(-n - 2);
            check(d.mul_pow2(1).cmp(lhs) < 0, "corridor vanishes at the widest station");
        }
        // the ride never reaches the parent's tail: |pat|(rh - b) > (8 - 2pi) d
        {
            Dyadic margin = d.mul_int(55).mul_pow2(-5);  // (8 - 2pi) < 55/32
            check(margin.cmp(rhp.mul_pow2(-n - 1)) < 0, "ride reaches the parent tail");
        }
        // sibling separations
        check(d.cmp(bprev.mul_pow2(-n)) < 0, "corridor bands collide");
        check(d.mul_int(3).cmp(rhp.mul_pow2(-n + 1)) < 0, "stub bands collide");
        check(d.cmp(bprev.mul_pow2(-n)) < 0, "mirror elbows collide at the corridor");
    }

    // exact box containment and pairwise disjointness where the scales allow
    for (int k = 1; k <= std::min(K, 2); ++k) {
        if (!boxes_feasible(s, p, k)) continue;
        Dyadic w = p.widths(k).d;
        Dyadic rhp = (k == 1) ? Dyadic::from_int(1) : s.rh(k - 1);
        std::vector<std::vector<DyBox>> all;
        for (int slot = 1; slot <= (1 << n); ++slot)
            all.push_back(route_boxes(s, p, k, slot, w));
        DyBox headbox;
        for (int i = 0; i < n; ++i) {
            headbox.lo.push_back(rhp.neg());
            headbox.hi.push_back(rhp);
        }
        for (size_t a = 0; a < all.size(); ++a) {
            for (const DyBox& bx : all[a]) {
                ++rep.box_checks;
                if (!headbox.contains(bx)) add_violation(rep, k, "route leaves the head cube");
            }
            for (size_t b2 = a + 1; b2 < all.size(); ++b2) {
                ++rep.disjoint_pairs;
                for (const DyBox& ba : all[a])
                    for (const DyBox& bb : all[b2]) {
                        ++rep.box_checks;
                        if (!ba.disjoint_interiors(bb))
                            add_violation(rep, k, "sibling routes overlap");
                    }
            }
        }
    }

    rep.pass = rep.violations.empty();
    return rep;
}

}  // namespace cantorlab
