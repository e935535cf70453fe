#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cantorlab/homeo.hpp"

namespace cantorlab {

double PwAffine::eval(double x) const {
    if (x <= xs.front()) return ys.front() + (x - xs.front());
    if (x >= xs.back()) return ys.back() + (x - xs.back());
    size_t i = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin() - 1;
    double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + t * (ys[i + 1] - ys[i]);
}

double PwAffine::inv(double y) const {
    if (y <= ys.front()) return xs.front() + (y - ys.front());
    if (y >= ys.back()) return xs.back() + (y - ys.back());
    size_t i = std::upper_bound(ys.begin(), ys.end(), y) - ys.begin() - 1;
    double t = (y - ys[i]) / (ys[i + 1] - ys[i]);
    return xs[i] + t * (xs[i + 1] - xs[i]);
}

double PwAffine::slope_at(double x) const {
    if (x < xs.front() || x >= xs.back()) return 1.0;
    size_t i = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
    if (i == 0) i = 1;
    return (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
}

double PwAffine::max_slope() const {
    double s = 0;
    for (size_t i = 1; i < xs.size(); ++i)
        s = std::max(s, (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]));
    return s;
}

double PwAffine::min_slope() const {
    double s = HUGE_VAL;
    for (size_t i = 1; i < xs.size(); ++i)
        s = std::min(s, (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]));
    return s;
}

double FiberStage::lambda(const Vec& x) const {
    double worst = 0.0;
    for (const auto& mc : mods) {
        double t = (std::fabs(x[mc.m] - mc.c) - mc.inner) / (mc.outer - mc.inner);
        worst = std::max(worst, std::clamp(t, 0.0, 1.0));
    }
    return 1.0 - worst;
}

void FiberStage::lambda_grad(const Vec& x, double* lam, Vec* grad) const {
    *grad = Vec::zeros(x.n);
    double worst = 0.0;
    int att = -1;
    double att_sign = 0, att_width = 1;
    for (const auto& mc : mods) {
        double d = x[mc.m] - mc.c;
        double t = (std::fabs(d) - mc.inner) / (mc.outer - mc.inner);
        double tc = std::clamp(t, 0.0, 1.0);
        if (tc > worst) {
            worst = tc;
            if (t > 0.0 && t < 1.0) {
                att = mc.m;
                att_sign = d >= 0 ? 1.0 : -1.0;
                att_width = mc.outer - mc.inner;
            } else {
                att = -1;  // clipped flat: zero gradient a.e.
            }
        }
    }
    *lam = 1.0 - worst;
    if (att >= 0) (*grad)[att] = -att_sign / att_width;
}

Vec FiberStage::apply(const Vec& x) const {
    double lam = lambda(x);
    if (lam == 0.0) return x;
    Vec y = x;
    y[q] = x[q] + lam * (f.eval(x[q]) - x[q]);
    return y;
}

Vec FiberStage::invert(const Vec& y) const {
    double lam = lambda(y);  // modulation coords are untouched by this stage
    if (lam == 0.0) return y;
    // blended map g(t) = (1-lam) t + lam f(t): piecewise affine on f's knots
    PwAffine g;
    g.xs = f.xs;
    g.ys.resize(f.xs.size());
    for (size_t i = 0; i < f.xs.size(); ++i)
        g.ys[i] = (1.0 - lam) * f.xs[i] + lam * f.ys[i];
    Vec x = y;
    x[q] = g.inv(y[q]);
    return x;
}

Mat FiberStage::jet_at(const Vec& x) const {
    double lam;
    Vec grad;
    lambda_grad(x, &lam, &grad);
    Mat D = Mat::identity(x.n);
    D.at(q, q) = (1.0 - lam) + lam * f.slope_at(x[q]);
    if (lam > 0.0) {
        double disp = f.eval(x[q]) - x[q];
        for (int m = 0; m < x.n; ++m)
            if (m != q && grad[m] != 0.0) D.at(q, m) = grad[m] * disp;
    }
    return D;
}

// piecewise affine fiber map pinning -1 and 1, translating [a-rho, a+rho]
// onto [t-rho, t+rho], keeping [o-rho, o+rho] pointwise fixed
static PwAffine make_piston(double a, double t, double o, double rho) {
    std::vector<std::pair<double, double>> knots = {
        {-1.0, -1.0}, {a - rho, t - rho}, {a + rho, t + rho},
        {o - rho, o - rho}, {o + rho, o + rho}, {1.0, 1.0}};
    std::sort(knots.begin(), knots.end());
    PwAffine f;
    for (auto& kv : knots) {
        f.xs.push_back(kv.first);
        f.ys.push_back(kv.second);
    }
    for (size_t i = 1; i < f.xs.size(); ++i) {
        if (!(f.xs[i] > f.xs[i - 1]) || !(f.ys[i] > f.ys[i - 1]))
            throw std::logic_error("piston windows out of order");
    }
    return f;
}

// fiber map translating [c-rho, c+rho] onto [-rho, rho], pinning -1 and 1
static PwAffine make_slide(double c, double rho) {
    std::vector<std::pair<double, double>> knots = {
        {-1.0, -1.0}, {c - rho, -rho}, {c + rho, rho}, {1.0, 1.0}};
    std::sort(knots.begin(), knots.end());
    PwAffine f;
    for (auto& kv : knots) {
        f.xs.push_back(kv.first);
        f.ys.push_back(kv.second);
    }
    for (size_t i = 1; i < f.xs.size(); ++i) {
        if (!(f.xs[i] > f.xs[i - 1]) || !(f.ys[i] > f.ys[i - 1]))
            throw std::logic_error("slide windows out of order");
    }
    return f;
}

TowerTemplate TowerTemplate::build(int n, int beta) {
    if (beta < n + 1) throw std::logic_error("template needs beta >= n+1");
    TowerTemplate T;
    T.n = n;
    T.beta = beta;
    double rho = std::ldexp(1.0, -(beta + 1));
    int fiber = n - 1;

    // vertical pistons, one tube per (n-1)-dimensional sign pattern
    for (int tube = 0; tube < (1 << (n - 1)); ++tube) {
        Vertex up{}, lo{};
        for (int m = 0; m < n - 1; ++m) {
            int sgn = (tube >> (n - 2 - m)) & 1 ? 1 : -1;
            up[m] = lo[m] = sgn;
        }
        up[fiber] = 1;
        lo[fiber] = -1;
        double s_up = slot_pattern(slot_of_vertex(up, n), n);
        double s_lo = slot_pattern(slot_of_vertex(lo, n), n);
        // consecutive slots: the upper child always lands above the lower one
        if (!(s_up > s_lo)) throw std::logic_error("slot order broken");

        std::vector<FiberStage::ModCoord> mods;
        for (int m = 0; m < n - 1; ++m)
            mods.push_back({m, 0.5 * up[m], rho, 0.25});

        // if both targets lie below the lower start, the lower cube must
        // vacate first; otherwise the upper cube's path is clear
        bool lower_first = s_up < -0.5;
        FiberStage first, second;
        first.q = fiber;
        second.q = fiber;
        first.mods = mods;
        second.mods = mods;
        if (lower_first) {
            first.f = make_piston(-0.5, s_lo, +0.5, rho);
            second.f = make_piston(+0.5, s_up, s_lo, rho);
        } else {
            first.f = make_piston(+0.5, s_up, -0.5, rho);
            second.f = make_piston(-0.5, s_lo, s_up, rho);
        }
        T.stages.push_back(first);
        T.stages.push_back(second);
    }

    // horizontal slides: one axis at a time, one slab per slot
    double slab = std::ldexp(1.0, -(n + 1));
    for (int l = 0; l < n - 1; ++l) {
        for (int j = 1; j <= (1 << n); ++j) {
            Vertex v = vertex_of_slot(j, n);
            FiberStage st;
            st.q = l;
            st.f = make_slide(0.5 * v[l], rho);
            for (int m = 0; m < n; ++m) {
                if (m == l) continue;
                double c, outer;
                if (m == fiber) {
                    c = slot_pattern(j, n);
                    outer = slab;
                } else if (m < l) {
                    c = 0.0;
                    outer = 1.0;
                } else {
                    c = 0.5 * v[m];
                    outer = 0.5;
                }
                st.mods.push_back({m, c, rho, outer});
            }
            T.stages.push_back(st);
        }
    }
    return T;
}

Vec TowerTemplate::apply(const Vec& x) const {
    Vec y = x;
    for (const auto& st : stages) y = st.apply(y);
    return y;
}

Vec TowerTemplate::invert(const Vec& y) const {
    Vec x = y;
    for (auto it = stages.rbegin(); it != stages.rend(); ++it) x = it->invert(x);
    return x;
}

Mat TowerTemplate::jet_at(const Vec& x) const {
    Mat D = Mat::identity(n);
    Vec cur = x;
    for (const auto& st : stages) {
        D = st.jet_at(cur).mul(D);
        cur = st.apply(cur);
    }
    return D;
}

Mat TowerTemplate::jet_inverse_at(const Vec& y) const { return jet_at(invert(y)).inverse(); }

TowerMap::TowerMap(Sequences s, int stages)
    : seq(s), K(stages), tmpl(TowerTemplate::build(s.n, s.beta)) {
    rhd.resize(K + 1);
    for (int j = 0; j <= K; ++j) rhd[j] = seq.rh(j).to_double();
}

TowerMap::TildeWalk TowerMap::walk_tilde(const Vec& x, int max_depth) const {
    TildeWalk w;
    w.ztilde = Vec::zeros(seq.n);
    w.zhat = Vec::zeros(seq.n);
    w.path.n = seq.n;
    for (int j = 1; j <= max_depth; ++j) {
        Vertex v{};
        for (int i = 0; i < seq.n; ++i) v[i] = x[i] >= w.ztilde[i] ? 1 : -1;
        Vec zc = w.ztilde;
        for (int i = 0; i < seq.n; ++i) zc[i] += 0.5 * rhd[j - 1] * v[i];
        if ((x - zc).max_abs() > rhd[j]) break;
        w.ztilde = zc;
        w.zhat[seq.n - 1] += rhd[j - 1] * slot_pattern(slot_of_vertex(v, seq.n), seq.n);
        w.path.v.push_back(v);
        w.depth = j;
    }
    return w;
}

TowerMap::TowerWalk TowerMap::walk_tower(const Vec& y, int max_depth) const {
    TowerWalk w;
    w.zhat = Vec::zeros(seq.n);
    w.ztilde = Vec::zeros(seq.n);
    for (int j = 1; j <= max_depth; ++j) {
        int found = 0;
        for (int s = 1; s <= (1 << seq.n); ++s) {
            Vec zc = w.zhat;
            zc[seq.n - 1] += rhd[j - 1] * slot_pattern(s, seq.n);
            if ((y - zc).max_abs() <= rhd[j]) {
                found = s;
                w.zhat = zc;
                break;
            }
        }
        if (!found) break;
        Vertex v = vertex_of_slot(found, seq.n);
        for (int i = 0; i < seq.n; ++i) w.ztilde[i] += 0.5 * rhd[j - 1] * v[i];
        w.slots.push_back(found);
        w.depth = j;
    }
    return w;
}

Vec TowerMap::forward(const Vec& x) const {
    if (x.max_abs() > 1.0) return x;
    TildeWalk w = walk_tilde(x, K);
    if (w.depth == K) return x + (w.zhat - w.ztilde);
    double scale = rhd[w.depth];
    Vec xi = (x - w.ztilde).scaled(1.0 / scale);
    return w.zhat + tmpl.apply(xi).scaled(scale);
}

Vec TowerMap::inverse(const Vec& y) const {
    if (y.max_abs() > 1.0) return y;
    TowerWalk w = walk_tower(y, K);
    if (w.depth == K) return y - w.zhat + w.ztilde;
    double scale = rhd[w.depth];
    Vec xi = (y - w.zhat).scaled(1.0 / scale);
    return w.ztilde + tmpl.invert(xi).scaled(scale);
}

Mat TowerMap::jet(const Vec& x) const {
    if (x.max_abs() > 1.0) return Mat::identity(seq.n);
    TildeWalk w = walk_tilde(x, K);
    if (w.depth == K) return Mat::identity(seq.n);
    Vec xi = (x - w.ztilde).scaled(1.0 / rhd[w.depth]);
    return tmpl.jet_at(xi);
}

Mat TowerMap::jet_inverse(const Vec& y) const {
    if (y.max_abs() > 1.0) return Mat::identity(seq.n);
    TowerWalk w = walk_tower(y, K);
    if (w.depth == K) return Mat::identity(seq.n);
    Vec xi = (y - w.zhat).scaled(1.0 / rhd[w.depth]);
    return tmpl.jet_inverse_at(xi);
}

double TowerMap::bilip_estimate(int samples_per_axis) const {
    double worst = 1.0;
    int n = seq.n;
    std::array<int, 3> idx{};
    auto sample = [&](double frac) { return -1.0 + 2.0 * frac; };
    int total = 1;
    for (int i = 0; i < n; ++i) total *= samples_per_axis;
    for (int t = 0; t < total; ++t) {
        int rem = t;
        Vec x = Vec::zeros(n);
        for (int i = 0; i < n; ++i) {
            idx[i] = rem % samples_per_axis;
            rem /= samples_per_axis;
            // offset the grid so samples miss the knot hyperplanes
            x[i] = sample((idx[i] + 0.37) / samples_per_axis);
        }
        Mat D = tmpl.jet_at(x);
        worst = std::max(worst, D.op_norm());
        worst = std::max(worst, D.inverse().op_norm());
    }
    return worst;
}

}  // namespace cantorlab
