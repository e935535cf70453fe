#pragma once
// Centerline-walk machinery shared by the composite integrals and the
// energy reports. Everything here works in tube chart coordinates: panels
// along the arclength line, closed-form collar moments across the width,
// and per-branch evaluation of the conjugated factor jets.
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "cantorlab/composite.hpp"

namespace cantorlab {
namespace walkdet {

// jet of the inverse conjugating pair at an image-side point
inline Mat outer_jet(const CornerMap& g, const TowerMap& L, const Vec& p) {
    Vec q = L.inverse(p);
    return g.jet_inverse(q).mul(L.jet_inverse(p));
}

inline Vec zero_trans(int n) { return Vec::zeros(n - 1); }

inline Mat axial_scale(int n, double s) { return Mat::diag(n, s, 1.0, 1.0); }

// one chart piece flattened to the global arclength line
struct FlatPiece {
    double l0 = 0, l1 = 0;
    bool elbow = false;
};

inline std::vector<FlatPiece> flatten(const TentacleChart& ch) {
    std::vector<FlatPiece> out;
    double off = 0;
    for (int j = ch.gen(); j >= 1; --j) {
        const LocalRoute& r = ch.hops[(size_t)j - 1];
        for (const ChartPiece& pc : r.pieces) {
            double a = off + pc.l0;
            if (a >= ch.l_total) break;
            out.push_back({a, std::min(off + pc.l1, ch.l_total), pc.elbow});
        }
        if (j >= 2) off += r.l_face;
    }
    return out;
}

// split pieces at the given arclength values
inline std::vector<FlatPiece> split_at(std::vector<FlatPiece> pieces,
                                       const std::vector<double>& cuts) {
    for (double c : cuts) {
        std::vector<FlatPiece> next;
        for (const FlatPiece& p : pieces) {
            if (c > p.l0 + 1e-300 && c < p.l1 - 1e-300) {
                next.push_back({p.l0, c, p.elbow});
                next.push_back({c, p.l1, p.elbow});
            } else {
                next.push_back(p);
            }
        }
        pieces = std::move(next);
    }
    return pieces;
}

// closed-form collar moments of the squeeze profile against the shell
// element of the transverse sup-ball: shell(m) dm = 2 dm in the plane,
// 8 m dm in space
struct CollarMoments {
    double shell_full = 0;  // (2d)^{n-1}
    double mup_q = 0;       // integral |mu'|^q shell dm
    double mup_1 = 0;       // integral |mu'| shell dm
};

// in log-depth coordinates u = ln(d/m) the shell integrals become exponential
// moments cut at Ue = min(U, L); U = infinity recovers the full collar plus
// the core, and the critical exponent q = n-1 yields the width-independent
// value that survives when d itself is below double range
inline CollarMoments collar_moments(const SqueezeProfile& pr, int n, double q, double U) {
    CollarMoments cm;
    double d = pr.d, b = pr.b, L = pr.L;
    double Ue = std::min(U, L);
    bool core = U >= L;
    auto em1 = [](double a, double u) {  // (1 - e^{-a u}) / a, continuous at a = 0
        return std::abs(a) < 1e-14 ? u : (1.0 - std::exp(-a * u)) / a;
    };
    if (n == 2) {
        cm.shell_full = 2 * d * em1(1.0, Ue) + (core ? 2 * b : 0);
        cm.mup_1 = 2 * em1(0.0, Ue) / L;
        cm.mup_q = 2 * std::pow(d, 1 - q) * em1(1 - q, Ue) / std::pow(L, q);
    } else {
        cm.shell_full = 8 * d * d * em1(2.0, Ue) + (core ? 4 * b * b : 0);
        cm.mup_1 = 8 * d * em1(1.0, Ue) / L;
        cm.mup_q = 8 * std::pow(d, 2 - q) * em1(2 - q, Ue) / std::pow(L, q);
    }
    return cm;
}

// integral of (c0 + c1 u + c2 u^2) e^{-s u} over [u0, u1]
inline double quad_exp(double c0, double c1, double c2, double s, double u0, double u1) {
    auto prim = [&](double u) {
        double e = std::exp(-s * u);
        return -e * ((c0 + c1 * u + c2 * u * u) / s + (c1 + 2 * c2 * u) / (s * s) +
                     2 * c2 / (s * s * s));
    };
    return prim(u1) - prim(u0);
}

// mu nodes for the image-family sampling, placed in log-depth coordinates
// where the shell weight concentrates, ending at the depth cut (and at the
// core mu = 1 when the full collar is integrated)
inline std::vector<double> mu_nodes(double L, double ucap) {
    // dense up front: the image family crosses map cells while the shell
    // weight is still significant, and the integrand jumps at each crossing
    std::vector<double> base;
    for (double u = 0; u < 6.01; u += 0.4) base.push_back(u);
    for (double u : {7.0, 8.0, 10.0, 12.0, 14.0, 16.0, 20.0, 24.0, 32.0, 45.0, 60.0})
        base.push_back(u);
    double Ue = std::min(ucap, L);
    std::vector<double> out;
    for (double u : base)
        if (u < Ue * (1 - 1e-9)) out.push_back(u / L);
    out.push_back(Ue / L);
    if (ucap >= L && Ue / L < 1 - 1e-12) out.push_back(1.0);
    return out;
}

// what the band evaluation should assemble beyond the mass terms: the jet
// difference against the previous stage, or the stage's own jet (for energy
// integrands and jacobian elements)
enum class BandMode { Mass, Gap, Own };

// per-branch walk state shared by the difference, mass, and energy integrals
struct BranchWalk {
    const Sequences* s = nullptr;
    const TentacleParams* p = nullptr;
    int k = 0;  // slab generation being walked
    int n = 2;
    const CornerMap* g = nullptr;  // jets of the composite's own stage
    const TowerMap* L = nullptr;
    TentacleChart ch;
    SqueezeTower anc;  // squeeze stages above the slab generation
    SqueezeProfile pr;
    std::vector<double> mus;

    BranchWalk(const Sequences& sq, const TentacleParams& par, int gen, const CornerMap& gm,
               const TowerMap& lm, const std::vector<int>& slots, double ucap)
        : s(&sq),
          p(&par),
          k(gen),
          n(sq.n),
          g(&gm),
          L(&lm),
          ch(TentacleChart::build(sq, par, slots)),
          anc(sq, par, gen - 1),
          pr(SqueezeProfile::make(par, gen)),
          mus(mu_nodes(pr.L, ucap)) {}

    std::vector<FlatPiece> panels() const {
        std::vector<FlatPiece> pieces = flatten(ch);
        std::vector<double> cuts{pr.A};
        for (const FlatPiece& fp : pieces) {
            double si = pr.S_inv(fp.l0);
            if (si > 0 && si < ch.l_total) cuts.push_back(si);
        }
        return split_at(std::move(pieces), cuts);
    }
};

struct CenterEval {
    double jpull = 0;  // 1 / |det DT| at the slab centerline
    double speed = 1;  // chart speed at the input point
    double v1 = 0;     // sup over mu of the frobenius target without shear
    double v2 = 0;     // sup over mu of the shear coefficient norm
    std::vector<double> fmu;   // det(W A) along the image family
    std::vector<double> almu;  // axial stretch 1 - mu + mu S'
    std::vector<double> jmu;   // composite jacobian along the family (Own mode)
};

// evaluate at one centerline arclength; the mode controls whether the
// stage-difference bound or the own-jet bound (v1, v2) is assembled
inline CenterEval eval_center(const BranchWalk& bw, double l, BandMode mode) {
    CenterEval ce;
    const int n = bw.n;
    Vec tz = zero_trans(n);
    Vec xi0 = bw.ch.eval(l, tz);
    Vec x1 = bw.L->inverse(xi0);
    Vec x0 = bw.g->inverse(x1);
    Mat DT = bw.L->jet(x1).mul(bw.g->jet(x0));
    double dtdet = std::abs(DT.det());
    ce.jpull = 1.0 / dtdet;

    double si = 1;
    Mat Qin = bw.ch.frame(l, tz, &si);
    ce.speed = si;

    bool frames = mode != BandMode::Mass;
    Mat Qin_inv = Mat::identity(n);
    Mat B{n, {}};
    if (frames) {
        Qin_inv = Qin.inverse();
        if (mode == BandMode::Gap) {
            Vec im = bw.anc.forward(xi0);
            B = outer_jet(*bw.g, *bw.L, im).mul(bw.anc.jet(xi0)).mul(DT);
        }
    }

    double S = bw.pr.S(l);
    double sl = bw.pr.S_slope(l);
    size_t nmu = bw.mus.size();
    ce.fmu.resize(nmu);
    ce.almu.resize(nmu);
    if (frames) ce.jmu.resize(nmu);
    for (size_t mi = 0; mi < nmu; ++mi) {
        double mu = bw.mus[mi];
        double pos = l + mu * (S - l);
        Vec ximu = bw.ch.eval(pos, tz);
        Vec ik = bw.anc.forward(ximu);
        Mat Wk = outer_jet(*bw.g, *bw.L, ik);
        ce.almu[mi] = 1 - mu + mu * sl;
        ce.fmu[mi] = Wk.det() * bw.anc.jac(ximu);
        if (!frames) continue;
        Mat A = bw.anc.jet(ximu);

        double so = 1;
        Mat Qout = bw.ch.frame(pos, tz, &so);
        ce.jmu[mi] = ce.fmu[mi] * ce.almu[mi] * (so / si) * dtdet;
        Mat J = Mat::identity(n);
        J.at(0, 0) = ce.almu[mi];
        Mat Dtau = Qout.mul(axial_scale(n, so)).mul(J).mul(axial_scale(n, 1.0 / si)).mul(Qin_inv);
        Mat D1 = Wk.mul(A).mul(Dtau).mul(DT).sub(B);
        ce.v1 = std::max(ce.v1, D1.frob());

        // the shear block is rank one: (W A Qout e0) x (row of Qin^T DT)
        Mat WAQ = Wk.mul(A).mul(Qout);
        double vnorm = 0;
        for (int i = 0; i < n; ++i) vnorm += WAQ.at(i, 0) * WAQ.at(i, 0);
        vnorm = std::sqrt(vnorm) * so;
        double wmax = 0;
        for (int a = 1; a < n; ++a) {
            double wn = 0;
            for (int cc = 0; cc < n; ++cc) {
                double e = 0;
                for (int rr = 0; rr < n; ++rr) e += Qin.at(rr, a) * DT.at(rr, cc);
                wn += e * e;
            }
            wmax = std::max(wmax, std::sqrt(wn));
        }
        ce.v2 = std::max(ce.v2, std::abs(S - l) * vnorm * wmax);
    }
    return ce;
}

// combine the band sup-bounds with the collar moments, exponent q; the
// split constant follows the power-mean inequality on both sides of q = 1
inline double band_integral(const CenterEval& ce, const CollarMoments& cm, int n, double q) {
    double V1 = ce.v1, V2 = ce.v2;
    if (n == 3 && std::abs(q - 2.0) < 1e-12)
        return V1 * V1 * cm.shell_full + 2 * V1 * V2 * cm.mup_1 + V2 * V2 * cm.mup_q;
    if (std::abs(q - 1.0) < 1e-12) return V1 * cm.shell_full + V2 * cm.mup_q;
    double split = std::pow(2.0, std::max(0.0, q - 1.0));
    return split * (std::pow(V1, q) * cm.shell_full + std::pow(V2, q) * cm.mup_q);
}

// collar mass of det(W A) (1 - mu + mu S'): piecewise-linear samples of
// det(W A) between the log-depth nodes, integrated exactly against the
// shell element; the core beyond the last node uses the mu = 1 sample
inline double band_mass(const CenterEval& ce, const BranchWalk& bw) {
    const SqueezeProfile& pr = bw.pr;
    int n = bw.n;
    double d = pr.d, b = pr.b, L = pr.L;
    if (d <= 0) return 0;
    size_t last = bw.mus.size() - 1;
    double core = ce.fmu[last] * ce.almu[last] * (n == 2 ? 2 * b : 4 * b * b);
    double scale = (n == 2) ? 2 * d : 8 * d * d;
    double s = (n == 2) ? 1.0 : 2.0;
    double total = 0;
    for (size_t mi = 0; mi + 1 < bw.mus.size(); ++mi) {
        double u0 = bw.mus[mi] * L, u1 = bw.mus[mi + 1] * L;
        if (u0 >= 60.0) break;
        double du = u1 - u0;
        if (du <= 0) continue;
        // f and al are both linear in u on this segment
        double fslope = (ce.fmu[mi + 1] - ce.fmu[mi]) / du;
        double aslope = (ce.almu[mi + 1] - ce.almu[mi]) / du;
        double fb = ce.fmu[mi] - fslope * u0, ab = ce.almu[mi] - aslope * u0;
        total += quad_exp(fb * ab, fb * aslope + ab * fslope, fslope * aslope, s, u0,
                          std::min(u1, 60.0));
    }
    return core + scale * total;
}

// deterministic branch subsample: all branches when they fit, else a stride
inline std::vector<long long> pick_branches(long long total, int cap) {
    std::vector<long long> out;
    if (total <= cap) {
        for (long long i = 0; i < total; ++i) out.push_back(i);
        return out;
    }
    long long stride = (total + cap - 1) / cap;
    for (long long i = 0; i < total; i += stride) out.push_back(i);
    return out;
}

inline std::vector<int> branch_slots(long long idx, int gen, int n) {
    std::vector<int> slots((size_t)gen);
    long long rest = idx;
    for (int j = 0; j < gen; ++j) {
        slots[(size_t)j] = 1 + (int)(rest % (1LL << n));
        rest /= (1LL << n);
    }
    return slots;
}

struct WalkTotals {
    double value = 0;
    double support = 0;
    double mass = 0;
    double jmin = 1e300, jmax = 0;
};

// jacobian element of one band cell: pointwise range across it and its
// exact domain-volume share
using BinSink = std::function<void(double jmid, double jlo, double jhi, double vol)>;

// emit the (panel x depth-segment) jacobian elements of one centerline
// evaluation; the segment shells telescope to the collar area exactly
inline void emit_bins(const CenterEval& ce, const BranchWalk& bw, double w, double ucap,
                      const BinSink& sink) {
    const SqueezeProfile& pr = bw.pr;
    double d = pr.d, b = pr.b, L = pr.L;
    if (d <= 0) return;
    int n = bw.n;
    for (size_t mi = 0; mi + 1 < bw.mus.size(); ++mi) {
        double u0 = bw.mus[mi] * L, u1 = bw.mus[mi + 1] * L;
        double shell = (n == 2) ? 2 * d * (std::exp(-u0) - std::exp(-u1))
                                : 4 * d * d * (std::exp(-2 * u0) - std::exp(-2 * u1));
        double j0 = ce.jmu[mi], j1 = ce.jmu[mi + 1];
        if (shell > 0)
            sink(0.5 * (j0 + j1), std::min(j0, j1), std::max(j0, j1), w * shell);
    }
    if (ucap >= L) {
        double jc = ce.jmu[bw.mus.size() - 1];
        double core = (n == 2) ? 2 * b : 4 * b * b;
        if (core > 0) sink(jc, jc, jc, w * core);
    }
}

inline WalkTotals walk_branch(const BranchWalk& bw, double q, int lpanels, BandMode mode,
                              double ucap, const BinSink& sink = {}) {
    WalkTotals t;
    CollarMoments cm;
    if (mode == BandMode::Mass)
        cm.shell_full = (bw.n == 2) ? 2 * bw.pr.d : 4 * bw.pr.d * bw.pr.d;
    else
        cm = collar_moments(bw.pr, bw.n, q, ucap);
    double C = bw.ch.l_total;
    for (const FlatPiece& fp : bw.panels()) {
        double span = fp.l1 - fp.l0;
        if (span <= 0) continue;
        int np = fp.elbow ? std::max(4, lpanels / 16)
                          : std::clamp((int)std::ceil(lpanels * span / C), 4, 4 * lpanels);
        double h = span / np;
        double slop = fp.elbow ? std::pow(3.0, q + 1) : 1.0;
        for (int i = 0; i < np; ++i) {
            double l = fp.l0 + (i + 0.5) * h;
            CenterEval ce = eval_center(bw, l, mode);
            double w = h * ce.jpull;
            if (mode != BandMode::Mass) t.value += w * slop * band_integral(ce, cm, bw.n, q);
            t.support += w * ce.speed * cm.shell_full;
            // det(W A) at the image already carries the image-cell pullback,
            // so the mass term uses the bare arclength element
            if (mode == BandMode::Mass) t.mass += h * band_mass(ce, bw);
            if (sink && mode == BandMode::Own) emit_bins(ce, bw, w * ce.speed, ucap, sink);
            t.jmin = std::min(t.jmin, ce.jpull);
            t.jmax = std::max(t.jmax, ce.jpull);
        }
    }
    return t;
}

// walk every (sampled) branch of one generation at two resolutions
struct GenTotals {
    WalkTotals fine;
    double refine_err = 0;  // relative gap between the two resolutions
    double spread_err = 0;  // relative spread across sampled branches
    long long branches = 0, walked = 0;
};

inline GenTotals walk_generation(const Sequences& s, const TentacleParams& p, int gen,
                                 const CornerMap& g, const TowerMap& L, double q, int lpanels,
                                 int branch_cap, BandMode mode, double ucap,
                                 const BinSink& sink = {}) {
    GenTotals gt;
    gt.branches = 1LL << (s.n * gen);
    std::vector<long long> pick = pick_branches(gt.branches, branch_cap);
    gt.walked = (long long)pick.size();
    double scale = (double)gt.branches / (double)gt.walked;
    BinSink scaled;
    if (sink)
        scaled = [&](double jm, double jl, double jh, double vol) {
            sink(jm, jl, jh, vol * scale);
        };
    double vmin = 0, vmax = 0;
    bool first = true;
    for (long long idx : pick) {
        BranchWalk bw(s, p, gen, g, L, branch_slots(idx, gen, s.n), ucap);
        WalkTotals coarse = walk_branch(bw, q, lpanels, mode, ucap);
        WalkTotals fine = walk_branch(bw, q, 2 * lpanels, mode, ucap, scaled);
        gt.fine.value += fine.value;
        gt.fine.support += fine.support;
        gt.fine.mass += fine.mass;
        gt.fine.jmin = std::min(gt.fine.jmin, fine.jmin);
        gt.fine.jmax = std::max(gt.fine.jmax, fine.jmax);
        double key = mode == BandMode::Mass ? fine.mass : fine.value;
        double ckey = mode == BandMode::Mass ? coarse.mass : coarse.value;
        if (key != 0)
            gt.refine_err = std::max(gt.refine_err, std::abs(key - ckey) / std::abs(key));
        if (first) {
            vmin = vmax = key;
            first = false;
        } else {
            vmin = std::min(vmin, key);
            vmax = std::max(vmax, key);
        }
    }
    gt.fine.value *= scale;
    gt.fine.support *= scale;
    gt.fine.mass *= scale;
    if (gt.walked < gt.branches && vmax != 0)
        gt.spread_err = (vmax - vmin) / std::max(std::abs(vmax), 1e-300);
    return gt;
}

}  // namespace walkdet
}  // namespace cantorlab
