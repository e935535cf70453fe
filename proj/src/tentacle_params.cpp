#include "cantorlab/tentacle.hpp"

#include <cmath>
#include <stdexcept>

namespace cantorlab {

Dyadic pi_lo_dyadic() { return Dyadic::from_mant_exp(201, -6); }     // 3.140625
Dyadic pi_hi_dyadic() { return Dyadic::from_mant_exp(3217, -10); }   // 3.1416015625

TentacleAxis axis_params(const Sequences& s, int k) {
    if (k < 1) throw std::invalid_argument("axis_params: k >= 1");
    TentacleAxis ax;
    // a_k = 1 - sum_{i=0}^{k} rh_{i+2};  c_k = a_{k-1}
    Dyadic a = Dyadic::from_int(1);
    Dyadic c;
    for (int i = 0; i <= k; ++i) {
        if (i == k) c = a;
        a = a.sub(s.rh(i + 2));
    }
    ax.a = a;
    ax.c = c;
    ax.atil = s.rh(k).mul_pow2(1);
    ax.ctil = s.rh(k - 1).mul_pow2(1);
    ax.A = a.sub(s.rh(k));
    ax.C = c.sub(s.rh(k));
    return ax;
}

namespace {

double delta_budget(const Sequences& s, int k) {
    return std::ldexp(1.0, -k * s.beta * (2 * s.n - 1)) / ((double)k * k);
}

// exponent of a power-of-two Dyadic
i128 pow2_exp(const Dyadic& v) { return v.log2_trailing(); }

// shear moment of the axis reparametrization: int (S - l)^2 dl over [0, C]
double shear_moment2(const TentacleParams& p, int k) {
    double A = p.Ad(k), C = p.Cd(k), rh = p.rhd(k), lam = p.lam(k);
    double first = (1.0 - lam) * (1.0 - lam) * A * A * A / 3.0;
    double tail = (A - rh) * (A - rh) * (C - A) / 3.0;
    return first + tail;
}

// log2 of the generation-k tail-piece energy at d = 2^e (without the b-core
// term, which does not depend on d). Used to solve the "tail" cap.
double tail_log2(const Sequences& s, const TentacleParams& p, int k, double e) {
    int n = s.n;
    double C = p.Cd(k), A = p.Ad(k), rh = p.rhd(k);
    double Lam = (C - rh) / (C - A);
    double N = p.widths(k).N;
    double Lrun = N * std::log(2.0);
    double lenl2 = std::log2(C - A);
    if (n == 3) {
        // band 8m dm: (C-A) (2d^2) [2 + 2(Lam-1)/L + (Lam-1)^2/L^2]
        double bracket = 2.0 + 2.0 * (Lam - 1.0) / Lrun +
                         (Lam - 1.0) * (Lam - 1.0) / (Lrun * Lrun);
        return k * n + lenl2 + 1.0 + 2.0 * e + std::log2(bracket);
    }
    // n == 2, first-power integrand, band 2 dm:
    // (C-A) [2d + (Lam-1) 2d/L]
    double bracket = 2.0 + 2.0 * (Lam - 1.0) / Lrun;
    return k * n + lenl2 + e + std::log2(bracket);
}

double bulk_log2(const Sequences& s, const TentacleParams& p, int k, double e) {
    int n = s.n;
    return k * n + std::log2((double)n) + (n - 1) * (1.0 + e) + std::log2(p.Cd(k));
}

}  // namespace

EnergyTerms energy_upper_bound(const Sequences& s, const TentacleParams& p, int k) {
    EnergyTerms t;
    int n = s.n;
    t.delta = delta_budget(s, k);
    double A = p.Ad(k), C = p.Cd(k), rh = p.rhd(k);
    double lam = p.lam(k), Lam = p.Lam(k);
    double d = p.dd(k), b = p.bd(k);
    double N = p.widths(k).N, L = N * std::log(2.0);
    double cells = std::ldexp(1.0, k * n);

    if (n == 3) {
        // integrand |Dh|^2; collar band measure 8m dm on [b, d]
        double Sh = 8.0 / L;                       // int mu'^2 8m dm (log profile, exact)
        double M1 = 4.0 * (d * d - b * b);         // int 8m dm
        double Mmu2 = 2.0 * d * d / (L * L);       // >= int mu^2 8m dm
        t.shear_first = cells * Sh * (1.0 - lam) * (1.0 - lam) * A * A * A / 3.0;
        t.shear_tail = cells * Sh * (A - rh) * (A - rh) * (C - A) / 3.0;
        t.diag_first = cells * A * (lam * lam * 4.0 * b * b + M1 + (1.0 - lam) * (1.0 - lam) * Mmu2);
        t.diag_tail = cells * (C - A) *
                      (Lam * Lam * 4.0 * b * b + M1 + (Lam - 1.0) * 4.0 * d * d / L +
                       (Lam - 1.0) * (Lam - 1.0) * Mmu2);
        t.bulk = cells * (n - 1) * 4.0 * d * d * C;
        t.floor_lower = 0.0;
    } else {
        // integrand |Dh|^1 <= |axis| + |shear| + 1; collar band measure 2 dm
        double Mmu = 2.0 * d / L;  // >= int mu 2 dm
        t.shear_first = cells * 2.0 * (1.0 - lam) * A * A / 2.0;
        t.shear_tail = cells * 2.0 * (A - rh) * (C - A) / 2.0;
        t.diag_first = cells * A * (lam * 2.0 * b + 2.0 * (d - b));
        t.diag_tail = cells * (C - A) * (Lam * 2.0 * b + 2.0 * (d - b) + (Lam - 1.0) * Mmu);
        t.bulk = cells * 2.0 * d * C;
        // profile-independent floor: int mu' dm = 1 across the collar for any
        // monotone profile, and the first-branch image stays in the parent
        // head where every older stage is the identity. Restricted to the
        // straight pieces (drop 2 pi d per own elbow, and ancestor elbows
        // carry speed 1 +- 2^-N).
        double lface = 0.0;
        double dsum = 0.0;
        if (k >= 2) {
            lface = 2.0 * p.rhd(k - 1) * 2.0;  // coarse: own-route length < 4 rh_{k-1}
            for (int j = 2; j <= k; ++j) dsum += 4.0 * 3.1416015625 * p.dd(j);
        }
        double span = A * A - lface * lface - dsum * A;
        if (span < 0) span = 0;
        t.floor_lower = cells * (1.0 - lam) * span * (1.0 - std::ldexp(1.0, -(int)std::min(N, 60.0)));
    }

    // elbows distort by bounded factors (speed in [1/2, 3/2], measure 3/2);
    // charge factor 9 on the fraction of chart length they occupy, plus the
    // squeeze preimage stretch 1/lam.
    if (k >= 2) {
        double sub = t.shear_first + t.shear_tail + t.diag_first + t.diag_tail + t.bulk;
        double frac = 2.0 * 3.1416015625 * d * (1.0 + 1.0 / lam) * 2.0 / C;
        if (frac > 1.0) frac = 1.0;
        t.elbow_slop = 8.0 * sub * frac;
    }
    t.achieved = (n == 3) ? (t.total() <= t.delta)
                          : (t.total() <= t.delta && t.floor_lower <= t.delta);
    return t;
}

int max_stage(const Sequences& s) {
    for (int K = 1; K <= 32; ++K) {
        try {
            autotune_widths(s, K);
        } catch (const std::runtime_error&) {
            return K - 1;
        }
    }
    return 32;
}

TentacleParams autotune_widths(const Sequences& s, int K) {
    if (!s.valid()) throw std::invalid_argument("autotune_widths: invalid sequences");
    if (K < 1) throw std::invalid_argument("autotune_widths: K >= 1");
    int n = s.n;
    TentacleParams p;
    p.seq = s;
    p.K = K;
    p.ax.resize((size_t)K + 1);
    p.w.resize((size_t)K + 1);
    p.energy.resize((size_t)K + 1);
    p.all_achieved = true;

    for (int k = 1; k <= K; ++k) {
        p.ax[(size_t)k] = axis_params(s, k);
        GenWidths& gw = p.w[(size_t)k];
        gw.k = k;
        gw.delta = delta_budget(s, k);

        // N first: at n = 3 the collar shear integral is 8/(N ln 2) per unit
        // of int (S-l)^2 dl, independent of d, so N alone meets the shear
        // slice of the budget. At n = 2 the same integral has the
        // d-independent floor 2 per unit of int |S-l| dl; no N helps, keep a
        // fixed collar and let the energy report carry the floor.
        if (n == 3) {
            double S2 = shear_moment2(p, k);
            double lNmin = k * n + 3.0 + (k + 1.0) - std::log2(gw.delta) + std::log2(S2) -
                           std::log2(std::log(2.0));
            int eN = (int)std::ceil(lNmin);
            if (eN < 5) eN = 5;
            if (eN >= 127) throw std::runtime_error("autotune_widths: collar exponent overflows the dyadic range");
            gw.N = std::ldexp(1.0, eN);
        } else {
            gw.N = 32.0;
        }

        // caps on d, all power-of-two exponents
        WidthCaps& caps = gw.caps;
        caps.hard = pow2_exp(s.rh(k)) - 2;
        caps.station = pow2_exp(s.rh(k - 1)) - n - 5;
        if (k >= 2) {
            caps.has_routing = true;
            caps.routing = pow2_exp(p.w[(size_t)k - 1].b) - n - 1;
        }
        // bulk: n (2d)^{n-1} C 2^{kn} <= delta/4, solved in log2 then verified
        {
            double target = std::log2(gw.delta) - 2.0;
            double e = (target - (k * n + std::log2((double)n) + (n - 1) + std::log2(p.Cd(k)))) /
                       (n - 1);
            i128 eb = (i128)std::floor(e);
            while (bulk_log2(s, p, k, (double)eb) > target) --eb;
            while (bulk_log2(s, p, k, (double)(eb + 1)) <= target) ++eb;
            caps.bulk = eb;
        }
        // tail cap needs N fixed (the bracket holds L): delta 2^{-k-2}
        {
            gw.k = k;  // tail_log2 reads widths(k).N
            double target = std::log2(gw.delta) - (k + 2.0);
            i128 et = caps.hard;
            while (tail_log2(s, p, k, (double)et) > target) --et;
            while (tail_log2(s, p, k, (double)(et + 1)) <= target) ++et;
            caps.tail = et;
        }
        caps.binding = caps.hard;
        caps.binding_name = "hard";
        auto consider = [&](i128 e, const char* name) {
            if (e < caps.binding) {
                caps.binding = e;
                caps.binding_name = name;
            }
        };
        consider(caps.station, "station");
        consider(caps.bulk, "bulk");
        consider(caps.tail, "tail");
        if (caps.has_routing) consider(caps.routing, "routing");

        gw.d = Dyadic::pow2(caps.binding);
        // b = d 2^-N with N an exact power of two
        int eN = (int)std::llround(std::log2(gw.N));
        if (std::ldexp(1.0, eN) != gw.N) throw std::logic_error("autotune_widths: N not a power of two");
        i128 shift = (i128)1 << eN;
        i128 eb = caps.binding - shift;
        // headroom so later stages can still subtract from the exponent
        if (eb < -((i128)1 << 126) / 4) throw std::runtime_error("autotune_widths: width exponent overflows the dyadic range");
        gw.b = Dyadic::pow2(eb);

        p.energy[(size_t)k] = energy_upper_bound(s, p, k);
        if (!p.energy[(size_t)k].achieved) p.all_achieved = false;
    }
    return p;
}

std::vector<std::string> check_width_constraints(const Sequences& s, const TentacleParams& p,
                                                 int k, const Dyadic& d_override) {
    std::vector<std::string> bad;
    int n = s.n;
    Dyadic d = d_override.is_zero() ? p.widths(k).d : d_override;
    double N = p.widths(k).N;
    i128 ed = pow2_exp(d);
    i128 eb = ed - ((i128)1 << (int)std::llround(std::log2(N)));

    // exact power-of-two comparisons; no cross-scale sums
    if (!(ed <= pow2_exp(s.rh(k)) - 2)) bad.push_back("hard");
    if (!(ed <= pow2_exp(s.rh(k - 1)) - n - 5)) bad.push_back("station");
    if (k >= 2) {
        i128 ebprev = pow2_exp(p.widths(k - 1).b);
        if (!(ed <= ebprev - n - 1)) bad.push_back("routing");
        if (!(ed < ebprev + 2 * n)) bad.push_back("parent-clearance");
    }
    if (!(eb < -(i128)3 * k)) bad.push_back("cube-decay");

    double target_bulk = std::log2(p.widths(k).delta) - 2.0;
    if (bulk_log2(s, p, k, (double)ed) > target_bulk) bad.push_back("bulk");
    if (n == 3) {
        double target_tail = std::log2(p.widths(k).delta) - (k + 2.0);
        if (tail_log2(s, p, k, (double)ed) > target_tail) bad.push_back("tail");
        double L = N * std::log(2.0);
        double shear = std::ldexp(1.0, k * n) * (8.0 / L) * shear_moment2(p, k);
        if (shear > p.widths(k).delta * std::ldexp(1.0, -k - 1)) bad.push_back("shear");
    }
    return bad;
}

Dyadic tube_measure(const Sequences& s, const TentacleParams& p, int k, bool primed) {
    Dyadic w = primed ? p.widths(k).d : p.widths(k).b;
    Dyadic cross = w.mul_pow2(1);
    Dyadic vol = p.axis(k).C;
    for (int i = 0; i < s.n - 1; ++i) vol = vol.mul(cross);
    return vol.mul_pow2((i128)k * s.n);
}

}  // namespace cantorlab
