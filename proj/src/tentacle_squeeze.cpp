#include "cantorlab/tentacle.hpp"

#include <cmath>
#include <stdexcept>

namespace cantorlab {

SqueezeProfile SqueezeProfile::make(const TentacleParams& p, int k) {
    SqueezeProfile pr;
    pr.A = p.Ad(k);
    pr.C = p.Cd(k);
    pr.rh = p.rhd(k);
    pr.lam = pr.rh / pr.A;
    pr.Lam = (pr.C - pr.rh) / (pr.C - pr.A);
    pr.d = p.dd(k);
    pr.b = p.bd(k);
    pr.N = p.widths(k).N;
    pr.L = pr.N * std::log(2.0);
    return pr;
}

double SqueezeProfile::S(double l) const { return l < A ? lam * l : rh + Lam * (l - A); }

double SqueezeProfile::S_inv(double lp) const { return lp < rh ? lp / lam : A + (lp - rh) / Lam; }

double SqueezeProfile::S_slope(double l) const { return l < A ? lam : Lam; }

double SqueezeProfile::mu(double m) const {
    if (m <= b) return 1.0;
    if (m >= d) return 0.0;
    double v = (std::log2(d) - std::log2(m)) / N;
    if (v > 1.0) v = 1.0;
    if (v < 0.0) v = 0.0;
    return v;
}

double SqueezeProfile::mu_slope(double m) const {
    if (m <= b || m >= d) return 0.0;
    return -1.0 / (m * L);
}

double SqueezeProfile::fwd(double l, double m) const {
    double u = mu(m);
    return l + u * (S(l) - l);
}

double SqueezeProfile::inv(double lp, double m) const {
    double u = mu(m);
    if (u == 0.0) return lp;
    if (u == 1.0) return S_inv(lp);
    double Aimg = A + u * (rh - A);
    if (lp <= Aimg) return lp / (1.0 - u + u * lam);
    return (lp - u * (rh - Lam * A)) / (1.0 - u + u * Lam);
}

namespace {

double max_abs_t(const Vec& t, int n) {
    double m = 0;
    for (int i = 0; i + 1 < n; ++i) m = std::max(m, std::abs(t.c[(size_t)i]));
    return m;
}

int argmax_abs_t(const Vec& t, int n) {
    int a = 0;
    double m = -1;
    for (int i = 0; i + 1 < n; ++i)
        if (std::abs(t.c[(size_t)i]) > m) {
            m = std::abs(t.c[(size_t)i]);
            a = i;
        }
    return a;
}

}  // namespace

Vec SqueezeTower::forward(const Vec& y) const {
    Vec cur = y;
    for (int j = k; j >= 1; --j) {
        auto hit = locate_tube(seq, *par, j, cur);
        if (!hit) continue;
        SqueezeProfile pr = SqueezeProfile::make(*par, j);
        double lp = pr.fwd(hit->l, max_abs_t(hit->t, seq.n));
        TentacleChart ch = TentacleChart::build(seq, *par, hit->slots);
        cur = ch.eval(lp, hit->t);
    }
    return cur;
}

Vec SqueezeTower::inverse(const Vec& z) const {
    Vec cur = z;
    for (int j = 1; j <= k; ++j) {
        auto hit = locate_tube(seq, *par, j, cur);
        if (!hit) continue;
        SqueezeProfile pr = SqueezeProfile::make(*par, j);
        double l = pr.inv(hit->l, max_abs_t(hit->t, seq.n));
        TentacleChart ch = TentacleChart::build(seq, *par, hit->slots);
        cur = ch.eval(l, hit->t);
    }
    return cur;
}

Mat SqueezeTower::jet(const Vec& y) const {
    int n = seq.n;
    Mat M = Mat::identity(n);
    Vec cur = y;
    for (int j = k; j >= 1; --j) {
        auto hit = locate_tube(seq, *par, j, cur);
        if (!hit) continue;
        SqueezeProfile pr = SqueezeProfile::make(*par, j);
        double m = max_abs_t(hit->t, n);
        double u = pr.mu(m);
        double lp = pr.fwd(hit->l, m);
        TentacleChart ch = TentacleChart::build(seq, *par, hit->slots);
        double sin_ = 1.0, sout = 1.0;
        Mat Qin = ch.frame(hit->l, hit->t, &sin_);
        Mat Qout = ch.frame(lp, hit->t, &sout);
        // chart-coordinate jet: row 0 couples to the sup-attaining t
        Mat J = Mat::identity(n);
        J.at(0, 0) = 1.0 - u + u * pr.S_slope(hit->l);
        if (m > 0) {
            int att = argmax_abs_t(hit->t, n);
            double sgn = hit->t.c[(size_t)att] > 0 ? 1.0 : -1.0;
            J.at(0, 1 + att) = pr.mu_slope(m) * (pr.S(hit->l) - hit->l) * sgn;
        }
        Mat D = Qout.mul(Mat::diag(n, sout, 1.0, 1.0))
                    .mul(J)
                    .mul(Mat::diag(n, 1.0 / sin_, 1.0, 1.0))
                    .mul(Qin.inverse());
        M = D.mul(M);
        cur = ch.eval(lp, hit->t);
    }
    return M;
}

// factored determinant: the assembled jet mixes the collar shear (which can
// dwarf the axial entries) into every component, so taking det of the matrix
// cancels catastrophically; per stage det is (sout/sin) (1 - mu + mu S')
double SqueezeTower::jac(const Vec& y) const {
    double det = 1.0;
    Vec cur = y;
    for (int j = k; j >= 1; --j) {
        auto hit = locate_tube(seq, *par, j, cur);
        if (!hit) continue;
        SqueezeProfile pr = SqueezeProfile::make(*par, j);
        double m = max_abs_t(hit->t, seq.n);
        double u = pr.mu(m);
        double lp = pr.fwd(hit->l, m);
        TentacleChart ch = TentacleChart::build(seq, *par, hit->slots);
        double sin_ = 1.0, sout = 1.0;
        ch.frame(hit->l, hit->t, &sin_);
        ch.frame(lp, hit->t, &sout);
        det *= (sout / sin_) * (1.0 - u + u * pr.S_slope(hit->l));
        cur = ch.eval(lp, hit->t);
    }
    return det;
}

int SqueezeTower::support_gen(const Vec& y) const {
    for (int j = k; j >= 1; --j)
        if (locate_tube(seq, *par, j, y)) return j;
    return 0;
}

// ---------------------------------------------------------------------------
// energy
// ---------------------------------------------------------------------------

namespace {

// exact band moments of the log collar profile against the shell measure
// (n-1) 2^{n-1} m^{n-2} dm on [b, d]
struct BandMoments {
    double M1;    // total band measure
    double Mmu;   // int mu
    double Mmu2;  // int mu^2
    double Sh;    // int mu'^2
};

BandMoments band_moments_n3(const SqueezeProfile& pr) {
    BandMoments bm;
    double L = pr.L, d = pr.d, b = pr.b;
    bm.M1 = 4.0 * (d * d - b * b);
    // substitute u = ln(d/m): int mu^p 8m dm = 8 d^2 / L^p int_0^L u^p e^{-2u} du
    double e2L = (2.0 * L > 700.0) ? 0.0 : std::exp(-2.0 * L);
    double I1 = 0.25 - e2L * (L / 2.0 + 0.25);
    double I2 = 0.25 - e2L * (L * L / 2.0 + L / 2.0 + 0.25);
    bm.Mmu = 8.0 * d * d * I1 / L;
    bm.Mmu2 = 8.0 * d * d * I2 / (L * L);
    bm.Sh = 8.0 / L;  // int 8/(m L^2) dm = 8 ln(d/b) / L^2 = 8 / L exactly
    return bm;
}

}  // namespace

double stage_local_energy_exact(const Sequences& s, const TentacleParams& p, int k) {
    if (s.n != 3) throw std::invalid_argument("stage_local_energy_exact: closed form is n=3 only");
    SqueezeProfile pr = SqueezeProfile::make(p, k);
    double cells = std::ldexp(1.0, k * s.n);
    BandMoments bm = band_moments_n3(pr);
    double A = pr.A, C = pr.C, lam = pr.lam, Lam = pr.Lam, b = pr.b;
    // core: |D|^2 = S'^2 + 2 on each affine piece
    double core = 4.0 * b * b * (A * (lam * lam + 2.0) + (C - A) * (Lam * Lam + 2.0));
    // collar, first piece: al = 1 - mu(1-lam), shear^2 integrates to Sh (S-l)^2
    double first = A * bm.M1 - 2.0 * (1.0 - lam) * A * bm.Mmu + (1.0 - lam) * (1.0 - lam) * A * bm.Mmu2 +
                   bm.Sh * (1.0 - lam) * (1.0 - lam) * A * A * A / 3.0;
    // collar, tail piece: al = 1 + mu(Lam-1)
    double tail = (C - A) * bm.M1 + 2.0 * (Lam - 1.0) * (C - A) * bm.Mmu +
                  (Lam - 1.0) * (Lam - 1.0) * (C - A) * bm.Mmu2 +
                  bm.Sh * (A - pr.rh) * (A - pr.rh) * (C - A) / 3.0;
    // transverse identity block over the whole tube
    double bulk = 2.0 * (bm.M1 + 4.0 * b * b) * C;
    return cells * (core + first + tail + bulk);
}

double stage_local_energy_quad(const Sequences& s, const TentacleParams& p, int k, double q,
                               double* rel_err) {
    SqueezeProfile pr = SqueezeProfile::make(p, k);
    if (!(pr.d > 0.0))
        throw std::invalid_argument("stage_local_energy_quad: width below double range");
    int n = s.n;
    double cells = std::ldexp(1.0, k * n);

    // Collar in u = ln(d/m): m = d e^-u, mu = u/L, shell measure
    // (n-1) 2^{n-1} m^{n-2} dm = shell(m) m du. The weighted integrand decays
    // like e^{-(n-1)u} except for the shear part, which is constant in u; the
    // numeric window [0, U] captures everything else to below 1e-30 and the
    // shear remainder over [U, L] is added in closed form.
    double U = std::min(40.0, pr.L);
    if (q > (double)(n - 1) && pr.L > U)
        throw std::domain_error("supercritical exponent: collar energy above double range");
    double shellc = (n - 1) * std::ldexp(1.0, n - 1);
    auto f_of = [&](double l, double u) {
        double m = pr.d * std::exp(-u);
        double muv = u / pr.L;
        double al = 1.0 - muv + muv * pr.S_slope(l);
        double sh = (pr.S(l) - l) / (m * pr.L);  // |mu'| (S - l)
        double f2 = al * al + sh * sh + (n - 1);
        double shell = shellc * std::pow(m, n - 1);
        return std::pow(f2, q / 2.0) * shell;
    };
    // remainder over u in (U, L), where the shear entry g/(m L) dwarfs the
    // rest of |D| whenever g is not tiny: the shear power integrates in
    // closed form and a diagonal slop term covers the g ~ 0 strip (it is
    // below 1e-30 of the total either way)
    auto tail_rem = [&](double l) {
        if (pr.L <= U) return 0.0;
        double g = std::abs(pr.S(l) - l);
        double p0 = n - 1 - q;
        double I = p0 == 0.0 ? (pr.L - U)
                             : (std::exp(-p0 * U) - std::exp(-p0 * pr.L)) / p0;
        double shear = shellc * std::pow(pr.d, p0) * std::pow(g / pr.L, q) * I;
        double diag = std::pow((double)n, q / 2.0) * shellc / (n - 1) *
                      std::pow(pr.d, n - 1) * std::exp(-(double)(n - 1) * U);
        return shear + diag;
    };
    auto sweep_l = [&](double l0, double l1, int nl, int nm) {
        double total = 0;
        for (int i = 0; i < nl; ++i) {
            double l = l0 + (l1 - l0) * (i + 0.5) / nl;
            double row = 0;
            for (int jm = 0; jm < nm; ++jm) {
                double uu = U * (jm + 0.5) / nm;
                row += f_of(l, uu);
            }
            total += row * U / nm + tail_rem(l);
        }
        return total * (l1 - l0) / nl;
    };
    auto pass = [&](int nl, int nm) {
        return sweep_l(0.0, pr.A, nl, nm) + sweep_l(pr.A, pr.C, nl, nm);
    };
    double c1 = pass(512, 2048), c2 = pass(1024, 4096);
    // core: constant integrand per affine piece
    double crossb = pr.b > 0 ? std::pow(2.0 * pr.b, n - 1) : 0.0;
    double core = crossb * (pr.A * std::pow((n - 1) + pr.lam * pr.lam, q / 2.0) +
                            (pr.C - pr.A) * std::pow((n - 1) + pr.Lam * pr.Lam, q / 2.0));
    if (rel_err) *rel_err = std::abs(c2 - c1) / std::max(1e-300, std::abs(c2));
    return cells * (c2 + core);
}

SqueezeEnergy squeeze_energy(const Sequences& s, const TentacleParams& p, int k, double q) {
    SqueezeEnergy e;
    int n = s.n;
    SqueezeProfile pr = SqueezeProfile::make(p, k);
    double cells = std::ldexp(1.0, k * n);
    double crossb = pr.b > 0 ? std::pow(2.0 * pr.b, n - 1) : 0.0;
    e.core_exact = cells * crossb *
                   (pr.A * std::pow((n - 1) + pr.lam * pr.lam, q / 2.0) +
                    (pr.C - pr.A) * std::pow((n - 1) + pr.Lam * pr.Lam, q / 2.0));
    if (q == (double)(n - 1)) {
        e.value = energy_upper_bound(s, p, k).total();
        if (pr.d > 0.0) {
            e.quadrature = true;
            stage_local_energy_quad(s, p, k, q, &e.rel_err);
        }
        return e;
    }
    if (pr.d > 0.0) {
        e.quadrature = true;
        e.value = stage_local_energy_quad(s, p, k, q, &e.rel_err);
        return e;
    }
    throw std::invalid_argument("squeeze_energy: general exponent needs visible widths");
}

}  // namespace cantorlab
