#include "cantorlab/composite.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

#include "walk_internal.hpp"

namespace cantorlab {

using namespace walkdet;

namespace {

// exact floor of a nonnegative dyadic below 2^40
long long dy_floor(const Dyadic& x) {
    long long lo = 0;
    for (int bit = 39; bit >= 0; --bit) {
        long long cand = lo + (1LL << bit);
        if (Dyadic::from_int(cand).cmp(x) <= 0) lo = cand;
    }
    return lo;
}

long long dy_ceil(const Dyadic& x) {
    long long f = dy_floor(x);
    return x.sub(Dyadic::from_int(f)).is_zero() ? f : f + 1;
}

// per-axis corner-cube center values at one generation, as exact dyadics
std::vector<Dyadic> axis_centers(const Sequences& s, int k) {
    std::vector<Dyadic> cur{Dyadic::from_int(0)};
    for (int j = 1; j <= k; ++j) {
        Dyadic step = s.r(j - 1).half();
        std::vector<Dyadic> next;
        next.reserve(cur.size() * 2);
        for (const Dyadic& z : cur) {
            next.push_back(z.add(step));
            next.push_back(z.sub(step));
        }
        cur = std::move(next);
    }
    return cur;
}

// grid cells of [-1,1]^n per axis whose closure lies in [z - r, z + r]:
// integer i with (z - r + 1) m/2 <= i and i + 1 <= (z + r + 1) m/2
long long axis_cell_count(const Dyadic& z, const Dyadic& r, int mlog) {
    Dyadic one = Dyadic::from_int(1);
    Dyadic lo = z.sub(r).add(one).mul_pow2(mlog - 1);
    Dyadic hi = z.add(r).add(one).mul_pow2(mlog - 1);
    return std::max(0LL, dy_floor(hi) - dy_ceil(lo));
}

}  // namespace

// ---------------------------------------------------------------------------

CompositeMap CompositeMap::build(const Sequences& s, const TentacleParams& p, int stage) {
    if (p.seq.n != s.n || p.seq.beta != s.beta)
        throw std::invalid_argument("composite: sequence/parameter mismatch");
    if (stage < 0 || stage > p.K)
        throw std::invalid_argument("composite: stage outside tuned range");
    CompositeMap f;
    f.seq = s;
    f.k = stage;
    f.par = &p;
    if (stage >= 1) {
        f.g.emplace(s, stage);
        f.L.emplace(s, stage);
        f.h.emplace(s, p, stage);
    }
    return f;
}

int CompositeMap::support_gen(const Vec& x) const {
    if (k == 0) return 0;
    Vec xi = L->forward(g->forward(x));
    return h->support_gen(xi);
}

Vec CompositeMap::forward(const Vec& x) const {
    if (k == 0) return x;
    Vec xi = L->forward(g->forward(x));
    if (h->support_gen(xi) == 0) return x;
    return g->inverse(L->inverse(h->forward(xi)));
}

Vec CompositeMap::inverse(const Vec& y) const {
    if (k == 0) return y;
    Vec xi = L->forward(g->forward(y));
    if (h->support_gen(xi) == 0) return y;
    return g->inverse(L->inverse(h->inverse(xi)));
}

Mat CompositeMap::jet(const Vec& x) const {
    if (k == 0) return Mat::identity(seq.n);
    Vec x1 = g->forward(x);
    Vec xi = L->forward(x1);
    if (h->support_gen(xi) == 0) return Mat::identity(seq.n);
    Vec im = h->forward(xi);
    Mat W = outer_jet(*g, *L, im);
    return W.mul(h->jet(xi)).mul(L->jet(x1)).mul(g->jet(x));
}

double CompositeMap::jac(const Vec& x) const {
    if (k == 0) return 1.0;
    Vec x1 = g->forward(x);
    Vec xi = L->forward(x1);
    if (h->support_gen(xi) == 0) return 1.0;
    Vec im = h->forward(xi);
    double dw = outer_jet(*g, *L, im).det();
    return dw * h->jac(xi) * L->jet(x1).det() * g->jet(x).det();
}

// ---------------------------------------------------------------------------

double TubeSet::bound() const {
    return (heads.to_double() + body_cap.to_double()) / std::pow(2.0, n);
}

bool TubeSet::within_bound() const {
    // the head part meets its bound with equality by construction; the body
    // part reduces to the exact comparison recorded at build time
    return body_ok;
}

bool TubeSet::halves(const TubeSet& next) const {
    // 2 (h' + b') <= h + b via part-wise dyadic comparisons, never summing
    // across the scale gap
    Dyadic h2 = next.heads.mul_pow2(1);
    Dyadic b2 = next.body.mul_pow2(1);
    if (h2.cmp(heads) > 0) return false;
    if (b2.cmp(body) <= 0) return true;
    // the body grew (it starts at zero): the head slack must absorb it
    return b2.cmp(heads.sub(h2)) <= 0;
}

TubeSet tube_set(const Sequences& s, const TentacleParams& p, int k) {
    if (k < 0 || k > p.K) throw std::invalid_argument("tube_set: stage outside tuned range");
    TubeSet t;
    t.k = k;
    t.n = s.n;
    Dyadic cells = Dyadic::pow2(s.n * k);
    t.heads = s.rh(k).mul_pow2(1).pow((unsigned)s.n).mul(cells);
    t.pullback_heads = s.r(k).mul_pow2(1).pow((unsigned)s.n).mul(cells);
    if (k >= 1) {
        t.body = tube_measure(s, p, k, false);
        t.body_cap = p.w[(size_t)k].b.mul_pow2(1).pow((unsigned)(s.n - 1)).mul(cells).mul_pow2(1);
        t.body_ok = t.body.cmp(t.body_cap) <= 0;
    } else {
        t.body = Dyadic::from_int(0);
        t.body_cap = Dyadic::from_int(0);
        t.body_ok = true;
    }
    return t;
}

// ---------------------------------------------------------------------------

LusinReport lusin_report(const Sequences& s, const TentacleParams& p, int K, int grid) {
    if (K < 0 || K > p.K) throw std::invalid_argument("lusin: depth outside tuned range");
    if (grid < 2 || (grid & (grid - 1)) != 0)
        throw std::invalid_argument("lusin: grid must be a power of two >= 2");
    LusinReport rep;
    rep.grid = grid;
    const int n = s.n;

    // smallest grid that certifies at least one cell per axis inside the
    // deepest cubes
    std::vector<Dyadic> deep = axis_centers(s, K);
    for (int m = 2;; m <<= 1) {
        int ml = std::countr_zero((unsigned)m);
        long long worst = 1;
        for (const Dyadic& z : deep) worst = std::min(worst, axis_cell_count(z, s.r(K), ml));
        if (worst >= 1) {
            rep.required_grid = m;
            break;
        }
        if (m > (1 << 28)) throw std::runtime_error("lusin: no workable grid below 2^28");
    }
    if (grid < rep.required_grid) {
        rep.refused = true;
        return rep;
    }

    int mlog = std::countr_zero((unsigned)grid);
    for (int k = 0; k <= K; ++k) {
        LusinRow row;
        row.k = k;
        TubeSet ts = tube_set(s, p, k);
        row.tube_tower = ts.measure();
        row.image_exact = ts.pullback_heads.to_double();
        // per-axis counts over all sign words factorize the full cell count
        long long axis_total = 0;
        for (const Dyadic& z : axis_centers(s, k)) axis_total += axis_cell_count(z, s.r(k), mlog);
        double cells = std::pow((double)axis_total, n);
        row.grid_cells = (cells < 9e18) ? (long long)std::llround(cells) : -1;
        row.image_grid = cells * std::pow(2.0 / grid, n);
        row.ratio = row.image_exact / row.tube_tower;
        rep.rows.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------

CauchyRow cauchy_difference(const Sequences& s, const TentacleParams& p, int k, double q,
                            int lpanels, int branch_cap, double depth_cut) {
    if (k < 1 || k > p.K) throw std::invalid_argument("difference: stage outside tuned range");
    if (q <= 0) throw std::invalid_argument("difference: exponent must be positive");
    if (q > s.n - 1 + 1e-12)
        throw std::domain_error("difference: exponent above n-1 diverges at the centerline");
    CauchyRow row;
    row.k = k;
    row.q = q;
    CornerMap g(s, k);
    TowerMap L(s, k);
    GenTotals gt = walk_generation(s, p, k, g, L, q, lpanels, branch_cap, BandMode::Gap, depth_cut);
    row.value = gt.fine.value;
    row.support = gt.fine.support;
    row.rel_err = gt.refine_err + gt.spread_err;
    row.branches = gt.branches;
    row.walked = gt.walked;
    // the support columns cover the same (possibly depth-cut) band the walk
    // integrated, as a fraction of the exact tube measure
    SqueezeProfile pr = SqueezeProfile::make(p, k);
    double tube = tube_measure(s, p, k, true).to_double();
    double shell_w = (s.n == 2) ? 2 * pr.d : 4 * pr.d * pr.d;
    double frac =
        shell_w > 0 ? collar_moments(pr, s.n, q, depth_cut).shell_full / shell_w : 0.0;
    row.support_lo = tube * frac * (gt.fine.jmax > 0 ? gt.fine.jmin : 0);
    row.support_hi = tube * frac * gt.fine.jmax;
    return row;
}

// ---------------------------------------------------------------------------

MassReport jacobian_mass(const Sequences& s, const TentacleParams& p, int k, int lpanels,
                         int branch_cap) {
    if (k < 0 || k > p.K) throw std::invalid_argument("mass: stage outside tuned range");
    MassReport rep;
    double full = std::pow(2.0, s.n);
    if (k == 0) {
        rep.mass = full;
        rep.off_volume = full;
        return rep;
    }
    CornerMap g(s, k);
    TowerMap L(s, k);
    double supp_total = 0, mass_total = 0, err = 0;
    for (int j = 1; j <= k; ++j) {
        if (p.dd(j) <= 0) continue;  // slab volume below double range
        GenTotals gt =
            walk_generation(s, p, j, g, L, 1.0, lpanels, branch_cap, BandMode::Mass, 1e300);
        supp_total += gt.fine.support;
        mass_total += gt.fine.mass;
        err += (gt.refine_err + gt.spread_err) * std::abs(gt.fine.mass) / full;
        if (j < k && p.dd(j + 1) > 0) {
            // children ride inside this band; their double-counted share is
            // bounded by the width ratio to the n-1 power times their count
            double ratio = p.dd(j + 1) / p.dd(j);
            err += std::pow(2.0, s.n) * std::pow(ratio, s.n - 1) * gt.fine.support / full;
        }
    }
    rep.off_volume = full - supp_total;
    rep.mass = rep.off_volume + mass_total;
    rep.rel_err = err;
    return rep;
}

// ---------------------------------------------------------------------------

FixedPointReport fixed_point_check(const Sequences& s, const TentacleParams& p, int k,
                                   int per_face, int interior, unsigned seed, double tol) {
    FixedPointReport rep;
    CompositeMap f = CompositeMap::build(s, p, k);
    const int n = s.n;
    auto take = [&](const Vec& x) {
        Vec y = f.forward(x);
        double dev = y.dist_inf(x);
        rep.samples++;
        rep.max_dev = std::max(rep.max_dev, dev);
        if (dev > tol) rep.violations++;
    };

    // boundary lattice on each face
    for (int ax = 0; ax < n; ++ax) {
        for (int sgn = -1; sgn <= 1; sgn += 2) {
            int gsz = (n == 2) ? per_face
                               : std::max(2, (int)std::ceil(std::sqrt((double)per_face)));
            int total = (n == 2) ? per_face : gsz * gsz;
            for (int i = 0; i < total; ++i) {
                Vec x = Vec::zeros(n);
                x[ax] = (double)sgn;
                if (n == 2) {
                    x[1 - ax] = -1.0 + 2.0 * (i + 0.5) / per_face;
                } else {
                    int a = i % gsz, b = i / gsz;
                    x[(ax + 1) % n] = -1.0 + 2.0 * (a + 0.5) / gsz;
                    x[(ax + 2) % n] = -1.0 + 2.0 * (b + 0.5) / gsz;
                }
                take(x);
            }
        }
    }

    // cube corners
    for (int w = 0; w < (1 << n); ++w) {
        Vec x = Vec::zeros(n);
        for (int i = 0; i < n; ++i) x[i] = (w >> i & 1) ? 1.0 : -1.0;
        take(x);
    }

    // generation-k corner-cube centers, plus a face center on early cubes
    if (k >= 1) {
        long long cubes = 1LL << (n * k);
        long long stride = std::max(1LL, cubes / 4096);
        double rk = s.r(k).to_double();
        for (long long ci = 0; ci < cubes; ci += stride) {
            VertexPath path;
            path.n = n;
            long long rest = ci;
            for (int j = 0; j < k; ++j) {
                Vertex v{0, 0, 0};
                for (int i = 0; i < n; ++i) v[(size_t)i] = (rest >> i & 1) ? 1 : -1;
                rest >>= n;
                path.v.push_back(v);
            }
            Vec c = f.g->corner_center_d(path);
            take(c);
            if (ci < 8 * stride) {
                Vec fc = c;
                fc[0] += rk;
                take(fc);
            }
        }
    }

    // interior points clear of the supports
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int kept = 0;
    for (long long tries = 0; kept < interior && tries < 200LL * interior; ++tries) {
        Vec x = Vec::zeros(n);
        for (int i = 0; i < n; ++i) x[i] = u(rng);
        if (f.support_gen(x) != 0) continue;
        take(x);
        kept++;
    }
    return rep;
}

}  // namespace cantorlab
