#include <cmath>
#include <cstring>
#include <stdexcept>

#include "cantorlab/cavity.hpp"

namespace cantorlab {

namespace {

long long cells_total(int n, int m) {
    long long t = 1;
    for (int i = 0; i < n; ++i) t *= m;
    return t;
}

}  // namespace

GridSet GridSet::empty(int n, int m, double lo, double hi) {
    if (n != 2 && n != 3) throw std::invalid_argument("grid: dimension must be 2 or 3");
    if (m <= 0) throw std::invalid_argument("grid: cells per axis must be positive");
    if (!(lo < hi)) throw std::invalid_argument("grid: empty box");
    GridSet g;
    g.n = n;
    g.m = m;
    g.lo = lo;
    g.hi = hi;
    g.mask.assign((size_t)cells_total(n, m), 0);
    return g;
}

GridSet GridSet::from_indicator(int n, int m, double lo, double hi,
                                const std::function<bool(const Vec&)>& inside) {
    GridSet g = empty(n, m, lo, hi);
    long long mz = (n == 3) ? m : 1;
    for (long long k = 0; k < mz; ++k)
        for (long long j = 0; j < m; ++j)
            for (long long i = 0; i < m; ++i)
                if (inside(g.cell_center(i, j, k))) g.mask[(size_t)g.idx(i, j, k)] = 1;
    return g;
}

double GridSet::cell_vol() const {
    double v = 1;
    for (int i = 0; i < n; ++i) v *= h();
    return v;
}

Vec GridSet::cell_center(long long i, long long j, long long k) const {
    Vec p = Vec::zeros(n);
    p[0] = lo + (i + 0.5) * h();
    p[1] = lo + (j + 0.5) * h();
    if (n == 3) p[2] = lo + (k + 0.5) * h();
    return p;
}

long long GridSet::idx(long long i, long long j, long long k) const {
    return (k * m + j) * m + i;
}

bool GridSet::at(long long i, long long j, long long k) const {
    if (i < 0 || j < 0 || k < 0 || i >= m || j >= m) return false;
    if (n == 3 && k >= m) return false;
    if (n == 2 && k != 0) return false;
    return mask[(size_t)idx(i, j, k)] != 0;
}

void GridSet::set(long long i, long long j, long long k, bool v) {
    mask[(size_t)idx(i, j, k)] = v ? 1 : 0;
}

long long GridSet::count() const {
    long long c = 0;
    for (std::uint8_t b : mask) c += b;
    return c;
}

bool GridSet::same_grid(const GridSet& o) const {
    return n == o.n && m == o.m && lo == o.lo && hi == o.hi;
}

GridSet GridSet::sym_diff(const GridSet& o) const {
    if (!same_grid(o)) throw std::invalid_argument("grid: resolution mismatch");
    GridSet r = *this;
    for (size_t i = 0; i < mask.size(); ++i) r.mask[i] = mask[i] ^ o.mask[i];
    return r;
}

GridSet GridSet::intersect(const GridSet& o) const {
    if (!same_grid(o)) throw std::invalid_argument("grid: resolution mismatch");
    GridSet r = *this;
    for (size_t i = 0; i < mask.size(); ++i) r.mask[i] = mask[i] & o.mask[i];
    return r;
}

GridSet GridSet::unite(const GridSet& o) const {
    if (!same_grid(o)) throw std::invalid_argument("grid: resolution mismatch");
    GridSet r = *this;
    for (size_t i = 0; i < mask.size(); ++i) r.mask[i] = mask[i] | o.mask[i];
    return r;
}

GridSet GridSet::complement() const {
    GridSet r = *this;
    for (size_t i = 0; i < mask.size(); ++i) r.mask[i] = mask[i] ? 0 : 1;
    return r;
}

SetMetrics set_metrics(const GridSet& a, const GridSet& b) {
    if (!a.same_grid(b)) throw std::invalid_argument("grid: resolution mismatch");
    long long ca = 0, cb = 0, cs = 0, ci = 0;
    for (size_t i = 0; i < a.mask.size(); ++i) {
        ca += a.mask[i];
        cb += b.mask[i];
        cs += a.mask[i] ^ b.mask[i];
        ci += a.mask[i] & b.mask[i];
    }
    double v = a.cell_vol();
    return SetMetrics{ca * v, cb * v, cs * v, ci * v};
}

// ---------------------------------------------------------------------------

namespace {

void push_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((std::uint8_t)(v >> (8 * i)));
}

std::uint32_t read_u32(const std::vector<std::uint8_t>& in, size_t& pos) {
    if (pos + 4 > in.size()) throw std::invalid_argument("rle: truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= (std::uint32_t)in[pos + i] << (8 * i);
    pos += 4;
    return v;
}

void push_f64(std::vector<std::uint8_t>& out, double d) {
    std::uint64_t u;
    std::memcpy(&u, &d, 8);
    for (int i = 0; i < 8; ++i) out.push_back((std::uint8_t)(u >> (8 * i)));
}

double read_f64(const std::vector<std::uint8_t>& in, size_t& pos) {
    if (pos + 8 > in.size()) throw std::invalid_argument("rle: truncated");
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= (std::uint64_t)in[pos + i] << (8 * i);
    pos += 8;
    double d;
    std::memcpy(&d, &u, 8);
    return d;
}

}  // namespace

std::vector<std::uint8_t> GridSet::to_rle() const {
    std::vector<std::uint8_t> out;
    out.push_back('G');
    out.push_back((std::uint8_t)n);
    push_u32(out, (std::uint32_t)m);
    push_f64(out, lo);
    push_f64(out, hi);
    out.push_back(mask.empty() ? 0 : mask[0]);
    std::vector<std::uint32_t> runs;
    std::uint32_t run = 0;
    std::uint8_t cur = mask.empty() ? 0 : mask[0];
    for (std::uint8_t b : mask) {
        if (b == cur) {
            ++run;
        } else {
            runs.push_back(run);
            cur = b;
            run = 1;
        }
    }
    if (run) runs.push_back(run);
    push_u32(out, (std::uint32_t)runs.size());
    for (std::uint32_t r : runs) push_u32(out, r);
    return out;
}

GridSet GridSet::from_rle(const std::vector<std::uint8_t>& bytes) {
    size_t pos = 0;
    if (bytes.size() < 2 || bytes[0] != 'G') throw std::invalid_argument("rle: bad header");
    int n = bytes[1];
    pos = 2;
    int m = (int)read_u32(bytes, pos);
    double lo = read_f64(bytes, pos);
    double hi = read_f64(bytes, pos);
    if (pos >= bytes.size()) throw std::invalid_argument("rle: truncated");
    std::uint8_t cur = bytes[pos++];
    std::uint32_t nruns = read_u32(bytes, pos);
    GridSet g = empty(n, m, lo, hi);
    size_t cell = 0;
    for (std::uint32_t r = 0; r < nruns; ++r) {
        std::uint32_t len = read_u32(bytes, pos);
        if (cell + len > g.mask.size()) throw std::invalid_argument("rle: overflow");
        if (cur) std::memset(g.mask.data() + cell, 1, len);
        cell += len;
        cur = cur ? 0 : 1;
    }
    if (cell != g.mask.size()) throw std::invalid_argument("rle: short mask");
    return g;
}

// ---------------------------------------------------------------------------

namespace {

// box average of the occupancy over a (2w+1)^n window centered at a cell;
// out-of-box cells are empty
double smoothed(const GridSet& a, int w, long long i, long long j, long long k) {
    long long s = 0;
    long long kz0 = (a.n == 3) ? k - w : 0, kz1 = (a.n == 3) ? k + w : 0;
    for (long long kk = kz0; kk <= kz1; ++kk)
        for (long long jj = j - w; jj <= j + w; ++jj)
            for (long long ii = i - w; ii <= i + w; ++ii) s += a.at(ii, jj, kk) ? 1 : 0;
    double win = std::pow(2.0 * w + 1.0, a.n);
    return (double)s / win;
}

// gradient of the smoothed field at the face between cell c and c+e_axis,
// in cell units: forward difference across the face, averaged central
// differences along it
void face_gradient(const GridSet& a, int w, long long i, long long j, long long k, int axis,
                   double g[3]) {
    long long d[3] = {0, 0, 0};
    d[axis] = 1;
    for (int t = 0; t < 3; ++t) g[t] = 0;
    g[axis] = smoothed(a, w, i + d[0], j + d[1], k + d[2]) - smoothed(a, w, i, j, k);
    for (int t = 0; t < (a.n == 3 ? 3 : 2); ++t) {
        if (t == axis) continue;
        long long e[3] = {0, 0, 0};
        e[t] = 1;
        double c0 = smoothed(a, w, i + e[0], j + e[1], k + e[2]) -
                    smoothed(a, w, i - e[0], j - e[1], k - e[2]);
        double c1 = smoothed(a, w, i + d[0] + e[0], j + d[1] + e[1], k + d[2] + e[2]) -
                    smoothed(a, w, i + d[0] - e[0], j + d[1] - e[1], k + d[2] - e[2]);
        g[t] = 0.25 * (c0 + c1);
    }
}

}  // namespace

double perimeter(const GridSet& a) {
    if (a.count() == 0) return 0.0;
    const int w = 2;
    double face_area = std::pow(a.h(), a.n - 1);
    double total = 0;
    long long mz = (a.n == 3) ? a.m : 1;
    for (long long k = 0; k < mz; ++k)
        for (long long j = 0; j < a.m; ++j)
            for (long long i = 0; i < a.m; ++i) {
                if (!a.at(i, j, k)) continue;
                for (int axis = 0; axis < a.n; ++axis) {
                    for (int sgn = -1; sgn <= 1; sgn += 2) {
                        long long d[3] = {0, 0, 0};
                        d[axis] = sgn;
                        if (a.at(i + d[0], j + d[1], k + d[2])) continue;
                        // gradient at the face, oriented so the forward
                        // difference crosses it
                        long long bi = i, bj = j, bk = k;
                        if (sgn < 0) {
                            bi += d[0];
                            bj += d[1];
                            bk += d[2];
                        }
                        double g[3];
                        face_gradient(a, w, bi, bj, bk, axis, g);
                        double norm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
                        double weight = norm > 0 ? std::fabs(g[axis]) / norm : 1.0;
                        total += face_area * weight;
                    }
                }
            }
    return total;
}

}  // namespace cantorlab
