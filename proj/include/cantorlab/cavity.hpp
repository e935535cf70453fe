#pragma once
#include <cstdint>
#include <functional>
#include <vector>

#include "cantorlab/jets.hpp"

namespace cantorlab {

// ---------------------------------------------------------------------------
// Binary occupancy mask over a cube box, m cells per axis, n in {2, 3}.
// Measures are exact cell counts times one cell volume; the set algebra
// stays on the shared grid so symmetric differences cost no geometry.
// ---------------------------------------------------------------------------
struct GridSet {
    int n = 2;
    int m = 0;
    double lo = -1.0, hi = 1.0;
    std::vector<std::uint8_t> mask;  // x fastest, size m^n

    static GridSet empty(int n, int m, double lo, double hi);
    // occupancy sampled at cell centers
    static GridSet from_indicator(int n, int m, double lo, double hi,
                                  const std::function<bool(const Vec&)>& inside);

    double h() const { return (hi - lo) / m; }
    double cell_vol() const;
    Vec cell_center(long long i, long long j, long long k = 0) const;
    long long idx(long long i, long long j, long long k = 0) const;
    bool at(long long i, long long j, long long k = 0) const;
    void set(long long i, long long j, long long k, bool v);
    void set2(long long i, long long j, bool v) { set(i, j, 0, v); }

    long long count() const;
    double measure() const { return (double)count() * cell_vol(); }
    bool same_grid(const GridSet& o) const;

    GridSet sym_diff(const GridSet& o) const;
    GridSet intersect(const GridSet& o) const;
    GridSet unite(const GridSet& o) const;
    GridSet complement() const;

    // run-length encoding with a small header; exact round trip
    std::vector<std::uint8_t> to_rle() const;
    static GridSet from_rle(const std::vector<std::uint8_t>& bytes);
};

struct SetMetrics {
    double vol_a = 0, vol_b = 0, sym = 0, inter = 0;
};
// exact cell counting on a shared grid; throws on grid mismatch
SetMetrics set_metrics(const GridSet& a, const GridSet& b);

// ---------------------------------------------------------------------------
// Perimeter of the occupied region in the whole space (box faces count).
// Interface extraction with a normal-aware correction: every exposed cell
// face contributes its area projected onto the local interface normal,
// estimated from a box-smoothed occupancy field. Raw face counting would
// converge to the anisotropic l1 perimeter instead; faces whose smoothed
// gradient vanishes (features thinner than the window) fall back to weight
// one, which is exact for axis-aligned slabs.
// ---------------------------------------------------------------------------
double perimeter(const GridSet& a);

}  // namespace cantorlab
