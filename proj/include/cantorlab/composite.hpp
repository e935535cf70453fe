#pragma once
#include <optional>
#include <vector>

#include "cantorlab/geometry.hpp"
#include "cantorlab/homeo.hpp"
#include "cantorlab/jets.hpp"
#include "cantorlab/tentacle.hpp"

namespace cantorlab {

// ---------------------------------------------------------------------------
// Stage-k composite: the squeeze tower conjugated by the corner map and the
// tower rearrangement. Off the width-d tube pullbacks the conjugating
// factors cancel, and the implementation returns inputs unchanged there, so
// "identity off the supports" holds to the last bit. Stage 0 is the
// identity map.
// ---------------------------------------------------------------------------
struct CompositeMap {
    Sequences seq{2, 3};
    int k = 0;
    const TentacleParams* par = nullptr;
    std::optional<CornerMap> g;
    std::optional<TowerMap> L;
    std::optional<SqueezeTower> h;

    static CompositeMap build(const Sequences& s, const TentacleParams& p, int stage);

    Vec forward(const Vec& x) const;
    Vec inverse(const Vec& y) const;
    Mat jet(const Vec& x) const;
    // product of factor determinants; det of the assembled jet is unusable
    // once the collar shear dominates its entries
    double jac(const Vec& x) const;
    // innermost generation whose width-d tube contains the conjugated input;
    // 0 when every factor cancels
    int support_gen(const Vec& x) const;
};

// ---------------------------------------------------------------------------
// Tower-side tube union at one generation: 2^{kn} head cubes plus the
// width-b bodies. The parts stay separate because their scales are usually
// too far apart for one canonical dyadic sum.
// ---------------------------------------------------------------------------
struct TubeSet {
    int k = 0;
    int n = 2;
    Dyadic heads;           // 2^{kn} (2 rh_k)^n
    Dyadic body;            // 2^{kn} C_k (2 b_k)^{n-1}; zero at stage 0
    Dyadic body_cap;        // 2^{kn} 2^n b_k^{n-1}, the body bound at C = 2
    Dyadic pullback_heads;  // 2^n alpha_k^n, exact volume of the head preimages
    bool body_ok = true;    // body <= body_cap, compared exactly at build

    double measure() const { return heads.to_double() + body.to_double(); }
    double bound() const;       // 2^{kn} (rh_k^n + b_k^{n-1})
    bool within_bound() const;  // measure <= 2^n bound, exact per part
    // next generation's union has at most half this measure, exact
    bool halves(const TubeSet& next) const;
};
TubeSet tube_set(const Sequences& s, const TentacleParams& p, int k);

// ---------------------------------------------------------------------------
// Tube-union measure against the volume the map provably keeps. image_grid
// is the total volume of grid cells certified to lie inside kept corner
// cubes (the map fixes those cubes pointwise), a lower bound for the image
// volume; image_exact is the exact volume of the kept cubes. A grid too
// coarse to certify generation-K cubes yields a refusal naming the smallest
// power-of-two resolution that works.
// ---------------------------------------------------------------------------
struct LusinRow {
    int k = 0;
    double tube_tower = 0;
    double image_grid = 0;
    double image_exact = 0;
    double ratio = 0;  // image_exact / tube_tower
    long long grid_cells = 0;
};
struct LusinReport {
    int grid = 0;
    bool refused = false;
    int required_grid = 0;
    std::vector<LusinRow> rows;  // k = 0..K
};
LusinReport lusin_report(const Sequences& s, const TentacleParams& p, int K, int grid);

// ---------------------------------------------------------------------------
// Difference integral between consecutive stages over the deepest tube
// pullbacks, exponent q <= n-1. Reported as an upper-bound measurement: the
// transverse collar profile is integrated in closed form against
// centerline-sampled factor jets, the off-rim jet variation is bounded by a
// mu-sampled sup, and elbow panels carry a speed-range factor. The value
// stays visible even when the width is below double range, because the
// critical-exponent shear moment is width-independent. q > n-1 makes the
// collar moment blow up as the inner cutoff shrinks and is refused.
// ---------------------------------------------------------------------------
struct CauchyRow {
    int k = 0;
    double q = 1;
    double value = 0;
    double rel_err = 0;  // quadrature refinement plus branch-sampling spread
    double support = 0;  // measured pullback volume of the width-d union
    double support_lo = 0, support_hi = 0;  // exact tube measure x jacobian range
    long long branches = 0, walked = 0;
};
// depth_cut limits the collar to log-depth u <= depth_cut, letting the
// measurement be cross-checked on a band that doubles resolve; the default
// integrates the full collar plus the core
CauchyRow cauchy_difference(const Sequences& s, const TentacleParams& p, int k, double q,
                            int lpanels = 64, int branch_cap = 64, double depth_cut = 1e300);

// ---------------------------------------------------------------------------
// Fixed-point audit: boundary lattice, the 2^n cube corners, every
// generation-k corner-cube center (strided past 4096), face centers of the
// first cubes, and pseudo-random interior points off the supports. Each
// sample must return to itself within tol.
// ---------------------------------------------------------------------------
struct FixedPointReport {
    long long samples = 0;
    long long violations = 0;
    double max_dev = 0;
};
FixedPointReport fixed_point_check(const Sequences& s, const TentacleParams& p, int k,
                                   int per_face, int interior, unsigned seed = 7,
                                   double tol = 1e-10);

// ---------------------------------------------------------------------------
// Measure conservation: integrate the composite jacobian over the cube by
// exact off-support accounting plus per-generation slab quadrature. The
// result must equal the cube volume 2^n up to the reported error.
// ---------------------------------------------------------------------------
struct MassReport {
    double mass = 0;
    double off_volume = 0;
    double rel_err = 0;
};
MassReport jacobian_mass(const Sequences& s, const TentacleParams& p, int k,
                         int lpanels = 48, int branch_cap = 64);

}  // namespace cantorlab
