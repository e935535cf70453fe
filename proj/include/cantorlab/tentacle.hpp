#pragma once
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cantorlab/geometry.hpp"
#include "cantorlab/jets.hpp"

namespace cantorlab {

// Dyadic rational bounds on pi, for exact route inequalities that involve
// elbow arc lengths. 201/64 < pi < 3217/1024.
Dyadic pi_lo_dyadic();
Dyadic pi_hi_dyadic();

// ---------------------------------------------------------------------------
// Axis lengths. a_k / c_k are the unprimed / primed tentacle endpoints,
// atil/ctil the squeezed-image extents. A = a - rh_k and C = c - rh_k are the
// same lengths in chart coordinates (measured from the head face along the
// centerline). c_k = a_{k-1} and c_k - a_k = rh_{k+2} exactly.
// ---------------------------------------------------------------------------
struct TentacleAxis {
    Dyadic a, c, atil, ctil;
    Dyadic A, C;
};
TentacleAxis axis_params(const Sequences& s, int k);

// ---------------------------------------------------------------------------
// Width tuner. For each generation it picks
//   N_k = log2(d_k/b_k), a power of two, from the collar-shear budget
//         (the shear integral is d-independent: log collar profile),
//   d_k = the largest power of two passing every cap below (equivalently:
//         seed min(rh_k, 8^-k)/4, halve until all caps hold),
//   b_k = d_k 2^{-N_k}.
// Caps on d_k (named in reports):
//   bulk     transverse-identity mass  n (2d)^{n-1} C_k 2^{kn} <= delta_k/4
//   tail     tail-piece mass           <= delta_k 2^{-k-2}
//   hard     d <= rh_k / 4
//   station  d <= 2^{-n-5} rh_{k-1}    (elbow boxes clear the stations)
//   routing  d <= 2^{-n-1} b_{k-1}     (k >= 2; child rides the parent core)
// The budget is delta_k = 2^{-k beta (2n-1)} / k^2. At n = 2 the collar shear
// has a profile-independent floor (integral of mu' over the collar is 1 for
// any monotone profile), so no width choice meets delta_k; the tuner then
// reports achieved = false together with the computed floor.
// ---------------------------------------------------------------------------
struct WidthCaps {
    i128 bulk = 0, tail = 0, hard = 0, station = 0;
    bool has_routing = false;
    i128 routing = 0;
    i128 binding = 0;
    std::string binding_name;
};

struct GenWidths {
    int k = 0;
    Dyadic d, b;
    double N = 0;      // power of two, exact as a double
    double delta = 0;
    WidthCaps caps;
};

struct EnergyTerms {
    // closed-form upper bounds on the generation-k squeeze energy
    // (all 2^{kn} tentacles included), split by source
    double shear_first = 0, shear_tail = 0;
    double diag_first = 0, diag_tail = 0;
    double bulk = 0;
    double elbow_slop = 0;
    double floor_lower = 0;  // n = 2 only: profile-independent lower bound
    double delta = 0;
    bool achieved = false;
    double total() const { return shear_first + shear_tail + diag_first + diag_tail + bulk + elbow_slop; }
};

struct TentacleParams {
    Sequences seq{2, 3};
    int K = 0;
    std::vector<TentacleAxis> ax;     // index 1..K (0 unused)
    std::vector<GenWidths> w;         // index 1..K
    std::vector<EnergyTerms> energy;  // index 1..K
    bool all_achieved = false;

    const TentacleAxis& axis(int k) const { return ax[(size_t)k]; }
    const GenWidths& widths(int k) const { return w[(size_t)k]; }

    // chart-scale doubles (subatomic widths collapse to 0.0, by design)
    double dd(int k) const { return w[(size_t)k].d.to_double(); }
    double bd(int k) const { return w[(size_t)k].b.to_double(); }
    double Ad(int k) const { return ax[(size_t)k].A.to_double(); }
    double Cd(int k) const { return ax[(size_t)k].C.to_double(); }
    double rhd(int k) const { return seq.rh(k).to_double(); }
    double lam(int k) const { return rhd(k) / Ad(k); }
    double Lam(int k) const { return (Cd(k) - rhd(k)) / (Cd(k) - Ad(k)); }
};

// K beyond the exponent range of the width chain throws std::runtime_error.
int max_stage(const Sequences& s);
TentacleParams autotune_widths(const Sequences& s, int K);

// recompute the generation-k energy bound for given widths
EnergyTerms energy_upper_bound(const Sequences& s, const TentacleParams& p, int k);

// every hard width constraint, re-checkable after edits; empty result = valid.
// d_override, if nonzero, replaces d_k (tightness witness: doubled d must fail).
std::vector<std::string> check_width_constraints(const Sequences& s, const TentacleParams& p,
                                                 int k, const Dyadic& d_override = Dyadic());

// ---------------------------------------------------------------------------
// Routed charts. Generation 1 runs straight out of its head along +e1 at
// height pat(s_1). A generation-k hop (k >= 2) lives in the parent head:
// stub along +e1 at height pat*rh_{k-1}, quarter-annulus elbow (radius
// R = 2 d_k), vertical run at station X = rh_{k-1}(1/2 + rank 2^{-n-2}),
// second elbow, corridor at height sigma = pat*b_{k-1} out through the
// parent face, after which the chart continues into the parent's own chart
// with the transverse turn coordinate offset by sigma. All turns happen in
// the (e1, e_n) plane, so transverse frames never rotate between hops.
// Chart length of a full generation-k tentacle is exactly C_k.
// ---------------------------------------------------------------------------
struct ChartPiece {
    bool elbow = false;
    double l0 = 0, l1 = 0;
    // straight
    Vec base;     // centerline position at l0 (parent-local)
    Vec axis;     // unit tangent
    Vec turndir;  // direction of the turn-plane transverse coordinate
    // elbow
    Vec pivot;
    Vec u0, u1;  // radial directions at entry / exit
    double R = 0;
    int sr = 0;  // radius = R + sr * t_turn
};

struct LocalRoute {
    int k = 1;
    int slot = 0;
    double l_face = 0;  // chart length of the hop (k >= 2); C_k for k == 1
    double sigma = 0;
    std::vector<ChartPiece> pieces;
};
LocalRoute build_route(const Sequences& s, const TentacleParams& p, int k, int slot);

// exact hop length: rh_{k-1} - rh_k + |pat| (rh_{k-1} - b_{k-1}) + (2pi-8) d_k
double l_face_d(const Sequences& s, const TentacleParams& p, int k, int slot);

struct TentacleChart {
    Sequences seq{2, 3};
    const TentacleParams* par = nullptr;
    std::vector<int> slots;       // s_1..s_k
    std::vector<LocalRoute> hops; // hops[j-1] = generation-j hop
    std::vector<Vec> zh;          // zh[j] = tower center at depth j (zh[0] = 0)
    double l_total = 0;           // == C_k

    static TentacleChart build(const Sequences& s, const TentacleParams& p,
                               const std::vector<int>& slots);
    int gen() const { return (int)slots.size(); }
    // t carries the n-1 transverse coordinates in c[0..n-2]; c[n-2] is the
    // turn-plane coordinate
    Vec eval(double l, const Vec& t) const;
    // orthonormal frame Q at (l, t) and the elbow speed (DPhi = Q diag(s,1,..))
    Mat frame(double l, const Vec& t, double* speed) const;
    // chart coordinates if x lies in the open tube of half-width w
    std::optional<std::pair<double, Vec>> locate(const Vec& x, double w) const;
};

// chart coordinates of x in some generation-k primed tube, with its branch
struct TubeHit {
    std::vector<int> slots;
    double l = 0;
    Vec t;
};
std::optional<TubeHit> locate_tube(const Sequences& s, const TentacleParams& p,
                                   int k, const Vec& x);

// ---------------------------------------------------------------------------
// Regions for set-level checks and reports. Own-route pieces are covered by
// exact axis-aligned boxes (elbows by their hull boxes); the continuation
// through ancestor tubes is kept symbolic (ride_*). Exact box coordinates
// are only materialized when the width is within kMaxAlignBits of the head
// scale (always true at n = 2; at n = 3 the k >= 2 widths are too far below
// the head scale for canonical dyadic sums, and the nesting report falls
// back to the same inequalities in product form).
// ---------------------------------------------------------------------------
struct DyBox {
    std::vector<Dyadic> lo, hi;  // per-axis closed box
    bool contains(const DyBox& inner) const;
    bool disjoint_interiors(const DyBox& other) const;
};

struct TentacleRegion {
    int k = 0;
    std::vector<int> slots;
    bool squeezed = false, primed = false;
    Cube head;
    Dyadic body_volume;        // exact: (chart length) x (2w)^{n-1}
    double axis_extent = 0;    // max (x1 - head-center x1) over the region
    double ball_radius = 0;    // max euclidean distance from the head center
    bool boxes_exact = false;  // own-route boxes materialized
    std::vector<DyBox> boxes;  // parent-local own-route cover (k >= 2) or body (k == 1)
};
TentacleRegion tentacle_region(const Sequences& s, const TentacleParams& p,
                               const std::vector<int>& slots, bool squeezed, bool primed);

struct NestReport {
    int K = 0;
    bool pass = false;
    std::vector<std::string> violations;
    int box_checks = 0;
    int ineq_checks = 0;
    int disjoint_pairs = 0;
};
NestReport verify_nesting(const Sequences& s, const TentacleParams& p, int K);

// ---------------------------------------------------------------------------
// The squeeze. tau_k reparametrizes each generation-k primed tube along its
// chart: l' = l + mu(|t|_inf) (S(l) - l) with S piecewise affine
// [0,A,C] -> [0,rh,C] and mu the log collar profile (1 on the core, 0 at the
// tube wall). h_k = h_{k-1} o tau_k; identity everywhere else. The map is
// exact on cores (mu = 1) and the collar inverse is exact in l because m is
// preserved.
// ---------------------------------------------------------------------------
struct SqueezeProfile {
    double A = 0, C = 0, rh = 0, lam = 0, Lam = 0;
    double d = 0, b = 0, N = 0, L = 0;  // L = N ln 2

    static SqueezeProfile make(const TentacleParams& p, int k);
    double S(double l) const;
    double S_inv(double lp) const;
    double S_slope(double l) const;
    double mu(double m) const;        // in [0,1]
    double mu_slope(double m) const;  // derivative in m (<= 0), 0 outside (b,d)
    double fwd(double l, double m) const;
    double inv(double lp, double m) const;
};

struct SqueezeTower {
    Sequences seq{2, 3};
    const TentacleParams* par = nullptr;
    int k = 0;  // applies tau_k, ..., tau_1

    SqueezeTower(const Sequences& s, const TentacleParams& p, int stage)
        : seq(s), par(&p), k(stage) {}

    Vec forward(const Vec& y) const;
    Vec inverse(const Vec& z) const;
    Mat jet(const Vec& y) const;  // identity off the tubes
    double jac(const Vec& y) const;
    // generation of the innermost tube containing y, 0 if none
    int support_gen(const Vec& y) const;
};

// energy of one stage map over its own generation's tubes
struct SqueezeEnergy {
    double value = 0;       // upper bound for exponent q
    double core_exact = 0;  // exact piecewise-constant part
    double rel_err = 0;     // quadrature error estimate where quadrature ran
    bool quadrature = false;
};
SqueezeEnergy squeeze_energy(const Sequences& s, const TentacleParams& p, int k, double q);

// stage-local straight-part integrals of |Dtau_k|^{n-1} over the
// generation-k tubes: exact closed form (n = 3 only) and quadrature
// (visible widths only), for cross-checking the bound machinery
double stage_local_energy_exact(const Sequences& s, const TentacleParams& p, int k);
double stage_local_energy_quad(const Sequences& s, const TentacleParams& p, int k,
                               double q, double* rel_err);

// per-generation tube measure 2^{kn} C_k (2w)^{n-1}, exact
Dyadic tube_measure(const Sequences& s, const TentacleParams& p, int k, bool primed);

}  // namespace cantorlab
