#pragma once
#include <vector>

#include "cantorlab/geometry.hpp"
#include "cantorlab/jets.hpp"

namespace cantorlab {

// ---------------------------------------------------------------------------
// g_k: pushes mass toward the corner Cantor set. Maps each generation-j
// primed cube onto its squeezed counterpart; affine with ratio rt_k/r_k on
// the deepest unprimed cubes, radial (sup-norm) interpolation with slope 2
// on every frame.
// ---------------------------------------------------------------------------

struct CellRef {
    VertexPath path;   // depth j >= 1
    bool core = false; // true: affine piece on the unprimed depth-k cube
};

struct CornerMap {
    Sequences seq;
    int k;  // stage

    // per-level doubles, index 0..k (primed entries at index 0 unused)
    std::vector<double> rd, rpd, rtd, rtpd;

    CornerMap(Sequences s, int stage);

    Vec forward(const Vec& x) const;
    Vec inverse(const Vec& y) const;
    Mat jet(const Vec& x) const;
    Mat jet_inverse(const Vec& y) const;
    double jac(const Vec& x) const;

    // closed-form evaluation on a named piece; valid on its closure, which is
    // what makes two-sided face continuity checks possible
    Vec forward_in_cell(const Vec& x, const CellRef& c) const;
    Mat jet_in_cell(const Vec& x, const CellRef& c) const;
    CellRef locate_cell(const Vec& x) const;  // which piece applies at x

    // frame profile rho_j: [r_j, r'_j] -> [rt_j, rt'_j], slope exactly 2
    double rho(int j, double m) const { return rtd[j] + 2.0 * (m - rd[j]); }
    double rho_inv(int j, double mt) const { return rd[j] + 0.5 * (mt - rtd[j]); }

    // corner / squeezed centers along a walk, in exact doubles
    Vec corner_center_d(const VertexPath& p) const;
    Vec tilde_center_d(const VertexPath& p) const;
};

// ---------------------------------------------------------------------------
// L_K: bi-Lipschitz rearrangement moving the squeezed corner family onto the
// tower chain. One normalized template acts inside every tower cube; stage
// j+1 is that template scaled into the generation-j tower cubes. The same
// template works at every depth because rt_j = rh_j (cube-to-slot moves are
// translations).
// ---------------------------------------------------------------------------

// increasing piecewise affine map of [-1,1] onto itself
struct PwAffine {
    std::vector<double> xs, ys;  // knots, strictly increasing, same size
    double eval(double x) const;
    double inv(double y) const;
    double slope_at(double x) const;       // right-continuous choice at knots
    double max_slope() const;
    double min_slope() const;
};

// One fiber stage: coordinate q moves by x_q -> (1-lam) x_q + lam f(x_q),
// lam = 1 - max_m clip((|x_m - c_m| - inner)/(outer_m - inner)) over the
// modulation coords. lam == 1 on the moved cube, 0 outside the support box.
struct FiberStage {
    int q;
    PwAffine f;
    struct ModCoord {
        int m;
        double c;
        double inner;
        double outer;
    };
    std::vector<ModCoord> mods;

    double lambda(const Vec& x) const;
    void lambda_grad(const Vec& x, double* lam, Vec* grad) const;
    Vec apply(const Vec& x) const;
    Vec invert(const Vec& y) const;
    Mat jet_at(const Vec& x) const;
};

// the normalized tower template: unit cube to unit cube, identity on the
// boundary, corner cubes of half-side 2^-(beta+1) to the slot column
struct TowerTemplate {
    int n;
    int beta;
    std::vector<FiberStage> stages;  // pistons first, then per-axis slides

    static TowerTemplate build(int n, int beta);
    Vec apply(const Vec& x) const;
    Vec invert(const Vec& y) const;
    Mat jet_at(const Vec& x) const;
    Mat jet_inverse_at(const Vec& y) const;
};

struct TowerMap {
    Sequences seq;
    int K;  // number of stages
    TowerTemplate tmpl;

    // per-level doubles: rh_j, and centers are accumulated on the fly
    std::vector<double> rhd;

    TowerMap(Sequences s, int stages);

    Vec forward(const Vec& x) const;
    Vec inverse(const Vec& y) const;
    Mat jet(const Vec& x) const;
    Mat jet_inverse(const Vec& y) const;

    // sup |DL| estimate (op norm) over a deterministic sample of the
    // template; stage independent, hence uniform in K
    double bilip_estimate(int samples_per_axis = 33) const;

    // deepest tilde cube containing x (depth, centers); used by the composite
    struct TildeWalk {
        int depth = 0;
        Vec ztilde;   // center of the deepest tilde cube
        Vec zhat;     // center of the matching tower cube
        VertexPath path;
    };
    TildeWalk walk_tilde(const Vec& x, int max_depth) const;
    struct TowerWalk {
        int depth = 0;
        Vec zhat;
        Vec ztilde;
        std::vector<int> slots;
    };
    TowerWalk walk_tower(const Vec& y, int max_depth) const;
};

}  // namespace cantorlab
