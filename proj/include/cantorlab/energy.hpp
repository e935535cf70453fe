#pragma once
#include <functional>
#include <string>
#include <vector>

#include "cantorlab/cavity.hpp"
#include "cantorlab/composite.hpp"

namespace cantorlab {

// pointwise integrand for the jacobian term; throws domain_error at t <= 0
using PhiFn = std::function<double(double)>;

// ---------------------------------------------------------------------------
// Convex jacobian integrand: c0 + lambda0 log(1/t) below 1, c0 plus a
// piecewise-linear convex ramp above. eval is positive everywhere, blows up
// at 0 when lambda0 > 0, and grows superlinearly when the slopes increase
// without bound.
// ---------------------------------------------------------------------------
struct OrliczFunction {
    double lambda0 = 0;
    double c0 = 1;
    std::vector<double> knots;   // strictly increasing, first entry 1
    std::vector<double> slopes;  // one per knot, non-decreasing

    double eval(double t) const;
    std::string to_json() const;
    static OrliczFunction from_json(const std::string& text);
};

struct OrliczCheck {
    bool convex = false;
    bool blowup = false;       // phi(10^-j) strictly increasing in j
    bool superlinear = false;  // phi(10^j)/10^j strictly increasing in j
    bool all() const { return convex && blowup && superlinear; }
};
// slope monotonicity on a log grid, with the blow-up and superlinearity
// probes at decade points
OrliczCheck check_orlicz(const PhiFn& phi);

// ---------------------------------------------------------------------------
// Weighted jacobian distribution: exact atoms from affine cells plus binned
// quadrature cells carrying a certified [jlo, jhi] range. Masses are domain
// volumes; value * vol sums to the image volume.
// ---------------------------------------------------------------------------
struct JacBin {
    double value = 0;
    double jlo = 0, jhi = 0;
    double vol = 0;
};
struct JacobianHistogram {
    std::string label;
    int n = 2;
    double domain_vol = 0;
    std::vector<JacBin> atoms;
    std::vector<JacBin> bins;

    double total_vol() const;
    double image_mass() const;
    double jmin() const;
    double jmax() const;
    bool conserved(double rel = 1e-6) const;
};

// corner map: one exact core atom plus exact per-generation frame shells
// (the sup-norm radial jacobian depends only on the shell radius)
JacobianHistogram jacobian_histogram(const CornerMap& g, int resolution = 64);
// composite stage k: the identity atom off the tube pullbacks plus walked
// band elements per generation; rim_pad widens the certified ranges by the
// off-centerline allowance
JacobianHistogram jacobian_histogram(const Sequences& s, const TentacleParams& p, int k,
                                     int lpanels = 48, int branch_cap = 64,
                                     double rim_pad = 0.25);

// ---------------------------------------------------------------------------
// Empirical measure-distortion moduli. phi_hat(s) is the least image volume
// any measurable set of volume s can have, psi_hat(s) the largest: sorting
// the histogram by jacobian value and filling from the extreme end is exact
// for piecewise-constant jacobians, and the certified bin ranges make both
// curves conservative otherwise.
// ---------------------------------------------------------------------------
struct DistortionModuli {
    double total_vol = 0;
    std::vector<double> lo_vol, lo_img;  // cumulative, ascending jlo
    std::vector<double> hi_vol, hi_img;  // cumulative, descending jhi

    double phi_hat(double s) const;
    double psi_hat(double s) const;
};
DistortionModuli distortion_moduli(const JacobianHistogram& h);

// ---------------------------------------------------------------------------
// Energy of a map: the Dirichlet part at exponent p, the jacobian integrand
// part, and an optional perimeter term for the cavity variant.
// ---------------------------------------------------------------------------
struct EnergyReport {
    double p = 0;
    double dirichlet = 0;       // integral |Df|^p
    double orlicz = 0;          // integral phi(J)
    double perimeter_term = 0;  // a * P(cavity)
    double total = 0;
    double rel_err = 0;
};

// x -> c x on an axis box of volume vol; closed form
EnergyReport energy_affine(int n, double c, double vol, double p, const PhiFn& phi);

// composite stage k on (-1,1)^n. The Dirichlet part off the tube pullbacks
// is exact; on the bands it is the collar-moment upper-bound measurement.
// Pass a cavity set to add the a P(A) term of the cavity energy; a nonzero
// weight requires the set.
EnergyReport energy_composite(const Sequences& s, const TentacleParams& p, int k, double pexp,
                              const PhiFn& phi, double a = 0, const GridSet* cavity = nullptr,
                              int lpanels = 48, int branch_cap = 64);

// ---------------------------------------------------------------------------
// de-la-Vallee-Poussin-style construction: slope levels chosen so the sup
// over the family of the theta-weighted image mass stays bounded, plus a
// logarithmic blow-up weight calibrated so the family's sub-unit mass
// contributes at most 1.
// ---------------------------------------------------------------------------
OrliczFunction build_orlicz(const std::vector<JacobianHistogram>& family);
// sup over the family of sum phi(J) vol, the bound the construction promises
double orlicz_family_sup(const OrliczFunction& phi,
                         const std::vector<JacobianHistogram>& family);

}  // namespace cantorlab
