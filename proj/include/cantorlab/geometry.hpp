#pragma once
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cantorlab/dyadic.hpp"

namespace cantorlab {

// Scale sequences for the Cantor constructions. beta is an integer >= n+1.
//
//   alpha_k = (1 + 2^-k*beta) / 2        (alpha_0 = 1)
//   beta_k  = 2^-k*beta                  (beta_0 = 1)
//   r_k     = 2^-k alpha_k               corner cube half-side
//   r'_k    = 2^-k alpha_{k-1}           primed (tiling) half-side, k >= 1
//   rt_k    = 2^-k beta_k                squeezed-image half-side
//   rt'_k   = 2^-k beta_{k-1}            k >= 1
//
// Tower half-sides coincide with the squeezed ones (rh = rt), which is what
// makes every stage of the tower map a translation on the cubes it moves.
struct Sequences {
    int n;
    int beta;

    Sequences(int n_, int beta_) : n(n_), beta(beta_) {}
    bool valid() const { return n >= 2 && beta >= n + 1; }

    Dyadic alpha(int k) const { return (Dyadic::from_int(1) + Dyadic::pow2(-(i128)k * beta)).half(); }
    Dyadic beta_pow(int k) const { return Dyadic::pow2(-(i128)k * beta); }
    Dyadic r(int k) const { return alpha(k).mul_pow2(-k); }
    Dyadic rp(int k) const { return alpha(k - 1).mul_pow2(-k); }
    Dyadic rt(int k) const { return Dyadic::pow2(-(i128)k * (beta + 1)); }
    Dyadic rtp(int k) const { return beta_pow(k - 1).mul_pow2(-k); }
    Dyadic rh(int k) const { return rt(k); }
    Dyadic rhp(int k) const { return rtp(k); }
};

// one generation step: vertex of {-1,+1}^n
using Vertex = std::array<int, 3>;

int vertex_index(const Vertex& v, int n);          // 0..2^n-1, lexicographic, -1 < +1
int slot_of_vertex(const Vertex& v, int n);        // w-bijection: 1..2^n
Vertex vertex_of_slot(int slot, int n);
double slot_pattern(int j, int n);                 // -1 + (2j-1)/2^n, j = 1..2^n
Dyadic slot_pattern_dyadic(int j, int n);

struct VertexPath {
    int n = 0;
    std::vector<Vertex> v;

    int depth() const { return (int)v.size(); }
    std::string to_string() const;  // "+++/-+-"
    static std::optional<VertexPath> parse(const std::string& s, int n);
    std::vector<int> slots() const;  // per-generation w-image
};

struct DPoint {
    std::vector<Dyadic> x;
    static DPoint zeros(int n);
    int dim() const { return (int)x.size(); }
};

struct Cube {
    DPoint center;
    Dyadic half;
    bool contains_closed(const DPoint& p) const;
};

// Geometry of one (n, beta) family: corner cubes, squeezed images, tower.
struct CantorGeometry {
    Sequences seq;
    static constexpr int kDefaultMaxGen = 8;

    explicit CantorGeometry(Sequences s) : seq(s) {}

    DPoint corner_center(const VertexPath& p) const;  // (1/2) sum r_{j-1} v_j
    DPoint tilde_center(const VertexPath& p) const;   // (1/2) sum rt_{j-1} v_j
    DPoint tower_center(const std::vector<int>& slots) const;  // sum rh_{j-1} vhat_{s_j}

    Cube corner_cube(const VertexPath& p) const;        // Q(z, r_k)
    Cube corner_cube_primed(const VertexPath& p) const; // Q(z, r'_k)
    Cube tilde_cube(const VertexPath& p) const;
    Cube tilde_cube_primed(const VertexPath& p) const;
    Cube tower_cube(const std::vector<int>& slots) const;
    Cube tower_cube_primed(const std::vector<int>& slots) const;

    // deepest generation whose closed (unprimed) corner cube contains p
    struct Locate {
        VertexPath path;   // depth 0 means only the root contains p
        bool inside_root = false;
    };
    Locate locate(const DPoint& p, int max_gen = kDefaultMaxGen) const;

    // per-cube frame volume at generation k: (2 r'_k)^n - (2 r_k)^n
    Dyadic generation_volume(int k) const;
    // total measure of the union of the 2^{kn} generation-k corner cubes
    Dyadic cantor_stage_volume(int k) const;

    // exact: root volume equals frames up to k plus stage-k remainder
    bool volume_identity_holds(int k) const;

    // slot cubes fit strictly inside their parent tower cube
    bool tower_valid() const;
};

}  // namespace cantorlab
