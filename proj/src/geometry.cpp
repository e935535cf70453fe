#include "cantorlab/geometry.hpp"

#include <stdexcept>

namespace cantorlab {

int vertex_index(const Vertex& v, int n) {
    int idx = 0;
    for (int i = 0; i < n; ++i) idx = (idx << 1) | (v[i] > 0 ? 1 : 0);
    return idx;
}

int slot_of_vertex(const Vertex& v, int n) { return vertex_index(v, n) + 1; }

Vertex vertex_of_slot(int slot, int n) {
    int idx = slot - 1;
    Vertex v{};
    for (int i = 0; i < n; ++i) v[i] = (idx >> (n - 1 - i)) & 1 ? 1 : -1;
    return v;
}

double slot_pattern(int j, int n) { return -1.0 + (2.0 * j - 1.0) / (1 << n); }

Dyadic slot_pattern_dyadic(int j, int n) {
    return Dyadic::from_int(2 * j - 1).mul_pow2(-n) - Dyadic::from_int(1);
}

std::string VertexPath::to_string() const {
    std::string s;
    for (int j = 0; j < depth(); ++j) {
        if (j) s += '/';
        for (int i = 0; i < n; ++i) s += v[j][i] > 0 ? '+' : '-';
    }
    return s;
}

std::optional<VertexPath> VertexPath::parse(const std::string& s, int n) {
    VertexPath p;
    p.n = n;
    if (s.empty()) return p;
    Vertex cur{};
    int i = 0;
    for (char c : s) {
        if (c == '/') {
            if (i != n) return std::nullopt;
            p.v.push_back(cur);
            i = 0;
            continue;
        }
        if (i >= n || (c != '+' && c != '-')) return std::nullopt;
        cur[i++] = c == '+' ? 1 : -1;
    }
    if (i != n) return std::nullopt;
    p.v.push_back(cur);
    return p;
}

std::vector<int> VertexPath::slots() const {
    std::vector<int> s;
    s.reserve(v.size());
    for (const auto& vj : v) s.push_back(slot_of_vertex(vj, n));
    return s;
}

DPoint DPoint::zeros(int n) {
    DPoint p;
    p.x.assign(n, Dyadic{});
    return p;
}

bool Cube::contains_closed(const DPoint& p) const {
    for (int i = 0; i < p.dim(); ++i) {
        if ((p.x[i] - center.x[i]).abs() > half) return false;
    }
    return true;
}

DPoint CantorGeometry::corner_center(const VertexPath& p) const {
    DPoint z = DPoint::zeros(seq.n);
    for (int j = 1; j <= p.depth(); ++j) {
        Dyadic step = seq.r(j - 1).half();
        for (int i = 0; i < seq.n; ++i)
            z.x[i] = z.x[i] + (p.v[j - 1][i] > 0 ? step : step.neg());
    }
    return z;
}

DPoint CantorGeometry::tilde_center(const VertexPath& p) const {
    DPoint z = DPoint::zeros(seq.n);
    for (int j = 1; j <= p.depth(); ++j) {
        Dyadic step = seq.rt(j - 1).half();
        for (int i = 0; i < seq.n; ++i)
            z.x[i] = z.x[i] + (p.v[j - 1][i] > 0 ? step : step.neg());
    }
    return z;
}

DPoint CantorGeometry::tower_center(const std::vector<int>& slots) const {
    DPoint z = DPoint::zeros(seq.n);
    for (int j = 1; j <= (int)slots.size(); ++j) {
        Dyadic step = seq.rh(j - 1);
        z.x[seq.n - 1] = z.x[seq.n - 1] + step.mul(slot_pattern_dyadic(slots[j - 1], seq.n));
    }
    return z;
}

Cube CantorGeometry::corner_cube(const VertexPath& p) const {
    return Cube{corner_center(p), seq.r(p.depth())};
}
Cube CantorGeometry::corner_cube_primed(const VertexPath& p) const {
    if (p.depth() < 1) throw std::logic_error("primed cube needs depth >= 1");
    return Cube{corner_center(p), seq.rp(p.depth())};
}
Cube CantorGeometry::tilde_cube(const VertexPath& p) const {
    return Cube{tilde_center(p), seq.rt(p.depth())};
}
Cube CantorGeometry::tilde_cube_primed(const VertexPath& p) const {
    if (p.depth() < 1) throw std::logic_error("primed cube needs depth >= 1");
    return Cube{tilde_center(p), seq.rtp(p.depth())};
}
Cube CantorGeometry::tower_cube(const std::vector<int>& slots) const {
    return Cube{tower_center(slots), seq.rh((int)slots.size())};
}
Cube CantorGeometry::tower_cube_primed(const std::vector<int>& slots) const {
    if (slots.empty()) throw std::logic_error("primed cube needs depth >= 1");
    return Cube{tower_center(slots), seq.rhp((int)slots.size())};
}

CantorGeometry::Locate CantorGeometry::locate(const DPoint& p, int max_gen) const {
    Locate res;
    res.path.n = seq.n;
    Cube root{DPoint::zeros(seq.n), seq.r(0)};
    res.inside_root = root.contains_closed(p);
    if (!res.inside_root) return res;
    DPoint z = DPoint::zeros(seq.n);
    for (int k = 1; k <= max_gen; ++k) {
        bool found = false;
        // scan in lexicographic index order so a face tie resolves to the
        // smallest index (corner cubes of one generation are disjoint, so
        // this is belt and braces)
        for (int idx = 0; idx < (1 << seq.n) && !found; ++idx) {
            Vertex v = vertex_of_slot(idx + 1, seq.n);
            DPoint zc = z;
            Dyadic step = seq.r(k - 1).half();
            for (int i = 0; i < seq.n; ++i)
                zc.x[i] = zc.x[i] + (v[i] > 0 ? step : step.neg());
            if (Cube{zc, seq.r(k)}.contains_closed(p)) {
                res.path.v.push_back(v);
                z = zc;
                found = true;
            }
        }
        if (!found) break;
    }
    return res;
}

Dyadic CantorGeometry::generation_volume(int k) const {
    return seq.rp(k).mul_pow2(1).pow(seq.n) - seq.r(k).mul_pow2(1).pow(seq.n);
}

Dyadic CantorGeometry::cantor_stage_volume(int k) const {
    return seq.r(k).mul_pow2(1).pow(seq.n).mul_pow2((i128)k * seq.n);
}

bool CantorGeometry::volume_identity_holds(int k) const {
    Dyadic total = Dyadic::pow2(seq.n);  // (2 r_0)^n
    Dyadic acc = cantor_stage_volume(k);
    for (int j = 1; j <= k; ++j)
        acc = acc + generation_volume(j).mul_pow2((i128)j * seq.n);
    return acc == total;
}

bool CantorGeometry::tower_valid() const {
    // beta_k > 2^n beta_{k+1}, i.e. slots of one generation can hold the next
    if (!(seq.beta_pow(1) > seq.beta_pow(2).mul_pow2(seq.n))) return false;
    // ratio rho = rh_k / rh_{k-1} = 2^-(beta+1) is generation independent;
    // slot cubes sit strictly inside the parent even at the extreme pattern
    // +-(1 - 2^-n) ...
    Dyadic rho = seq.rh(1);
    if (!(rho < Dyadic::pow2(-seq.n))) return false;
    // ... and adjacent slot centers (2^{1-n} apart in parent units) leave a
    // gap between cubes of half-side rho
    return rho.mul_pow2(1) < Dyadic::pow2(1 - seq.n);
}

}  // namespace cantorlab
