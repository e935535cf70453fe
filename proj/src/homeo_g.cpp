#include <cmath>
#include <stdexcept>

#include "cantorlab/homeo.hpp"

namespace cantorlab {

CornerMap::CornerMap(Sequences s, int stage) : seq(s), k(stage) {
    rd.resize(k + 1);
    rpd.resize(k + 1);
    rtd.resize(k + 1);
    rtpd.resize(k + 1);
    for (int j = 0; j <= k; ++j) {
        rd[j] = seq.r(j).to_double();
        rtd[j] = seq.rt(j).to_double();
        if (j >= 1) {
            rpd[j] = seq.rp(j).to_double();
            rtpd[j] = seq.rtp(j).to_double();
        }
    }
}

Vec CornerMap::corner_center_d(const VertexPath& p) const {
    Vec z = Vec::zeros(seq.n);
    for (int j = 1; j <= p.depth(); ++j)
        for (int i = 0; i < seq.n; ++i) z[i] += 0.5 * rd[j - 1] * p.v[j - 1][i];
    return z;
}

Vec CornerMap::tilde_center_d(const VertexPath& p) const {
    Vec z = Vec::zeros(seq.n);
    for (int j = 1; j <= p.depth(); ++j)
        for (int i = 0; i < seq.n; ++i) z[i] += 0.5 * rtd[j - 1] * p.v[j - 1][i];
    return z;
}

CellRef CornerMap::locate_cell(const Vec& x) const {
    CellRef c;
    c.path.n = seq.n;
    Vec z = Vec::zeros(seq.n);
    for (int j = 1; j <= k; ++j) {
        Vertex v{};
        for (int i = 0; i < seq.n; ++i) v[i] = x[i] >= z[i] ? 1 : -1;
        c.path.v.push_back(v);
        for (int i = 0; i < seq.n; ++i) z[i] += 0.5 * rd[j - 1] * v[i];
        double m = (x - z).max_abs();
        if (m > rd[j]) return c;  // frame of generation j
        // inside the unprimed cube; descend unless this is the last stage
        if (j == k) {
            c.core = true;
            return c;
        }
    }
    return c;  // not reached
}

Vec CornerMap::forward_in_cell(const Vec& x, const CellRef& c) const {
    int j = c.path.depth();
    Vec z = corner_center_d(c.path);
    Vec zt = tilde_center_d(c.path);
    Vec w = x - z;
    if (c.core) return zt + w.scaled(rtd[j] / rd[j]);
    double m = w.max_abs();
    if (m == 0.0) throw std::logic_error("frame cell does not contain its center");
    return zt + w.scaled(rho(j, m) / m);
}

Mat CornerMap::jet_in_cell(const Vec& x, const CellRef& c) const {
    int j = c.path.depth();
    if (c.core) {
        double s = rtd[j] / rd[j];
        return Mat::diag(seq.n, s, s, s);
    }
    Vec z = corner_center_d(c.path);
    Vec w = x - z;
    double m = w.max_abs();
    int att = 0;
    for (int i = 0; i < seq.n; ++i)
        if (std::fabs(w[i]) == m) {
            att = i;
            break;
        }
    double sgn = w[att] >= 0 ? 1.0 : -1.0;
    double rh = rho(j, m);
    Mat D = Mat::identity(seq.n);
    for (int i = 0; i < seq.n; ++i) D.at(i, i) = rh / m;
    // d(rho(m)/m)/dm = (2m - rho)/m^2, times dm/dx_att = sgn
    for (int i = 0; i < seq.n; ++i) D.at(i, att) += sgn * w[i] * (2.0 * m - rh) / (m * m);
    return D;
}

Vec CornerMap::forward(const Vec& x) const {
    if (x.max_abs() > 1.0) return x;
    return forward_in_cell(x, locate_cell(x));
}

Mat CornerMap::jet(const Vec& x) const {
    if (x.max_abs() > 1.0) return Mat::identity(seq.n);
    return jet_in_cell(x, locate_cell(x));
}

double CornerMap::jac(const Vec& x) const { return jet(x).det(); }

Vec CornerMap::inverse(const Vec& y) const {
    if (y.max_abs() > 1.0) return y;
    Vec zt = Vec::zeros(seq.n);
    Vec z = Vec::zeros(seq.n);
    for (int j = 1; j <= k; ++j) {
        Vertex v{};
        for (int i = 0; i < seq.n; ++i) v[i] = y[i] >= zt[i] ? 1 : -1;
        for (int i = 0; i < seq.n; ++i) {
            zt[i] += 0.5 * rtd[j - 1] * v[i];
            z[i] += 0.5 * rd[j - 1] * v[i];
        }
        Vec w = y - zt;
        double mt = w.max_abs();
        if (mt > rtd[j]) {
            // squeezed frame of generation j
            double m = rho_inv(j, mt);
            return z + w.scaled(m / mt);
        }
        if (j == k) return z + w.scaled(rd[j] / rtd[j]);
    }
    return y;  // not reached
}

Mat CornerMap::jet_inverse(const Vec& y) const {
    if (y.max_abs() > 1.0) return Mat::identity(seq.n);
    Vec zt = Vec::zeros(seq.n);
    for (int j = 1; j <= k; ++j) {
        Vertex v{};
        for (int i = 0; i < seq.n; ++i) v[i] = y[i] >= zt[i] ? 1 : -1;
        for (int i = 0; i < seq.n; ++i) zt[i] += 0.5 * rtd[j - 1] * v[i];
        Vec w = y - zt;
        double mt = w.max_abs();
        if (mt > rtd[j]) {
            double m = rho_inv(j, mt);
            int att = 0;
            for (int i = 0; i < seq.n; ++i)
                if (std::fabs(w[i]) == mt) {
                    att = i;
                    break;
                }
            double sgn = w[att] >= 0 ? 1.0 : -1.0;
            Mat D = Mat::identity(seq.n);
            for (int i = 0; i < seq.n; ++i) D.at(i, i) = m / mt;
            // d(rho^-1(mt)/mt)/dmt = (mt/2 - m)/mt^2
            for (int i = 0; i < seq.n; ++i)
                D.at(i, att) += sgn * w[i] * (0.5 * mt - m) / (mt * mt);
            return D;
        }
        if (j == k) {
            double s = rd[j] / rtd[j];
            return Mat::diag(seq.n, s, s, s);
        }
    }
    return Mat::identity(seq.n);
}

}  // namespace cantorlab
