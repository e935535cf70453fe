#pragma once
#include <array>
#include <cmath>
#include <stdexcept>

namespace cantorlab {

// Dense n-vector / n x n matrix for n in {2, 3}. Everything by value; these
// are jet-sized objects, not linear algebra workloads.
struct Vec {
    int n = 0;
    std::array<double, 3> c{};

    static Vec zeros(int n) { return Vec{n, {}}; }
    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }

    Vec operator+(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < n; ++i) r.c[i] += o.c[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < n; ++i) r.c[i] -= o.c[i];
        return r;
    }
    Vec scaled(double s) const {
        Vec r = *this;
        for (int i = 0; i < n; ++i) r.c[i] *= s;
        return r;
    }
    double max_abs() const {
        double m = 0;
        for (int i = 0; i < n; ++i) m = std::max(m, std::fabs(c[i]));
        return m;
    }
    double dist_inf(const Vec& o) const { return (*this - o).max_abs(); }
};

struct Mat {
    int n = 0;
    std::array<double, 9> a{};  // row major, stride 3

    static Mat identity(int n) {
        Mat m{n, {}};
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
    static Mat diag(int n, double d0, double d1, double d2 = 1.0) {
        Mat m{n, {}};
        m.at(0, 0) = d0;
        m.at(1, 1) = d1;
        if (n > 2) m.at(2, 2) = d2;
        return m;
    }
    double& at(int i, int j) { return a[3 * i + j]; }
    double at(int i, int j) const { return a[3 * i + j]; }

    Mat mul(const Mat& o) const {
        Mat r{n, {}};
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                double v = at(i, k);
                if (v == 0.0) continue;
                for (int j = 0; j < n; ++j) r.at(i, j) += v * o.at(k, j);
            }
        return r;
    }
    Vec apply(const Vec& v) const {
        Vec r = Vec::zeros(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r.c[i] += at(i, j) * v.c[j];
        return r;
    }
    double det() const {
        if (n == 2) return at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
        return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
               at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
               at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
    }
    double frob() const {
        double s = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += at(i, j) * at(i, j);
        return std::sqrt(s);
    }
    // largest singular value: eigenvalues of A^T A (symmetric, closed forms)
    double op_norm() const {
        double g[3][3] = {};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0;
                for (int k = 0; k < n; ++k) s += at(k, i) * at(k, j);
                g[i][j] = s;
            }
        if (n == 2) {
            double tr = g[0][0] + g[1][1];
            double dt = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            double disc = std::sqrt(std::max(0.0, tr * tr / 4 - dt));
            return std::sqrt(std::max(0.0, tr / 2 + disc));
        }
        // symmetric 3x3 eigenvalue, trigonometric form
        double q = (g[0][0] + g[1][1] + g[2][2]) / 3.0;
        double b00 = g[0][0] - q, b11 = g[1][1] - q, b22 = g[2][2] - q;
        double p2 = b00 * b00 + b11 * b11 + b22 * b22 +
                    2 * (g[0][1] * g[0][1] + g[0][2] * g[0][2] + g[1][2] * g[1][2]);
        double p = std::sqrt(std::max(0.0, p2 / 6.0));
        if (p == 0.0) return std::sqrt(std::max(0.0, q));
        double detb = (b00 * (b11 * b22 - g[1][2] * g[1][2]) -
                       g[0][1] * (g[0][1] * b22 - g[1][2] * g[0][2]) +
                       g[0][2] * (g[0][1] * g[1][2] - b11 * g[0][2]));
        double r = detb / (2 * p * p * p);
        r = std::max(-1.0, std::min(1.0, r));
        double phi = std::acos(r) / 3.0;
        double lmax = q + 2 * p * std::cos(phi);
        return std::sqrt(std::max(0.0, lmax));
    }
    Mat inverse() const {
        double d = det();
        if (d == 0.0) throw std::logic_error("singular matrix");
        Mat r{n, {}};
        if (n == 2) {
            r.at(0, 0) = at(1, 1) / d;
            r.at(0, 1) = -at(0, 1) / d;
            r.at(1, 0) = -at(1, 0) / d;
            r.at(1, 1) = at(0, 0) / d;
            return r;
        }
        r.at(0, 0) = (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) / d;
        r.at(0, 1) = (at(0, 2) * at(2, 1) - at(0, 1) * at(2, 2)) / d;
        r.at(0, 2) = (at(0, 1) * at(1, 2) - at(0, 2) * at(1, 1)) / d;
        r.at(1, 0) = (at(1, 2) * at(2, 0) - at(1, 0) * at(2, 2)) / d;
        r.at(1, 1) = (at(0, 0) * at(2, 2) - at(0, 2) * at(2, 0)) / d;
        r.at(1, 2) = (at(0, 2) * at(1, 0) - at(0, 0) * at(1, 2)) / d;
        r.at(2, 0) = (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0)) / d;
        r.at(2, 1) = (at(0, 1) * at(2, 0) - at(0, 0) * at(2, 1)) / d;
        r.at(2, 2) = (at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0)) / d;
        return r;
    }
    Mat sub(const Mat& o) const {
        Mat r = *this;
        for (int i = 0; i < 9; ++i) r.a[i] -= o.a[i];
        return r;
    }
};

}  // namespace cantorlab
