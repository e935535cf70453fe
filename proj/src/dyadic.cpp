#include "cantorlab/dyadic.hpp"

#include <cmath>
#include <stdexcept>

namespace cantorlab {

std::string i128_to_string(i128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? (unsigned __int128)(-(v + 1)) + 1 : (unsigned __int128)v;
    std::string s;
    while (u) {
        s.insert(s.begin(), char('0' + (int)(u % 10)));
        u /= 10;
    }
    return neg ? "-" + s : s;
}

static Dyadic canonical(int sign, BigUint mag, i128 exp) {
    if (sign == 0 || mag.is_zero()) return Dyadic{};
    uint64_t tz = mag.trailing_zeros();
    if (tz) mag = mag.shr(tz);
    Dyadic d;
    d.sign = sign;
    d.mant = std::move(mag);
    d.exp = exp + (i128)tz;
    return d;
}

Dyadic Dyadic::from_int(long long v) { return from_mant_exp(v, 0); }

Dyadic Dyadic::from_mant_exp(long long m, i128 e) {
    if (m == 0) return Dyadic{};
    int sign = m > 0 ? 1 : -1;
    uint64_t mag = m > 0 ? (uint64_t)m : (uint64_t)(-(m + 1)) + 1;
    return canonical(sign, BigUint::from_u64(mag), e);
}

Dyadic Dyadic::pow2(i128 e) { return from_mant_exp(1, e); }

std::optional<Dyadic> Dyadic::from_double(double v) {
    if (!std::isfinite(v)) return std::nullopt;
    if (v == 0.0) return Dyadic{};
    int e2 = 0;
    double m = std::frexp(v, &e2);          // |m| in [0.5, 1)
    long long mi = (long long)std::ldexp(m, 53);  // integer, |mi| < 2^53
    return from_mant_exp(mi, (i128)e2 - 53);
}

Dyadic Dyadic::neg() const {
    Dyadic d = *this;
    d.sign = -d.sign;
    return d;
}

Dyadic Dyadic::abs() const {
    Dyadic d = *this;
    if (d.sign < 0) d.sign = 1;
    return d;
}

i128 Dyadic::log2_floor() const {
    if (is_zero()) throw std::logic_error("log2_floor of zero");
    return exp + (i128)(mant.bit_length() - 1);
}

static void check_align(const Dyadic& a, const Dyadic& b) {
    i128 lo = a.exp < b.exp ? a.exp : b.exp;
    i128 ha = a.log2_floor(), hb = b.log2_floor();
    i128 hi = ha > hb ? ha : hb;
    if (hi - lo + 2 > (i128)Dyadic::kMaxAlignBits)
        throw std::logic_error("Dyadic::add span too wide; use DyadicSum");
}

Dyadic Dyadic::add(const Dyadic& o) const {
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    check_align(*this, o);
    i128 e = exp < o.exp ? exp : o.exp;
    BigUint ma = mant.shl((uint64_t)(exp - e));
    BigUint mb = o.mant.shl((uint64_t)(o.exp - e));
    if (sign == o.sign) return canonical(sign, ma.add(mb), e);
    int c = ma.cmp(mb);
    if (c == 0) return Dyadic{};
    if (c > 0) return canonical(sign, ma.sub(mb), e);
    return canonical(o.sign, mb.sub(ma), e);
}

Dyadic Dyadic::sub(const Dyadic& o) const { return add(o.neg()); }

Dyadic Dyadic::mul(const Dyadic& o) const {
    if (is_zero() || o.is_zero()) return Dyadic{};
    return canonical(sign * o.sign, mant.mul(o.mant), exp + o.exp);
}

Dyadic Dyadic::mul_pow2(i128 e) const {
    if (is_zero()) return *this;
    Dyadic d = *this;
    d.exp += e;
    return d;
}

Dyadic Dyadic::mul_int(long long v) const { return mul(from_int(v)); }

Dyadic Dyadic::pow(unsigned k) const {
    Dyadic r = from_int(1);
    Dyadic base = *this;
    while (k) {
        if (k & 1u) r = r.mul(base);
        base = base.mul(base);
        k >>= 1;
    }
    return r;
}

int Dyadic::cmp(const Dyadic& o) const {
    if (sign != o.sign) return sign < o.sign ? -1 : 1;
    if (sign == 0) return 0;
    // compare |this| vs |o| without aligning mantissas: scales may be
    // separated by ~1e30 bits
    int flip = sign;  // for negatives the larger magnitude is the smaller value
    i128 ha = log2_floor(), hb = o.log2_floor();
    if (ha != hb) return (ha < hb ? -1 : 1) * flip;
    // same leading-bit position: walk bits from the top; supports overlap
    i128 lo_a = exp, lo_b = o.exp;
    i128 lo = lo_a > lo_b ? lo_a : lo_b;
    for (i128 p = ha; p >= lo; --p) {
        bool ba = p >= lo_a && mant.bit((uint64_t)(p - lo_a));
        bool bb = p >= lo_b && o.mant.bit((uint64_t)(p - lo_b));
        if (ba != bb) return (ba ? 1 : -1) * flip;
    }
    if (lo_a == lo_b) return 0;
    // equal down to the higher trailing edge; the one extending lower has a
    // set bit there (odd mantissa), so it is larger in magnitude
    return (lo_a > lo_b ? -1 : 1) * flip;
}

double Dyadic::to_double() const {
    if (is_zero()) return 0.0;
    uint64_t shift = 0;
    uint64_t top = mant.top64(&shift);
    i128 e = exp + (i128)shift;
    if (e > 2000) return sign > 0 ? HUGE_VAL : -HUGE_VAL;
    if (e < -2000) return sign > 0 ? 0.0 : -0.0;
    double v = std::ldexp((double)top, (int)e);
    return sign > 0 ? v : -v;
}

double Dyadic::log2_abs() const {
    if (is_zero()) throw std::logic_error("log2_abs of zero");
    uint64_t shift = 0;
    uint64_t top = mant.top64(&shift);
    return (double)(exp + (i128)shift) + std::log2((double)top);
}

std::string Dyadic::to_string() const {
    if (is_zero()) return "0";
    std::string s = (sign < 0 ? "-" : "") + mant.to_decimal();
    if (exp != 0) s += "*2^" + i128_to_string(exp);
    return s;
}

double log2add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double hi = a > b ? a : b, lo = a > b ? b : a;
    return hi + std::log2(1.0 + std::exp2(lo - hi));
}

void DyadicSum::add(const Dyadic& t) {
    if (t.is_zero()) return;
    if (head.is_zero()) {
        head = t;
        return;
    }
    i128 lo = head.exp < t.exp ? head.exp : t.exp;
    i128 ha = head.log2_floor(), hb = t.log2_floor();
    i128 hi = ha > hb ? ha : hb;
    if (hi - lo + 2 <= (i128)max_align_bits) {
        head = head.add(t);
        return;
    }
    // too far apart: keep the larger-scale term exactly, bound the other
    if (hb > ha) {
        dropped_log2 = log2add(dropped_log2, head.log2_abs());
        head = t;
    } else {
        dropped_log2 = log2add(dropped_log2, t.log2_abs());
    }
    ++dropped_terms;
}

}  // namespace cantorlab
