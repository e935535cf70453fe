#pragma once
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "cantorlab/bigint.hpp"

namespace cantorlab {

using i128 = __int128;

std::string i128_to_string(i128 v);

// Exact dyadic rational: sign * mant * 2^exp, mant odd (canonical form).
// Zero is sign == 0 with empty mantissa and exp == 0.
//
// Exponents routinely exceed int64 range in this codebase (tentacle widths
// shrink by ~1e30 doublings per generation), hence the 128-bit exponent.
//
// add/sub are gap-checked: aligning two terms whose scales are separated by
// more than kMaxAlignBits is a design error (such sums must go through
// DyadicSum), so they throw instead of allocating gigabytes.
struct Dyadic {
    int sign = 0;
    BigUint mant;
    i128 exp = 0;

    static constexpr uint64_t kMaxAlignBits = 1ull << 22;

    Dyadic() = default;

    static Dyadic from_int(long long v);
    static Dyadic from_mant_exp(long long m, i128 e);
    static Dyadic pow2(i128 e);
    static std::optional<Dyadic> from_double(double v);  // exact; nullopt if not finite

    bool is_zero() const { return sign == 0; }
    Dyadic neg() const;
    Dyadic abs() const;

    i128 log2_floor() const;                 // position of leading bit; requires nonzero
    i128 log2_trailing() const { return exp; }

    Dyadic add(const Dyadic& o) const;
    Dyadic sub(const Dyadic& o) const;
    Dyadic mul(const Dyadic& o) const;
    Dyadic mul_pow2(i128 e) const;
    Dyadic mul_int(long long v) const;
    Dyadic pow(unsigned k) const;
    Dyadic half() const { return mul_pow2(-1); }

    int cmp(const Dyadic& o) const;

    double to_double() const;   // nearest double; clamps to 0 / +-inf outside range
    double log2_abs() const;    // approximate log2 |x|; requires nonzero
    std::string to_string() const;  // exact "m*2^e" (plain integer when exp == 0)

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b) { return a.add(b); }
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a.sub(b); }
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b) { return a.mul(b); }
    Dyadic operator-() const { return neg(); }
    friend bool operator<(const Dyadic& a, const Dyadic& b) { return a.cmp(b) < 0; }
    friend bool operator<=(const Dyadic& a, const Dyadic& b) { return a.cmp(b) <= 0; }
    friend bool operator>(const Dyadic& a, const Dyadic& b) { return a.cmp(b) > 0; }
    friend bool operator>=(const Dyadic& a, const Dyadic& b) { return a.cmp(b) >= 0; }
    friend bool operator==(const Dyadic& a, const Dyadic& b) { return a.cmp(b) == 0; }
    friend bool operator!=(const Dyadic& a, const Dyadic& b) { return a.cmp(b) != 0; }
};

// log2(2^a + 2^b) without overflow
double log2add(double a, double b);

// Accumulator for sums whose terms span scales no double (or sane exact sum)
// can hold together. Keeps an exact head; terms too far below it are dropped
// into a rigorous log2 bound on the absolute error.
struct DyadicSum {
    Dyadic head;
    double dropped_log2 = -std::numeric_limits<double>::infinity();
    uint64_t dropped_terms = 0;
    uint64_t max_align_bits = 1ull << 16;

    void add(const Dyadic& t);
    bool exact() const { return dropped_terms == 0; }
    double value() const { return head.to_double(); }
};

}  // namespace cantorlab
