#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace cantorlab {

// Unsigned big integer, little-endian base-2^64 limbs. Empty vector is zero.
// No trailing zero limbs are kept.
struct BigUint {
    std::vector<uint64_t> w;

    static BigUint from_u64(uint64_t v);

    bool is_zero() const { return w.empty(); }
    void trim();
    uint64_t bit_length() const;       // 0 for zero
    bool bit(uint64_t i) const;
    uint64_t trailing_zeros() const;   // undefined semantics avoided: returns 0 for zero
    int cmp(const BigUint& o) const;

    BigUint add(const BigUint& o) const;
    BigUint sub(const BigUint& o) const;   // requires *this >= o
    BigUint mul(const BigUint& o) const;
    BigUint shl(uint64_t bits) const;
    BigUint shr(uint64_t bits) const;

    uint64_t low64() const { return w.empty() ? 0 : w[0]; }
    // Highest min(bit_length,64) bits as an integer; *shift_out is how many
    // low bits were cut off.
    uint64_t top64(uint64_t* shift_out) const;

    std::string to_decimal() const;
};

}  // namespace cantorlab
