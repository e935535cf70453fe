#include "cantorlab/bigint.hpp"

#include <algorithm>
#include <stdexcept>

namespace cantorlab {

BigUint BigUint::from_u64(uint64_t v) {
    BigUint r;
    if (v) r.w.push_back(v);
    return r;
}

void BigUint::trim() {
    while (!w.empty() && w.back() == 0) w.pop_back();
}

uint64_t BigUint::bit_length() const {
    if (w.empty()) return 0;
    uint64_t top = w.back();
    uint64_t bits = 64;
    while (!(top >> 63)) { top <<= 1; --bits; }
    return 64 * (w.size() - 1) + bits;
}

bool BigUint::bit(uint64_t i) const {
    uint64_t limb = i / 64;
    if (limb >= w.size()) return false;
    return (w[limb] >> (i % 64)) & 1u;
}

uint64_t BigUint::trailing_zeros() const {
    if (w.empty()) return 0;
    uint64_t tz = 0;
    size_t i = 0;
    while (w[i] == 0) { tz += 64; ++i; }
    uint64_t v = w[i];
    while (!(v & 1u)) { v >>= 1; ++tz; }
    return tz;
}

int BigUint::cmp(const BigUint& o) const {
    if (w.size() != o.w.size()) return w.size() < o.w.size() ? -1 : 1;
    for (size_t i = w.size(); i-- > 0;) {
        if (w[i] != o.w[i]) return w[i] < o.w[i] ? -1 : 1;
    }
    return 0;
}

BigUint BigUint::add(const BigUint& o) const {
    BigUint r;
    size_t nmax = std::max(w.size(), o.w.size());
    r.w.resize(nmax + 1, 0);
    unsigned __int128 carry = 0;
    for (size_t i = 0; i < nmax; ++i) {
        unsigned __int128 s = carry;
        if (i < w.size()) s += w[i];
        if (i < o.w.size()) s += o.w[i];
        r.w[i] = (uint64_t)s;
        carry = s >> 64;
    }
    r.w[nmax] = (uint64_t)carry;
    r.trim();
    return r;
}

BigUint BigUint::sub(const BigUint& o) const {
    if (cmp(o) < 0) throw std::logic_error("BigUint::sub underflow");
    BigUint r;
    r.w.resize(w.size(), 0);
    unsigned __int128 borrow = 0;
    for (size_t i = 0; i < w.size(); ++i) {
        unsigned __int128 d = (unsigned __int128)w[i] - borrow;
        if (i < o.w.size()) d -= o.w[i];
        r.w[i] = (uint64_t)d;
        borrow = (d >> 64) ? 1 : 0;
    }
    r.trim();
    return r;
}

BigUint BigUint::mul(const BigUint& o) const {
    if (is_zero() || o.is_zero()) return BigUint{};
    BigUint r;
    r.w.assign(w.size() + o.w.size(), 0);
    for (size_t i = 0; i < w.size(); ++i) {
        unsigned __int128 carry = 0;
        for (size_t j = 0; j < o.w.size(); ++j) {
            unsigned __int128 cur = (unsigned __int128)w[i] * o.w[j] + r.w[i + j] + carry;
            r.w[i + j] = (uint64_t)cur;
            carry = cur >> 64;
        }
        size_t k = i + o.w.size();
        while (carry) {
            unsigned __int128 cur = (unsigned __int128)r.w[k] + carry;
            r.w[k] = (uint64_t)cur;
            carry = cur >> 64;
            ++k;
        }
    }
    r.trim();
    return r;
}

BigUint BigUint::shl(uint64_t bits) const {
    if (is_zero() || bits == 0) return *this;
    uint64_t limbs = bits / 64, rem = bits % 64;
    BigUint r;
    r.w.assign(w.size() + limbs + 1, 0);
    for (size_t i = 0; i < w.size(); ++i) {
        r.w[i + limbs] |= rem ? (w[i] << rem) : w[i];
        if (rem && i + limbs + 1 < r.w.size()) r.w[i + limbs + 1] |= w[i] >> (64 - rem);
    }
    r.trim();
    return r;
}

BigUint BigUint::shr(uint64_t bits) const {
    if (is_zero()) return *this;
    uint64_t limbs = bits / 64, rem = bits % 64;
    if (limbs >= w.size()) return BigUint{};
    BigUint r;
    r.w.assign(w.size() - limbs, 0);
    for (size_t i = 0; i < r.w.size(); ++i) {
        r.w[i] = w[i + limbs] >> rem;
        if (rem && i + limbs + 1 < w.size()) r.w[i] |= w[i + limbs + 1] << (64 - rem);
    }
    r.trim();
    return r;
}

uint64_t BigUint::top64(uint64_t* shift_out) const {
    uint64_t bl = bit_length();
    if (bl <= 64) {
        if (shift_out) *shift_out = 0;
        return low64();
    }
    uint64_t shift = bl - 64;
    BigUint t = shr(shift);
    if (shift_out) *shift_out = shift;
    return t.low64();
}

std::string BigUint::to_decimal() const {
    if (is_zero()) return "0";
    // repeated division by 10^19 (largest power of ten in a u64)
    const uint64_t base = 10000000000000000000ull;
    std::vector<uint64_t> cur = w;
    std::string out;
    while (!cur.empty()) {
        unsigned __int128 rem = 0;
        for (size_t i = cur.size(); i-- > 0;) {
            unsigned __int128 v = (rem << 64) | cur[i];
            cur[i] = (uint64_t)(v / base);
            rem = v % base;
        }
        while (!cur.empty() && cur.back() == 0) cur.pop_back();
        std::string chunk = std::to_string((uint64_t)rem);
        if (cur.empty()) {
            out.insert(0, chunk);
        } else {
            out.insert(0, std::string(19 - chunk.size(), '0') + chunk);
        }
    }
    return out;
}

}  // namespace cantorlab
