#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace symrank {

using Int = mpz_class;
using Rat = mpq_class;

/// Thrown when a request exceeds an enumeration or capability guard.
/// CLI maps this to exit code 3.
class GuardError : public std::runtime_error {
public:
    explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

// gmpxx has no long long overloads; long is 64-bit here, so casting is lossless.
static_assert(sizeof(long) == 8, "64-bit long required");

inline Int to_int(long long v) { return Int(static_cast<long>(v)); }
inline Rat to_rat(long long v) { return Rat(static_cast<long>(v)); }

inline Int binomial(unsigned n, unsigned k) {
    Int r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

inline Int pow2(unsigned e) {
    Int r = 1;
    mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), e);
    return r;
}

inline Rat make_rat(long num, unsigned long den) {
    Rat q(num, den);
    q.canonicalize();
    return q;
}

inline bool is_integer(const Rat& q) { return q.get_den() == 1; }

/// Renders a rational as "p/q", or just "p" when the denominator is 1.
inline std::string rat_str(const Rat& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

/// Parses "p", "p/q" or a plain integer string. Throws std::invalid_argument on junk.
Rat parse_rat(const std::string& s);

/// log(|z|) via mantissa/exponent split; valid for |z| of any size.
double log_abs(const Int& z);

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime_u64(std::uint64_t n);

}  // namespace symrank
