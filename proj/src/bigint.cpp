#include "q2sat/bigint.hpp"

#include <stdexcept>

namespace q2sat {

std::size_t bit_length(const mpz_class& x) {
    if (sgn(x) == 0) return 0;
    return mpz_sizeinbase(x.get_mpz_t(), 2);
}

namespace {

// Newton iteration from an overestimate x0 >= floor(sqrt(d)); decreases monotonically.
mpz_class newton_from_above(const mpz_class& d, mpz_class x) {
    for (;;) {
        mpz_class y = (x + d / x) >> 1;
        if (y >= x) return x;
        x = y;
    }
}

}  // namespace

mpz_class isqrt_floor(const mpz_class& d) {
    if (sgn(d) < 0) throw std::domain_error("isqrt of a negative integer");
    if (sgn(d) == 0) return 0;
    const std::size_t bits = bit_length(d);
    if (bits <= 64) {
        // 2^ceil(bits/2) exceeds the root; a handful of steps suffice.
        mpz_class x = mpz_class(1) << static_cast<unsigned>((bits + 1) / 2);
        return newton_from_above(d, x);
    }
    // Root of the top half, shifted back, is within 2^k of the answer from below;
    // one step from (t+1)*2^k lands within O(1), the loop finishes the rest.
    const unsigned k = static_cast<unsigned>(bits / 4);
    mpz_class t = isqrt_floor(d >> (2 * k));
    mpz_class x = (t + 1) << k;
    return newton_from_above(d, x);
}

std::optional<mpz_class> isqrt_exact(const mpz_class& d) {
    if (sgn(d) < 0) return std::nullopt;
    mpz_class s = isqrt_floor(d);
    if (s * s == d) return s;
    return std::nullopt;
}

}  // namespace q2sat
