#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <optional>

namespace q2sat {

// floor(sqrt(d)) for d >= 0.
mpz_class isqrt_floor(const mpz_class& d);

// s with s*s == d, or nullopt when d is not a perfect square (or negative).
std::optional<mpz_class> isqrt_exact(const mpz_class& d);

// Number of bits of |x|; 0 for x == 0.
std::size_t bit_length(const mpz_class& x);

}  // namespace q2sat
