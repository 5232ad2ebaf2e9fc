#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "q2sat/model.hpp"
#include "q2sat/transfer.hpp"

namespace q2sat {

// Byte-deterministic draws (no std distributions, whose output is
// implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}
    std::uint64_t next() { return g_(); }
    // Uniform enough on [0, n) for n far below 2^64.
    std::uint64_t below(std::uint64_t n) { return g_() % n; }
    long range(long lo, long hi) { return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
    bool chance(unsigned num, unsigned den) { return below(den) < num; }
    // Odd integer with exactly `bits` bits.
    mpz_class odd_bits(unsigned bits);

private:
    std::mt19937_64 g_;
};

// Bit k of M (least significant is bit 0); n = max(bit length of M, N).
// Qubits 0..2n+1 in a chain: X_{i-1,i} = [[1,0],[M_{n-i},2]], X_{n,n+1} the swap,
// X_{n+i,n+i+1} = [[1,0],[N_{n-i},2]], and a second constraint on (0, 1) with
// transfer [[0,1],[0,M_{n-1}]] that pins qubit 0 to |0>.
Instance gen_lowerbound_full(const mpz_class& M, const mpz_class& N);
// Qubits 0..n with the constraints of the full construction on them.
Instance gen_lowerbound_chain(const mpz_class& M);

struct RandomParams {
    int n = 4;
    int m = 6;
    // Percent of constraints drawn as product rows.
    unsigned product_percent = 50;
    bool gaussian = false;
    // Real and imaginary parts are drawn from [-coeff_range, coeff_range].
    long coeff_range = 1;
};

Instance gen_random(const RandomParams& p, std::uint64_t seed);

// Random 2-CNF with distinct variables per clause.
Cnf gen_random_2cnf(int num_vars, int num_clauses, Rng& rng);

enum class BenchFamily { Chain, Cycle, Random, Classical, Lowerbound };

BenchFamily parse_bench_family(std::string_view name);
const char* bench_family_name(BenchFamily f);

/*
 * chain: path of entangled signed-permutation transfers (no cycle).
 * cycle: ring whose cycle operator is diag(1, -1).
 * random: about 2n constraints around a planted product state, each qubit in
 *         {|0>,|1>} or {|+>,|->}; entangled rows only inside one orbit.
 * classical: x1 forced true by (x1 v y), (x1 v -y), the implication chain
 *            x1 -> x2 -> ... -> xn and random clauses true under all-true; every
 *            row is scaled by 2 so that propagating T*a doubles coefficients.
 * lowerbound: gen_lowerbound_full with random odd `size`-bit M and N.
 */
Instance gen_bench(BenchFamily family, int size, std::uint64_t seed);

// The 8 signed permutation matrices, index 0 the identity.
Mat2 signed_permutation(unsigned index);

}  // namespace q2sat
