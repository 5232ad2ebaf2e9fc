#include "q2sat/generators.hpp"

#include <stdexcept>

namespace q2sat {

namespace {

FieldElement fe(long v) { return FieldElement(v); }

Mat2 mat(long a, long b, long c, long d) { return Mat2::of(fe(a), fe(b), fe(c), fe(d)); }

int bit(const mpz_class& x, long k) { return k < 0 ? 0 : mpz_tstbit(x.get_mpz_t(), static_cast<mp_bitcnt_t>(k)); }

void check_odd_positive(const mpz_class& x, const char* name) {
    if (x <= 0 || mpz_even_p(x.get_mpz_t()))
        throw std::invalid_argument(std::string(name) + " must be an odd positive integer");
}

// Constraints on qubits 0..n of the lower-bound chain.
void add_lowerbound_head(Instance& inst, const mpz_class& M, long n) {
    for (long i = 1; i <= n; ++i) {
        inst.add(static_cast<int>(i - 1), static_cast<int>(i), row_from_transfer(mat(1, 0, bit(M, n - i), 2)));
        if (i == 1) inst.add(0, 1, row_from_transfer(mat(0, 1, 0, bit(M, n - 1))));
    }
}

Mat2 transpose(const Mat2& t) { return Mat2::of(t(0, 0), t(1, 0), t(0, 1), t(1, 1)); }

FieldElement small_coeff(Rng& rng, long range, const LevelPtr& base, bool gaussian) {
    const long re = rng.range(-range, range);
    if (!gaussian) return fe(re);
    const long im = rng.range(-range, range);
    return FieldElement(base, mpz_class(1), {mpz_class(re), mpz_class(im)});
}

Vec2 nonzero_vec(Rng& rng, long range, const LevelPtr& base, bool gaussian) {
    for (;;) {
        Vec2 v{small_coeff(rng, range, base, gaussian), small_coeff(rng, range, base, gaussian)};
        if (!is_zero_vec(v)) return v;
    }
}

Row outer(const Vec2& a, const Vec2& b) { return {a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]}; }

std::pair<int, int> random_pair(Rng& rng, int n) {
    const int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
    if (v >= u) ++v;
    return {u, v};
}

Instance bench_chain(int n, Rng& rng) {
    Instance inst = Instance::empty(n, NumberField::rationals());
    for (int i = 0; i + 1 < n; ++i) inst.add(i, i + 1, row_from_transfer(signed_permutation(static_cast<unsigned>(rng.below(8)))));
    return inst;
}

Instance bench_cycle(int n, Rng& rng) {
    if (n < 2) throw std::invalid_argument("cycle family needs at least 2 qubits");
    Instance inst = Instance::empty(n, NumberField::rationals());
    Mat2 walk = Mat2::identity();
    for (int i = 0; i + 1 < n; ++i) {
        const Mat2 t = signed_permutation(static_cast<unsigned>(rng.below(8)));
        inst.add(i, i + 1, row_from_transfer(t));
        walk = t * walk;
    }
    // Signed permutations are orthogonal, so the closing transfer is D * walk^T.
    inst.add(n - 1, 0, row_from_transfer(mat(1, 0, 0, -1) * transpose(walk)));
    return inst;
}

Instance bench_random(int n, Rng& rng) {
    if (n < 2) throw std::invalid_argument("random family needs at least 2 qubits");
    Instance inst = Instance::empty(n, NumberField::rationals());
    const Vec2 states[4] = {{fe(1), fe(0)}, {fe(0), fe(1)}, {fe(1), fe(1)}, {fe(1), fe(-1)}};
    std::vector<unsigned> planted(static_cast<std::size_t>(n));
    for (auto& s : planted) s = static_cast<unsigned>(rng.below(4));
    const long m = 2L * n;
    for (long k = 0; k < m; ++k) {
        const auto [u, v] = random_pair(rng, n);
        const Vec2& a = states[planted[u]];
        const Vec2& b = states[planted[v]];
        if (planted[u] / 2 == planted[v] / 2 && rng.chance(3, 4)) {
            for (;;) {
                const Mat2 t = signed_permutation(static_cast<unsigned>(rng.below(8)));
                if (proportional(t * a, b)) {
                    inst.add(u, v, row_from_transfer(t));
                    break;
                }
            }
            continue;
        }
        const Vec2 other = nonzero_vec(rng, 2, inst.base, false);
        if (rng.chance(1, 2))
            inst.add(u, v, outer(annihilator(a), other));
        else
            inst.add(u, v, outer(other, annihilator(b)));
    }
    return inst;
}

Instance bench_classical(int n, Rng& rng) {
    if (n < 2) throw std::invalid_argument("classical family needs at least 2 variables");
    Cnf f;
    f.num_vars = n + 1;
    const int y = n + 1;
    f.clauses.push_back({1, y});
    f.clauses.push_back({1, -y});
    for (int i = 1; i < n; ++i) f.clauses.push_back({-i, i + 1});
    for (int k = 0; k < n; ++k) {
        auto [a, b] = random_pair(rng, n);
        f.clauses.push_back({a + 1, rng.chance(1, 2) ? b + 1 : -(b + 1)});
    }
    Instance inst = embed_cnf(f);
    for (auto& c : inst.constraints)
        for (auto& e : c.eta) e = e * fe(2);
    return inst;
}

}  // namespace

mpz_class Rng::odd_bits(unsigned bits) {
    if (bits == 0) throw std::invalid_argument("odd_bits needs at least one bit");
    mpz_class x = 0;
    for (unsigned done = 0; done < bits; done += 64) {
        x <<= 64;
        const std::uint64_t w = next();
        x += mpz_class(static_cast<unsigned long>(w >> 32)) << 32;
        x += static_cast<unsigned long>(w & 0xffffffffu);
    }
    x >>= static_cast<mp_bitcnt_t>((bits + 63) / 64 * 64 - bits);
    mpz_setbit(x.get_mpz_t(), bits - 1);
    mpz_setbit(x.get_mpz_t(), 0);
    return x;
}

Mat2 signed_permutation(unsigned index) {
    const long s0 = (index & 1) ? -1 : 1, s1 = (index & 2) ? -1 : 1;
    if (index & 4) return mat(0, s0, s1, 0);
    return mat(s0, 0, 0, s1);
}

Instance gen_lowerbound_full(const mpz_class& M, const mpz_class& N) {
    check_odd_positive(M, "M");
    check_odd_positive(N, "N");
    const long n = static_cast<long>(std::max(mpz_sizeinbase(M.get_mpz_t(), 2), mpz_sizeinbase(N.get_mpz_t(), 2)));
    Instance inst = Instance::empty(static_cast<int>(2 * n + 2), NumberField::rationals());
    add_lowerbound_head(inst, M, n);
    inst.add(static_cast<int>(n), static_cast<int>(n + 1), row_from_transfer(mat(0, 1, 1, 0)));
    for (long i = 1; i <= n; ++i)
        inst.add(static_cast<int>(n + i), static_cast<int>(n + i + 1), row_from_transfer(mat(1, 0, bit(N, n - i), 2)));
    return inst;
}

Instance gen_lowerbound_chain(const mpz_class& M) {
    check_odd_positive(M, "M");
    const long n = static_cast<long>(mpz_sizeinbase(M.get_mpz_t(), 2));
    Instance inst = Instance::empty(static_cast<int>(n + 1), NumberField::rationals());
    add_lowerbound_head(inst, M, n);
    return inst;
}

Instance gen_random(const RandomParams& p, std::uint64_t seed) {
    if (p.n < 2 && p.m > 0) throw std::invalid_argument("constraints need at least 2 qubits");
    if (p.n < 0 || p.m < 0 || p.product_percent > 100 || p.coeff_range < 1)
        throw std::invalid_argument("invalid random instance parameters");
    Rng rng(seed);
    Instance inst = Instance::empty(p.n, p.gaussian ? gaussian_field() : NumberField::rationals());
    for (int k = 0; k < p.m; ++k) {
        const auto [u, v] = random_pair(rng, p.n);
        if (rng.below(100) < p.product_percent) {
            const Vec2 a = nonzero_vec(rng, p.coeff_range, inst.base, p.gaussian);
            const Vec2 b = nonzero_vec(rng, p.coeff_range, inst.base, p.gaussian);
            inst.add(u, v, outer(a, b));
            continue;
        }
        for (;;) {
            Row eta{small_coeff(rng, p.coeff_range, inst.base, p.gaussian), small_coeff(rng, p.coeff_range, inst.base, p.gaussian),
                    small_coeff(rng, p.coeff_range, inst.base, p.gaussian), small_coeff(rng, p.coeff_range, inst.base, p.gaussian)};
            if (is_product(eta)) continue;
            inst.add(u, v, eta);
            break;
        }
    }
    return inst;
}

Cnf gen_random_2cnf(int num_vars, int num_clauses, Rng& rng) {
    if (num_vars < 2) throw std::invalid_argument("2-CNF needs at least 2 variables");
    Cnf f;
    f.num_vars = num_vars;
    for (int k = 0; k < num_clauses; ++k) {
        const auto [a, b] = random_pair(rng, num_vars);
        const bool na = rng.chance(1, 2);
        const bool nb = rng.chance(1, 2);
        f.clauses.push_back({na ? -(a + 1) : a + 1, nb ? -(b + 1) : b + 1});
    }
    return f;
}

BenchFamily parse_bench_family(std::string_view name) {
    if (name == "chain") return BenchFamily::Chain;
    if (name == "cycle") return BenchFamily::Cycle;
    if (name == "random") return BenchFamily::Random;
    if (name == "classical") return BenchFamily::Classical;
    if (name == "lowerbound") return BenchFamily::Lowerbound;
    throw std::invalid_argument("unknown bench family '" + std::string(name) + "'");
}

const char* bench_family_name(BenchFamily f) {
    switch (f) {
        case BenchFamily::Chain: return "chain";
        case BenchFamily::Cycle: return "cycle";
        case BenchFamily::Random: return "random";
        case BenchFamily::Classical: return "classical";
        case BenchFamily::Lowerbound: return "lowerbound";
    }
    return "unknown";
}

Instance gen_bench(BenchFamily family, int size, std::uint64_t seed) {
    Rng rng(seed);
    switch (family) {
        case BenchFamily::Chain: return bench_chain(size, rng);
        case BenchFamily::Cycle: return bench_cycle(size, rng);
        case BenchFamily::Random: return bench_random(size, rng);
        case BenchFamily::Classical: return bench_classical(size, rng);
        case BenchFamily::Lowerbound: {
            const mpz_class M = rng.odd_bits(static_cast<unsigned>(size));
            const mpz_class N = rng.odd_bits(static_cast<unsigned>(size));
            return gen_lowerbound_full(M, N);
        }
    }
    throw std::invalid_argument("unknown bench family");
}

}  // namespace q2sat
