#include <gtest/gtest.h>

#include "q2sat/generators.hpp"
#include "q2sat/oracle.hpp"
#include "test_util.hpp"

using namespace q2sat;
using namespace q2sat::testing_util;

namespace {

QubitState single(const LevelPtr& L, const FieldElement& a, const FieldElement& b) {
    return QubitState{L, {a.lifted(L), b.lifted(L)}};
}

QubitState basis(const Instance& inst, int i) { return single(inst.base, FieldElement(i == 0), FieldElement(i == 1)); }

}  // namespace

TEST(BruteKernel, EmptyTwoQubitsIsFour) {
    EXPECT_EQ(brute_kernel_dim(instance_q(2, {})), 4u);
}

TEST(BruteKernel, FourBasisProjectorsLeaveNothing) {
    EXPECT_EQ(brute_kernel_dim(instance_q(2, {{0, 1, basis_row(0, 0)},
                                               {0, 1, basis_row(0, 1)},
                                               {0, 1, basis_row(1, 0)},
                                               {0, 1, basis_row(1, 1)}})),
              0u);
}

TEST(BruteKernel, SingletIsTheOnlySurvivor) {
    // Three independent rows on C^4 leave one dimension.
    EXPECT_EQ(brute_kernel_dim(instance_q(2, {{0, 1, basis_row(0, 0)}, {0, 1, basis_row(1, 1)}, {0, 1, row(1, 1, 1, 1)}})),
              1u);
}

TEST(BruteKernel, ComponentsMultiply) {
    // Pair with one constraint (3), pair with two (2), isolated qubit (2).
    Instance inst = instance_q(5, {{0, 1, basis_row(0, 0)}, {2, 3, row(1, 0, 0, 0)}, {2, 3, row(0, 0, 0, 1)}});
    EXPECT_EQ(brute_kernel_dim(inst), 2u * 3u * 2u);
    EXPECT_EQ(brute_kernel_dim(instance_q(3, {{0, 1, basis_row(0, 0)}})), 3u * 2u);
}

TEST(BruteKernel, GaussianCoefficients) {
    Instance inst = Instance::empty(2, gaussian_field());
    const FieldElement i = FieldElement::generator(inst.base, 0);
    // <0| (x) (<0| + i<1|) and <1| (x) (<0| - i<1|): each kills a 2-dim subspace.
    inst.add(0, 1, {FieldElement(1), i, FieldElement(0), FieldElement(0)});
    inst.add(0, 1, {FieldElement(0), FieldElement(0), FieldElement(1), -i});
    EXPECT_EQ(brute_kernel_dim(inst), 2u);
    inst.add(0, 1, {FieldElement(1), FieldElement(0), FieldElement(0), FieldElement(1)});
    EXPECT_EQ(brute_kernel_dim(inst), 1u);
}

TEST(BruteKernel, SizeCap) {
    std::vector<Edge3> cs;
    for (int q = 0; q + 1 < 13; ++q) cs.push_back({q, q + 1, singlet_support()});
    EXPECT_THROW(brute_kernel_dim(instance_q(13, cs)), std::invalid_argument);
    cs.pop_back();
    // Singlet rows on neighbours leave the symmetric subspace, of dimension n + 1.
    EXPECT_EQ(brute_kernel_dim(instance_q(12, cs)), 13u);
}

TEST(BruteKernel, MonotoneUnderAddingConstraints) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        RandomParams p;
        p.n = 4;
        p.m = 6;
        p.gaussian = seed % 2 == 1;
        Instance full = gen_random(p, seed);
        Instance partial = Instance::empty(full.n, full.field);
        std::uint64_t prev = brute_kernel_dim(partial);
        for (const auto& c : full.constraints) {
            partial.add(c.u, c.v, c.eta);
            const std::uint64_t d = brute_kernel_dim(partial);
            ASSERT_LE(d, prev) << "seed " << seed;
            prev = d;
        }
    }
}

TEST(Verify, UnilateralExamples) {
    Instance inst = instance_q(2, {{0, 1, row(1, 0, 0, 0)}});
    Assignment ok;
    ok.singles[0] = basis(inst, 1);
    ok.singles[1] = basis(inst, 0);
    EXPECT_TRUE(verify_assignment(inst, ok).ok());

    Assignment bad;
    bad.singles[0] = basis(inst, 0);
    bad.singles[1] = basis(inst, 0);
    const VerifyResult r = verify_assignment(inst, bad);
    EXPECT_EQ(r.status, VerifyResult::Status::Violation);
    EXPECT_EQ(r.constraint_id, 0);
}

TEST(Verify, SingletPairSatisfiesAllThree) {
    Instance inst = instance_q(2, {{0, 1, basis_row(0, 0)}, {0, 1, basis_row(1, 1)}, {0, 1, row(1, 1, 1, 1)}});
    const NormalizedVector nv = normalize_vector({FieldElement(0), FieldElement(1), FieldElement(-1), FieldElement(0)}, inst.base);
    Assignment a;
    a.pairs[{0, 1}] = PairState{nv.level, {nv.entries[0], nv.entries[1], nv.entries[2], nv.entries[3]}};
    EXPECT_TRUE(verify_assignment(inst, a).ok());

    // Orientation: a constraint written as (1, 0) is read in the swapped basis.
    Instance swapped = instance_q(2, {{1, 0, row(0, 0, 1, 0)}});
    Assignment b;
    const NormalizedVector e01 = normalize_vector({FieldElement(0), FieldElement(1), FieldElement(0), FieldElement(0)}, inst.base);
    b.pairs[{0, 1}] = PairState{e01.level, {e01.entries[0], e01.entries[1], e01.entries[2], e01.entries[3]}};
    // |01> on (0,1) is |10> on (1,0), which the row <10| on (1,0) detects.
    EXPECT_EQ(verify_assignment(swapped, b).status, VerifyResult::Status::Violation);
    Instance swapped_ok = instance_q(2, {{1, 0, row(1, 0, 0, 0)}});
    EXPECT_TRUE(verify_assignment(swapped_ok, b).ok());
}

TEST(Verify, PairAgainstSingle) {
    // Pair (0,1) = |0>|0>, qubit 2 = |1>; constraint on (1,2) = <0|<0| is satisfied
    // by the single; <0|<1| is violated.
    Instance inst = instance_q(3, {{1, 2, basis_row(0, 0)}});
    Assignment a;
    a.pairs[{0, 1}] = PairState{inst.base, row(1, 0, 0, 0)};
    a.singles[2] = basis(inst, 1);
    EXPECT_TRUE(verify_assignment(inst, a).ok());
    Instance bad = instance_q(3, {{2, 1, basis_row(1, 0)}});
    EXPECT_EQ(verify_assignment(bad, a).status, VerifyResult::Status::Violation);
}

TEST(Verify, CompositumOfUnrelatedTowers) {
    // (1,1)/sqrt2 over Q[sqrt2] and (1,-1)/sqrt2 = (1,-1) sqrt8/4 over Q[sqrt8];
    // the row (1,0,0,1) is satisfied by neither side alone.
    const LevelPtr q = TowerLevel::base(NumberField::rationals());
    const LevelPtr s2 = TowerLevel::adjoin(q, {2});
    const LevelPtr s8 = TowerLevel::adjoin(q, {8});
    const FieldElement h2 = elem(s2, 2, {0, 1});
    const FieldElement h8 = elem(s8, 4, {0, 1});
    Assignment a;
    a.singles[0] = QubitState{s2, {h2, h2}};
    a.singles[1] = QubitState{s8, {h8, -h8}};
    EXPECT_TRUE(verify_assignment(instance_q(2, {{0, 1, row(1, 0, 0, 1)}}), a).ok());
    EXPECT_EQ(verify_assignment(instance_q(2, {{0, 1, row(1, 0, 0, -1)}}), a).status, VerifyResult::Status::Violation);
}

TEST(Verify, CoverageAndNorm) {
    Instance inst = instance_q(2, {});
    Assignment a;
    a.singles[0] = basis(inst, 0);
    VerifyResult r = verify_assignment(inst, a);
    EXPECT_EQ(r.status, VerifyResult::Status::CoverageGap);
    EXPECT_EQ(r.qubit, 1);
    a.singles[1] = single(inst.base, FieldElement(2), FieldElement(0));
    r = verify_assignment(inst, a);
    EXPECT_EQ(r.status, VerifyResult::Status::NotNormalized);
    EXPECT_EQ(r.qubit, 1);
    a.pairs[{0, 1}] = PairState{inst.base, row(1, 0, 0, 0)};
    EXPECT_EQ(verify_assignment(inst, a).status, VerifyResult::Status::CoverageGap);
}

TEST(Classical, Examples) {
    EXPECT_TRUE(classical_2sat_reference(Cnf{2, {{1, 2}}}));
    EXPECT_FALSE(classical_2sat_reference(Cnf{1, {{1, 1}, {-1, -1}}}));
    EXPECT_FALSE(truth_table_sat(Cnf{1, {{1, 1}, {-1, -1}}}));
    EXPECT_TRUE(classical_2sat_reference(Cnf{3, {}}));
}

TEST(Classical, MatchesTruthTable) {
    Rng rng(7);
    int sat = 0, unsat = 0;
    for (int trial = 0; trial < 600; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(19));
        const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(3 * n)));
        const Cnf f = gen_random_2cnf(n, m, rng);
        const bool ref = classical_2sat_reference(f);
        ASSERT_EQ(ref, truth_table_sat(f)) << serialize_dimacs(f);
        (ref ? sat : unsat)++;
    }
    EXPECT_GT(sat, 50);
    EXPECT_GT(unsat, 50);
}

TEST(Classical, FiftyVariablesAgainstKnownAnswers) {
    // x1 -> x2 -> ... -> x50 -> -x1 forces x1 false; (x1 v x2), (x1 v -x2) force it true.
    Cnf f;
    f.num_vars = 50;
    for (int i = 1; i < 50; ++i) f.clauses.push_back({-i, i + 1});
    f.clauses.push_back({-50, -1});
    EXPECT_TRUE(classical_2sat_reference(f));
    f.clauses.push_back({1, 2});
    f.clauses.push_back({1, -2});
    EXPECT_FALSE(classical_2sat_reference(f));
}

TEST(Classical, EmbeddingPreservesSatisfiability) {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(7));
        const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * n)));
        const Cnf f = gen_random_2cnf(n, m, rng);
        const bool ref = classical_2sat_reference(f);
        ASSERT_EQ(ref, truth_table_sat(f));
        ASSERT_EQ(ref, brute_kernel_dim(embed_cnf(f)) > 0) << serialize_dimacs(f);
    }
}
