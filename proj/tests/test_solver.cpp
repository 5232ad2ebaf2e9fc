#include <gtest/gtest.h>

#include <memory>
#include <set>

#include "q2sat/generators.hpp"
#include "q2sat/oracle.hpp"
#include "q2sat/preprocess.hpp"
#include "q2sat/solver.hpp"
#include "test_util.hpp"

using namespace q2sat;
using namespace q2sat::testing_util;

namespace {

Mat2 mat(long a, long b, long c, long d) {
    return Mat2::of(FieldElement(a), FieldElement(b), FieldElement(c), FieldElement(d));
}

// All constraints in the graph, no preprocessing.
std::unique_ptr<SolveState> raw_state(const Instance& inst, SolveOptions opts = {}) {
    auto st = std::make_unique<SolveState>(inst, std::move(opts));
    for (const auto& c : inst.constraints) st->activate(c.id);
    return st;
}

Instance random_small(std::uint64_t seed) {
    Rng r(seed * 7919 + 1);
    RandomParams p;
    p.n = 2 + static_cast<int>(r.below(4));
    p.m = static_cast<int>(r.below(9));
    p.product_percent = static_cast<unsigned>(r.below(5) * 25);
    p.gaussian = r.chance(1, 3);
    p.coeff_range = 1 + static_cast<long>(r.below(2));
    return gen_random(p, seed);
}

// Original constraints whose endpoints are both outside `gone`.
Instance residual(const Instance& inst, const std::function<bool(int)>& gone) {
    Instance out = Instance::empty(inst.n, inst.field);
    for (const auto& c : inst.constraints)
        if (!gone(c.u) && !gone(c.v)) out.add(c.u, c.v, c.eta);
    return out;
}

bool is_basis(const Vec2& v, int which) { return is_zero(v[1 - which]) && !is_zero(v[which]); }

// Triangle 0-1-2: singlet rows on (0,1), (1,2) and diag(1,2) as the transfer 2 -> 0.
Instance discretizing_triangle() {
    return instance_q(3, {{0, 1, singlet_support()}, {1, 2, singlet_support()}, {2, 0, row_from_transfer(mat(1, 0, 0, 2))}});
}

}  // namespace

// ------------------------------------------------------------ preprocessing

TEST(SummarizePair, Examples) {
    auto summary = [](std::vector<Row> rows) {
        std::vector<std::pair<int, Row>> in;
        for (std::size_t k = 0; k < rows.size(); ++k) in.emplace_back(static_cast<int>(k), rows[k]);
        return summarize_pair(0, 1, in);
    };
    const PairSummary a = summary({basis_row(0, 0), basis_row(1, 1), row(1, 1, 1, 1)});
    EXPECT_EQ(a.rank, 3);
    ASSERT_TRUE(a.kernel.has_value());
    EXPECT_TRUE(proportional(std::span<const FieldElement>(*a.kernel), std::span<const FieldElement>(singlet_support())));
    EXPECT_FALSE(a.kernel_is_product);

    const PairSummary b = summary({row(1, 2, 3, 4), row(1, 2, 3, 4)});
    EXPECT_EQ(b.rank, 1);
    EXPECT_EQ(b.kept, (std::vector<int>{0}));

    // The complement of the singlet as three rank-1 rows: |00>, |11>, |01> + |10>.
    const PairSummary c = summary({basis_row(0, 0), basis_row(1, 1), row(0, 1, 1, 0)});
    EXPECT_EQ(c.rank, 3);
    EXPECT_TRUE(proportional(std::span<const FieldElement>(*c.kernel), std::span<const FieldElement>(singlet_support())));

    const PairSummary d = summary({basis_row(0, 0), basis_row(1, 0), basis_row(1, 1)});
    EXPECT_TRUE(d.kernel_is_product);
    EXPECT_TRUE(proportional(d.a, vec(1, 0)));
    EXPECT_TRUE(proportional(d.b, vec(0, 1)));
}

TEST(Preprocess, FourBasisProjectorsAreUnsat) {
    const Instance inst = instance_q(2, {{0, 1, basis_row(0, 0)}, {0, 1, basis_row(0, 1)}, {1, 0, basis_row(0, 1)}, {0, 1, basis_row(1, 1)}});
    const SolveResult r = solve(inst);
    EXPECT_FALSE(r.sat);
    EXPECT_EQ(r.phase, Phase::Preprocessing);
}

TEST(Preprocess, EntangledKernelOnIsolatedPair) {
    const Instance inst = instance_q(2, {{0, 1, basis_row(0, 0)}, {0, 1, basis_row(1, 1)}, {0, 1, row(1, 1, 1, 1)}});
    SolveState st(inst, {});
    ASSERT_TRUE(apply_preprocessing(st));
    ASSERT_EQ(st.working().pairs.size(), 1u);
    const Row& k = st.working().pairs.begin()->second.vec;
    EXPECT_TRUE(proportional(std::span<const FieldElement>(k), std::span<const FieldElement>(singlet_support())));
    EXPECT_EQ(st.graph().live_qubit_count(), 0);
}

TEST(Preprocess, ProductKernelSplitsIntoSingles) {
    const Instance inst = instance_q(2, {{0, 1, basis_row(0, 0)}, {0, 1, basis_row(1, 0)}, {0, 1, basis_row(1, 1)}});
    SolveState st(inst, {});
    ASSERT_TRUE(apply_preprocessing(st));
    EXPECT_TRUE(is_basis(st.working().singles.at(0).vec, 0));
    EXPECT_TRUE(is_basis(st.working().singles.at(1).vec, 1));
    EXPECT_TRUE(st.working().pairs.empty());
}

TEST(Preprocess, EntangledPairNextToNonProductIsUnsat) {
    const Instance inst = instance_q(3, {{0, 1, basis_row(0, 0)}, {0, 1, basis_row(1, 1)}, {0, 1, row(1, 1, 1, 1)}, {1, 2, row(1, 2, 3, 5)}});
    const SolveResult r = solve(inst);
    EXPECT_FALSE(r.sat);
    EXPECT_EQ(r.phase, Phase::Preprocessing);
    EXPECT_EQ(brute_kernel_dim(inst), 0u);
}

TEST(Preprocess, EntangledPairWithProductNeighbours) {
    // Singlet on (0,1); <1|_1 (x) <0|_2 forces qubit 2 to |1>.
    const Instance inst = instance_q(3, {{0, 1, basis_row(0, 0)}, {0, 1, basis_row(1, 1)}, {0, 1, row(1, 1, 1, 1)}, {1, 2, basis_row(1, 0)}});
    const SolveResult r = solve(inst);
    ASSERT_TRUE(r.sat);
    EXPECT_TRUE(is_basis(r.assignment.singles.at(2).vec, 1));
    EXPECT_TRUE(verify_assignment(inst, r.assignment).ok());
}

TEST(PreprocessProperty, RankMatchesOracle) {
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        RandomParams p;
        p.n = 2;
        p.m = 1 + static_cast<int>(seed % 5);
        p.product_percent = static_cast<unsigned>((seed % 3) * 50);
        p.gaussian = seed % 2 == 0;
        const Instance inst = gen_random(p, seed);
        std::vector<std::pair<int, Row>> rows;
        for (const auto& c : inst.constraints) rows.emplace_back(c.id, oriented_row(c));
        const PairSummary s = summarize_pair(0, 1, rows);
        ASSERT_EQ(static_cast<std::uint64_t>(s.rank), 4 - brute_kernel_dim(inst)) << seed;
        // Dropped rows are implied by the kept ones.
        Instance kept = Instance::empty(2, inst.field);
        for (int id : s.kept) kept.add(inst.constraints[id].u, inst.constraints[id].v, inst.constraints[id].eta);
        ASSERT_EQ(brute_kernel_dim(kept), brute_kernel_dim(inst)) << seed;
        if (s.kernel) {
            ASSERT_EQ(s.rank, 3);
            // The kernel state satisfies every row.
            for (const auto& [id, r] : rows) {
                FieldElement acc(0);
                for (int k = 0; k < 4; ++k) acc = acc + r[k] * (*s.kernel)[k];
                ASSERT_TRUE(is_zero(acc));
            }
        }
    }
}

TEST(PreprocessProperty, PreservesSatisfiabilityAndLeavesAtMostTwoRows) {
    for (std::uint64_t seed = 0; seed < 1500; ++seed) {
        const Instance inst = random_small(seed);
        SolveState st(inst, {});
        const bool ok = apply_preprocessing(st);
        const bool sat = brute_kernel_dim(inst) > 0;
        if (!ok) {
            ASSERT_FALSE(sat) << seed;
            continue;
        }
        const InteractionGraph& g = st.graph();
        const Instance rest = residual(inst, [&](int q) { return !g.qubit_live(q); });
        ASSERT_EQ(sat, brute_kernel_dim(rest) > 0) << seed;
        std::map<std::pair<int, int>, int> per_pair;
        for (const auto& c : inst.constraints)
            if (g.constraint_live(c.id)) ++per_pair[{std::min(c.u, c.v), std::max(c.u, c.v)}];
        for (const auto& [key, count] : per_pair) ASSERT_LE(count, 2) << seed;
    }
}

// ------------------------------------------------------------ chain reactions

TEST(ChainReaction, IsolatedQubit) {
    const Instance inst = instance_q(1, {});
    auto st = raw_state(inst);
    const CRState cr = st->induce_cr(0, vec(1, 0), inst.base);
    EXPECT_TRUE(cr.complete());
    ASSERT_EQ(cr.visited.size(), 1u);
    EXPECT_TRUE(is_basis(cr.visited.at(0), 0));
}

TEST(ChainReaction, BrokenLinkLeavesNeighbourFree) {
    const Instance inst = instance_q(2, {{0, 1, basis_row(0, 0)}});
    for (bool fast : {true, false}) {
        SolveOptions o;
        o.fastpath = fast;
        auto st = raw_state(inst, o);
        const CRState cr = st->induce_cr(0, vec(0, 1), inst.base);
        EXPECT_TRUE(cr.complete());
        EXPECT_EQ(cr.visited.count(1), 0u);
        EXPECT_EQ(cr.steps, 1u);
    }
}

TEST(ChainReaction, NonEigenvectorOnTriangleConflicts) {
    const Instance inst = discretizing_triangle();
    auto st = raw_state(inst);
    const CRState cr = st->induce_cr(0, vec(1, 1), inst.base);
    EXPECT_TRUE(cr.conflict());
    EXPECT_FALSE(cr.witness.empty());
}

TEST(ChainReaction, StepIsOneTraversal) {
    const Instance inst = discretizing_triangle();
    auto st = raw_state(inst);
    CRState cr = st->start_cr(0, vec(1, 0), inst.base);
    std::uint64_t before = st->metrics().edge_traversals;
    while (cr.running()) {
        st->step(cr);
        const std::uint64_t now = st->metrics().edge_traversals;
        ASSERT_LE(now - before, 1u);
        before = now;
    }
    EXPECT_TRUE(cr.complete());
}

TEST(ParallelCRs, ConflictingSeedLoses) {
    const Instance inst = discretizing_triangle();
    auto st = raw_state(inst);
    auto win = st->run_parallel_crs(st->start_cr(0, vec(1, 1), inst.base), st->start_cr(0, vec(1, 0), inst.base));
    ASSERT_TRUE(win.has_value());
    EXPECT_TRUE(is_basis(win->visited.at(0), 0));
}

TEST(ParallelCRs, TieGoesToFirst) {
    const Instance inst = instance_q(3, {{0, 1, singlet_support()}, {1, 2, singlet_support()}});
    auto st = raw_state(inst);
    auto win = st->run_parallel_crs(st->start_cr(0, vec(1, 0), inst.base), st->start_cr(0, vec(0, 1), inst.base));
    ASSERT_TRUE(win.has_value());
    EXPECT_TRUE(is_basis(win->visited.at(2), 0));
}

TEST(ParallelCRs, BothConflict) {
    const Instance inst = discretizing_triangle();
    auto st = raw_state(inst);
    EXPECT_FALSE(st->run_parallel_crs(st->start_cr(0, vec(1, 1), inst.base), st->start_cr(0, vec(1, -1), inst.base)));
}

TEST(ParallelCRs, PlantedProductRowsPropagate) {
    // On planted instances one of the two perpendicular seeds always completes.
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const Instance inst = gen_bench(BenchFamily::Random, 3 + static_cast<int>(seed % 5), seed);
        for (const auto& c : inst.constraints) {
            if (!is_product(c.eta)) continue;
            auto st = raw_state(inst);
            const ProductFactors f = product_factors(c.eta);
            auto win = st->run_parallel_crs(st->start_cr(c.u, f.perp_u, inst.base), st->start_cr(c.v, f.perp_v, inst.base));
            ASSERT_TRUE(win.has_value()) << seed << " constraint " << c.id;
            ++checked;
        }
    }
    EXPECT_GT(checked, 300);
}

// ------------------------------------------------------------ solver steps

TEST(Step1, ClassicalChain) {
    const Cnf f{3, {{1, 2}, {-2, 3}}};
    const Instance inst = embed_cnf(f);
    const SolveResult r = solve(inst);
    ASSERT_TRUE(r.sat);
    std::vector<int> bits(3);
    for (int q = 0; q < 3; ++q) {
        const Vec2& v = r.assignment.singles.at(q).vec;
        ASSERT_TRUE(is_basis(v, 0) || is_basis(v, 1));
        bits[q] = is_basis(v, 1);
    }
    for (const auto& c : f.clauses) {
        bool sat = false;
        for (int lit : c) sat = sat || (bits[std::abs(lit) - 1] == (lit > 0));
        EXPECT_TRUE(sat);
    }
}

TEST(Step1, ContradictionIsUnsat) {
    const Instance inst = embed_cnf(Cnf{2, {{1, 2}, {1, -2}, {-1, 2}, {-1, -2}}});
    EXPECT_FALSE(solve(inst).sat);
    EXPECT_FALSE(classical_2sat_reference(Cnf{2, {{1, 2}, {1, -2}, {-1, 2}, {-1, -2}}}));
}

TEST(Step1, NoProductConstraintsIsNoOp) {
    const Instance inst = discretizing_triangle();
    auto st = raw_state(inst);
    EXPECT_TRUE(st->step1_product_discretize());
    EXPECT_EQ(st->graph().live_qubit_count(), 3);
    EXPECT_TRUE(st->working().singles.empty());
}

TEST(CycleSearch, Examples) {
    {
        const Instance inst = instance_q(3, {{0, 1, singlet_support()}, {1, 2, singlet_support()}, {2, 0, singlet_support()}});
        auto st = raw_state(inst);
        EXPECT_FALSE(st->find_discretizing_cycle(0).has_value());
    }
    {
        const Instance inst = discretizing_triangle();
        auto st = raw_state(inst);
        const auto cyc = st->find_discretizing_cycle(0);
        ASSERT_TRUE(cyc.has_value());
        EXPECT_EQ(cyc->base, 0);
        EXPECT_TRUE(proportional(cyc->matrix, mat(1, 0, 0, 2)));
    }
    {
        const Instance inst = instance_q(4, {{0, 1, row(1, 2, 3, 5)}, {1, 2, row(2, 0, 1, 1)}, {1, 3, row(0, 1, 1, 7)}});
        auto st = raw_state(inst);
        EXPECT_FALSE(st->find_discretizing_cycle(0).has_value());
    }
    {
        // Two parallel constraints form a 2-cycle.
        const Instance inst = instance_q(2, {{0, 1, singlet_support()}, {0, 1, row_from_transfer(mat(1, 0, 0, 3))}});
        auto st = raw_state(inst);
        EXPECT_TRUE(st->find_discretizing_cycle(1).has_value());
    }
}

TEST(Step2, SingletCycleTakesFreeChoice) {
    const Instance inst = instance_q(4, {{0, 1, singlet_support()}, {1, 2, singlet_support()}, {2, 3, singlet_support()}, {3, 0, singlet_support()}});
    const SolveResult r = solve(inst);
    ASSERT_TRUE(r.sat);
    for (int q = 0; q < 4; ++q) EXPECT_TRUE(is_basis(r.assignment.singles.at(q).vec, 0));
    EXPECT_TRUE(verify_assignment(inst, r.assignment).ok());
}

TEST(Step2, IncompatibleCyclesAreUnsat) {
    // Cycle through 1 forces qubit 0 into {|0>, |1>}; cycle through 2 into {|+>, |->}.
    const Instance inst = instance_q(3, {{0, 1, singlet_support()},
                                         {0, 1, row_from_transfer(mat(1, 0, 0, 2))},
                                         {0, 2, singlet_support()},
                                         {0, 2, row_from_transfer(mat(0, 1, 1, 0))}});
    const SolveResult r = solve(inst);
    EXPECT_FALSE(r.sat);
    EXPECT_EQ(r.phase, Phase::CycleDiscretization);
    EXPECT_EQ(brute_kernel_dim(inst), 0u);
}

TEST(Step2, DisconnectedComponents) {
    const Instance tri = discretizing_triangle();
    Instance inst = Instance::empty(6, tri.field);
    for (const auto& c : tri.constraints) {
        inst.add(c.u, c.v, c.eta);
        inst.add(c.u + 3, c.v + 3, c.eta);
    }
    const SolveResult r = solve(inst);
    ASSERT_TRUE(r.sat);
    EXPECT_EQ(r.assignment.singles.size(), 6u);
    EXPECT_TRUE(verify_assignment(inst, r.assignment).ok());
}

TEST(Solve, EmptyInstanceDefaultsToZero) {
    const SolveResult r = solve(instance_q(2, {}));
    ASSERT_TRUE(r.sat);
    for (int q = 0; q < 2; ++q) {
        const Vec2& v = r.assignment.singles.at(q).vec;
        EXPECT_TRUE(fe_eq(v[0], FieldElement(1)));
        EXPECT_TRUE(is_zero(v[1]));
    }
}

TEST(Solve, SingletIsNormalizedWithSqrt2) {
    const Instance inst = instance_q(2, {{0, 1, basis_row(0, 0)}, {0, 1, basis_row(1, 1)}, {0, 1, row(1, 1, 1, 1)}});
    const SolveResult r = solve(inst);
    ASSERT_TRUE(r.sat);
    ASSERT_EQ(r.assignment.pairs.size(), 1u);
    const PairState& p = r.assignment.pairs.at({0, 1});
    EXPECT_EQ(p.level->depth(), 1);
    EXPECT_TRUE(proportional(std::span<const FieldElement>(p.vec), std::span<const FieldElement>(singlet_support())));
    const FieldElement two = (p.vec[1] * p.vec[1]).reduced();
    EXPECT_TRUE(fe_eq(two, FieldElement(mpq_class(1, 2))));
    EXPECT_TRUE(verify_assignment(inst, r.assignment).ok());
}

TEST(Solve, LowerBoundEndpoint) {
    const mpz_class M = 11, N = 13;
    const Instance inst = gen_lowerbound_full(M, N);
    const SolveResult r = solve(inst);
    ASSERT_TRUE(r.sat);
    const Vec2& last = r.assignment.singles.at(inst.n - 1).vec;
    EXPECT_TRUE(proportional(last, Vec2{FieldElement(M), FieldElement(mpz_class(mpz_class(16) + M * N))}));
    EXPECT_TRUE(verify_assignment(inst, r.assignment).ok());
}

TEST(Solve, UnsatWitnessNamesPhase) {
    const Instance inst = instance_q(2, {{0, 1, basis_row(0, 0)}, {0, 1, basis_row(0, 1)}, {0, 1, basis_row(1, 0)}, {0, 1, basis_row(1, 1)}});
    const SolveResult r = solve(inst);
    EXPECT_FALSE(r.witness.empty());
}

// ------------------------------------------------------------ properties

TEST(SolverProperty, AgreesWithOracleAndVerifies) {
    int sat = 0, unsat = 0;
    TowerCache cache;
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        const Instance inst = random_small(seed);
        SolveOptions o;
        o.fastpath = seed % 2 == 0;
        o.on_eigen = [&](const Mat2& t, const Eigenvectors& e) {
            for (const auto& p : e.pairs) {
                const Vec2 tw = t * p.vec;
                ASSERT_TRUE(fe_eq(tw[0], p.lambda * p.vec[0]) && fe_eq(tw[1], p.lambda * p.vec[1])) << seed;
            }
        };
        const SolveResult r = solve(inst, o);
        ASSERT_EQ(r.sat, brute_kernel_dim(inst) > 0) << "seed " << seed << "\n" << serialize_instance(inst);
        if (r.sat) {
            const VerifyResult v = verify_assignment(inst, r.assignment);
            ASSERT_TRUE(v.ok()) << "seed " << seed << ": " << v.detail << "\n" << serialize_instance(inst);
        }
        (r.sat ? sat : unsat)++;
        // Each edge is traversed a bounded number of times.
        ASSERT_LE(r.metrics.edge_traversals, 12 * (inst.n + inst.constraints.size()) + 8) << seed;
    }
    EXPECT_GT(sat, 200);
    EXPECT_GT(unsat, 200);
}

TEST(SolverProperty, CommitsKeepSatisfiabilityAndBoundary) {
    Rng walk_rng(99);
    int commits = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const Instance inst = random_small(seed + 50000);
        const bool sat = brute_kernel_dim(inst) > 0;
        SolveOptions o;
        o.on_commit = [&](const CommitEvent& ev) {
            ++commits;
            const std::set<int> done(ev.cr.order.begin(), ev.cr.order.end());
            const InteractionGraph& g = ev.state.graph();
            // The rest keeps the satisfiability of the input. Preprocessing
            // commits come from pair rows outside the graph, which the residual would drop.
            if (ev.phase != Phase::Preprocessing) {
                const Instance rest = residual(inst, [&](int q) { return !g.qubit_live(q) || done.count(q); });
                ASSERT_EQ(brute_kernel_dim(rest) > 0, sat) << "seed " << seed;
            }
            for (int a : ev.cr.order) {
                const Vec2& psi = ev.cr.visited.at(a);
                for (const Edge& e : g.edges(a)) {
                    if (!g.constraint_live(e.cid) || done.count(e.nbr)) continue;
                    // Unilateral boundary: constraints leaving the set are satisfied by it.
                    ASSERT_TRUE(is_zero_vec(ev.state.transfer(e.cid, e.forward) * psi)) << "seed " << seed;
                }
            }
            // Unique assignment along random walks from the seed.
            for (int w = 0; w < 4; ++w) {
                int at = ev.cr.seed_qubit;
                Vec2 cur = ev.cr.visited.at(at);
                for (int len = 0; len < 8; ++len) {
                    std::vector<Edge> out;
                    for (const Edge& e : g.edges(at))
                        if (g.constraint_live(e.cid) && done.count(e.nbr)) out.push_back(e);
                    if (out.empty()) break;
                    const Edge& e = out[walk_rng.below(out.size())];
                    cur = ev.state.transfer(e.cid, e.forward) * cur;
                    at = e.nbr;
                    if (is_zero_vec(cur)) break;
                    ASSERT_TRUE(proportional(cur, ev.cr.visited.at(at))) << "seed " << seed;
                }
            }
        };
        solve(inst, o);
    }
    EXPECT_GT(commits, 1000);
}

TEST(SolverProperty, NonEigenvectorSeedConflicts) {
    Rng rng(17);
    int built = 0;
    while (built < 100) {
        const int k = 2 + static_cast<int>(rng.below(5));
        Instance inst = Instance::empty(k + 2, NumberField::rationals());
        for (int i = 0; i < k; ++i) {
            Row r;
            do {
                r = row(rng.range(-3, 3), rng.range(-3, 3), rng.range(-3, 3), rng.range(-3, 3));
            } while (is_product(r));
            inst.add(i, (i + 1) % k, r);
        }
        // A pendant path off the cycle.
        inst.add(0, k, row(1, 2, 3, 5));
        inst.add(k, k + 1, row(0, 1, -1, 0));
        auto st = raw_state(inst);
        const auto cyc = st->find_discretizing_cycle(0);
        if (!cyc) continue;
        std::optional<Vec2> seed;
        for (const Vec2& cand : {vec(1, 0), vec(0, 1), vec(1, 1), vec(1, -1), vec(1, 2)})
            if (!proportional_star(cyc->matrix * cand, cand)) {
                seed = cand;
                break;
            }
        ASSERT_TRUE(seed.has_value());
        const CRState cr = st->induce_cr(cyc->base, *seed, inst.base);
        ASSERT_TRUE(cr.conflict()) << serialize_instance(inst);
        ++built;
    }
}
