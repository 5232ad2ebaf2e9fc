#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "q2sat/field.hpp"
#include "q2sat/graph.hpp"
#include "q2sat/model.hpp"
#include "q2sat/transfer.hpp"

namespace q2sat {

enum class Phase { Preprocessing, ProductDiscretization, CycleDiscretization, Normalization };

const char* phase_name(Phase p);

struct SolveMetrics {
    std::uint64_t edge_traversals = 0;
    std::uint64_t field_ops = 0;
    std::size_t max_coeff_bits = 0;
};

struct CRState {
    enum class Status { Running, Conflict, Complete };

    int seed_qubit = -1;
    LevelPtr level;
    Status status = Status::Running;
    std::unordered_map<int, Vec2> visited;
    std::vector<int> order;  // qubits in visit order
    std::vector<std::pair<int, std::size_t>> stack;
    std::uint64_t steps = 0;
    std::string witness;

    bool running() const { return status == Status::Running; }
    bool complete() const { return status == Status::Complete; }
    bool conflict() const { return status == Status::Conflict; }
};

struct DiscretizingCycle {
    int base;    // the qubit the cycle matrix acts on
    Mat2 matrix;  // not proportional to the identity
};

class SolveState;

struct CommitEvent {
    Phase phase;
    const CRState& cr;
    const SolveState& state;  // graph still contains the committed qubits
};

struct SolveOptions {
    // Product edges propagate the stored perpendicular factor instead of T * a.
    bool fastpath = true;
    int max_depth = TowerLevel::kMaxDepth;
    std::function<void(const CommitEvent&)> on_commit;
    std::function<void(const Mat2&, const Eigenvectors&)> on_eigen;
};

struct SolveResult {
    bool sat = false;
    Assignment assignment;
    SolveMetrics metrics;
    Phase phase = Phase::Preprocessing;  // where UNSAT was detected
    std::string witness;
};

/*
 * Mutable state of one solve: interaction graph over the live constraints,
 * preprocessing records, the running (unnormalized) assignment and metrics.
 */
class SolveState {
public:
    SolveState(const Instance& inst, SolveOptions opts);

    const Instance& instance() const { return inst_; }
    const SolveOptions& options() const { return opts_; }
    InteractionGraph& graph() { return graph_; }
    const InteractionGraph& graph() const { return graph_; }
    TowerCache& cache() { return cache_; }
    SolveMetrics& metrics() { return metrics_; }
    const Assignment& working() const { return working_; }
    Assignment& working() { return working_; }
    Phase phase() const { return phase_; }
    void set_phase(Phase p) { phase_ = p; }

    // Puts constraint `cid` of the instance into the interaction graph.
    void activate(int cid);
    bool constraint_is_product(int cid) const { return info_[cid].product; }
    const ProductFactors& factors(int cid) const { return *info_[cid].factors; }
    const Mat2& transfer(int cid, bool forward) const { return forward ? info_[cid].fwd : info_[cid].bwd; }

    // Vector forced on the far endpoint of `e` by `a` on the near one (may be zero).
    Vec2 propagate(const Edge& e, const Vec2& a) const;

    // Records from preprocessing that chain reactions must respect.
    void preassign_single(int q, Vec2 v);
    void preassign_entangled(int q);
    bool is_preassigned_entangled(int q) const;

    CRState start_cr(int q, Vec2 seed, LevelPtr level);
    // Exactly one edge traversal, or completion when the DFS is exhausted.
    void step(CRState& cr);
    CRState induce_cr(int q, Vec2 seed, LevelPtr level);
    // Alternates one traversal at a time, `a` first. nullopt when both conflict.
    std::optional<CRState> run_parallel_crs(CRState a, CRState b);
    // Merges into the working assignment and removes the visited qubits.
    void commit(const CRState& cr);

    std::optional<DiscretizingCycle> find_discretizing_cycle(int start);

    // Each returns false on UNSAT, with witness() set.
    bool step1_product_discretize();
    bool step2_cycle_discretize();
    void normalize(Assignment& out);

    const std::string& witness() const { return witness_; }
    void set_witness(std::string w) { witness_ = std::move(w); }

private:
    struct ConstraintInfo {
        bool product = false;
        std::optional<ProductFactors> factors;
        Mat2 fwd, bwd;
    };
    enum class Pre : char { None, Single, Entangled };

    bool check_against_preassigned(CRState& cr, int q, const Vec2& w) const;

    const Instance& inst_;
    SolveOptions opts_;
    InteractionGraph graph_;
    std::vector<ConstraintInfo> info_;
    std::vector<Pre> pre_kind_;
    std::unordered_map<int, Vec2> pre_single_;
    Assignment working_;
    TowerCache cache_;
    SolveMetrics metrics_;
    Phase phase_ = Phase::Preprocessing;
    std::string witness_;
};

SolveResult solve(const Instance& inst, const SolveOptions& opts = {});

std::string vec_to_string(const Vec2& v);

}  // namespace q2sat
