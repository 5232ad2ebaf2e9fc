#include "q2sat/solver.hpp"

#include <sstream>
#include <stdexcept>

#include "q2sat/preprocess.hpp"

namespace q2sat {

namespace {

Vec2 zero_vec() { return {FieldElement(0), FieldElement(0)}; }

std::size_t vec_bits(std::span<const FieldElement> v) {
    std::size_t b = 0;
    for (const auto& x : v) b = std::max(b, x.bits());
    return b;
}

}  // namespace

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Preprocessing: return "preprocessing";
        case Phase::ProductDiscretization: return "product-discretization";
        case Phase::CycleDiscretization: return "cycle-discretization";
        case Phase::Normalization: return "normalization";
    }
    return "unknown";
}

std::string vec_to_string(const Vec2& v) { return "(" + v[0].to_string() + " ; " + v[1].to_string() + ")"; }

SolveState::SolveState(const Instance& inst, SolveOptions opts)
    : inst_(inst),
      opts_(std::move(opts)),
      graph_(inst.n),
      info_(inst.constraints.size()),
      pre_kind_(static_cast<std::size_t>(inst.n), Pre::None) {}

void SolveState::activate(int cid) {
    const Constraint& c = inst_.constraints[cid];
    ConstraintInfo& ci = info_[cid];
    ci.product = is_product(c.eta);
    if (ci.product) ci.factors = product_factors(c.eta);
    ci.fwd = transfer_of(c, true);
    ci.bwd = transfer_of(c, false);
    graph_.add_constraint(cid, c.u, c.v);
}

Vec2 SolveState::propagate(const Edge& e, const Vec2& a) const {
    const ConstraintInfo& ci = info_[e.cid];
    if (ci.product && opts_.fastpath) {
        const ProductFactors& f = *ci.factors;
        const Vec2& g = e.forward ? f.gamma_u : f.gamma_v;
        if (is_zero(g[0] * a[0] + g[1] * a[1])) return zero_vec();
        return e.forward ? f.perp_v : f.perp_u;
    }
    return (e.forward ? ci.fwd : ci.bwd) * a;
}

void SolveState::preassign_single(int q, Vec2 v) {
    pre_kind_[q] = Pre::Single;
    pre_single_[q] = std::move(v);
}

void SolveState::preassign_entangled(int q) { pre_kind_[q] = Pre::Entangled; }

bool SolveState::is_preassigned_entangled(int q) const { return pre_kind_[q] == Pre::Entangled; }

bool SolveState::check_against_preassigned(CRState& cr, int q, const Vec2& w) const {
    switch (pre_kind_[q]) {
        case Pre::None: return true;
        case Pre::Entangled:
            cr.status = CRState::Status::Conflict;
            cr.witness = "qubit " + std::to_string(q) + " belongs to an entangled pair but was forced to " + vec_to_string(w);
            return false;
        case Pre::Single: {
            const Vec2& p = pre_single_.at(q);
            if (proportional(w, p)) return true;
            cr.status = CRState::Status::Conflict;
            cr.witness = "qubit " + std::to_string(q) + ": forced " + vec_to_string(w) + " against the pair state " +
                         vec_to_string(p);
            return false;
        }
    }
    return true;
}

CRState SolveState::start_cr(int q, Vec2 seed, LevelPtr level) {
    if (!graph_.qubit_live(q)) throw std::logic_error("chain reaction seeded on a removed qubit");
    if (is_zero_vec(seed)) throw std::invalid_argument("chain reaction seeded with the zero vector");
    CRState cr;
    cr.seed_qubit = q;
    cr.level = std::move(level);
    if (!check_against_preassigned(cr, q, seed)) return cr;
    cr.visited.emplace(q, std::move(seed));
    cr.order.push_back(q);
    graph_.live_edges(q);
    cr.stack.emplace_back(q, 0);
    return cr;
}

void SolveState::step(CRState& cr) {
    if (!cr.running()) return;
    while (!cr.stack.empty()) {
        auto& top = cr.stack.back();
        const int q = top.first;
        const auto& edges = graph_.edges(q);
        if (top.second >= edges.size()) {
            cr.stack.pop_back();
            continue;
        }
        const Edge e = edges[top.second++];
        if (!graph_.constraint_live(e.cid)) continue;
        ++cr.steps;
        ++metrics_.edge_traversals;
        Vec2 w = propagate(e, cr.visited.at(q));
        if (is_zero_vec(w)) return;
        auto it = cr.visited.find(e.nbr);
        if (it != cr.visited.end()) {
            if (!proportional(w, it->second)) {
                cr.status = CRState::Status::Conflict;
                cr.witness = "qubit " + std::to_string(e.nbr) + ": recorded " + vec_to_string(it->second) +
                             ", forced " + vec_to_string(w) + " via constraint " + std::to_string(e.cid) +
                             " from qubit " + std::to_string(q);
            }
            return;
        }
        if (!check_against_preassigned(cr, e.nbr, w)) return;
        cr.visited.emplace(e.nbr, std::move(w));
        cr.order.push_back(e.nbr);
        graph_.live_edges(e.nbr);
        cr.stack.emplace_back(e.nbr, 0);
        return;
    }
    cr.status = CRState::Status::Complete;
}

CRState SolveState::induce_cr(int q, Vec2 seed, LevelPtr level) {
    CRState cr = start_cr(q, std::move(seed), std::move(level));
    while (cr.running()) step(cr);
    return cr;
}

std::optional<CRState> SolveState::run_parallel_crs(CRState a, CRState b) {
    for (;;) {
        if (a.complete()) return a;
        if (b.complete()) return b;
        if (a.conflict() && b.conflict()) return std::nullopt;
        step(a);
        if (a.complete()) return a;
        step(b);
    }
}

void SolveState::commit(const CRState& cr) {
    if (!cr.complete()) throw std::logic_error("only complete chain reactions can be committed");
    if (opts_.on_commit) opts_.on_commit(CommitEvent{phase_, cr, *this});
    for (int q : cr.order) {
        const Vec2& v = cr.visited.at(q);
        metrics_.max_coeff_bits = std::max(metrics_.max_coeff_bits, vec_bits(v));
        working_.singles[q] = QubitState{cr.level, v};
    }
    graph_.remove_assigned(cr.order);
}

std::optional<DiscretizingCycle> SolveState::find_discretizing_cycle(int start) {
    // Path operators from `start`; the tree edge into a qubit is skipped by id, so
    // a parallel constraint is a non-tree edge.
    std::unordered_map<int, Mat2> path;
    std::unordered_map<int, int> tree_edge;
    std::vector<std::pair<int, std::size_t>> stack;
    path.emplace(start, Mat2::identity());
    tree_edge.emplace(start, -1);
    graph_.live_edges(start);
    stack.emplace_back(start, 0);
    while (!stack.empty()) {
        auto& top = stack.back();
        const int q = top.first;
        const auto& edges = graph_.edges(q);
        if (top.second >= edges.size()) {
            stack.pop_back();
            continue;
        }
        const Edge e = edges[top.second++];
        if (!graph_.constraint_live(e.cid) || e.cid == tree_edge.at(q)) continue;
        ++metrics_.edge_traversals;
        const ConstraintInfo& ci = info_[e.cid];
        if (ci.product) throw std::logic_error("cycle search met a product constraint");
        Mat2 reach = (e.forward ? ci.fwd : ci.bwd) * path.at(q);
        auto it = path.find(e.nbr);
        if (it == path.end()) {
            path.emplace(e.nbr, std::move(reach));
            tree_edge.emplace(e.nbr, e.cid);
            graph_.live_edges(e.nbr);
            stack.emplace_back(e.nbr, 0);
            continue;
        }
        if (!proportional(reach, it->second)) {
            // Closed walk start -> q -> nbr -> start; adj stands in for the inverse.
            return DiscretizingCycle{start, adjugate(it->second) * reach};
        }
    }
    return std::nullopt;
}

bool SolveState::step1_product_discretize() {
    for (int cid = 0; cid < static_cast<int>(info_.size()); ++cid) {
        if (!graph_.constraint_live(cid) || !info_[cid].product) continue;
        const Constraint& c = inst_.constraints[cid];
        const ProductFactors& f = *info_[cid].factors;
        CRState a = start_cr(c.u, f.perp_u, inst_.base);
        CRState b = start_cr(c.v, f.perp_v, inst_.base);
        auto win = run_parallel_crs(std::move(a), std::move(b));
        if (!win) {
            witness_ = "both chain reactions seeded by product constraint " + std::to_string(cid) + " on (" +
                       std::to_string(c.u) + ", " + std::to_string(c.v) + ") conflict";
            return false;
        }
        commit(*win);
    }
    return true;
}

bool SolveState::step2_cycle_discretize() {
    for (int q = 0; q < inst_.n; ++q) {
        if (!graph_.qubit_live(q)) continue;
        auto cycle = find_discretizing_cycle(q);
        if (!cycle) {
            CRState cr = induce_cr(q, {FieldElement(1), FieldElement(0)}, inst_.base);
            if (!cr.complete()) throw std::logic_error("free-choice chain reaction conflicted: " + cr.witness);
            commit(cr);
            continue;
        }
        Eigenvectors eig = eigenvectors(cycle->matrix, inst_.base, &cache_, opts_.max_depth);
        if (opts_.on_eigen) opts_.on_eigen(cycle->matrix, eig);
        if (eig.degenerate) throw std::logic_error("discretizing cycle matrix is proportional to the identity");
        std::optional<CRState> win;
        if (eig.pairs.size() == 1) {
            CRState cr = induce_cr(cycle->base, eig.pairs[0].vec, eig.pairs[0].level);
            if (cr.complete()) win = std::move(cr);
        } else {
            win = run_parallel_crs(start_cr(cycle->base, eig.pairs[0].vec, eig.pairs[0].level),
                                   start_cr(cycle->base, eig.pairs[1].vec, eig.pairs[1].level));
        }
        if (!win) {
            witness_ = "every eigenvector seed of the discretizing cycle at qubit " + std::to_string(cycle->base) +
                       " conflicts";
            return false;
        }
        commit(*win);
    }
    return true;
}

void SolveState::normalize(Assignment& out) {
    out = Assignment{};
    for (const auto& [q, s] : working_.singles) {
        NormalizedVector nv = normalize_vector({s.vec[0], s.vec[1]}, s.level, &cache_, opts_.max_depth);
        out.singles[q] = QubitState{nv.level, {nv.entries[0], nv.entries[1]}};
    }
    for (const auto& [key, p] : working_.pairs) {
        NormalizedVector nv =
            normalize_vector({p.vec[0], p.vec[1], p.vec[2], p.vec[3]}, p.level, &cache_, opts_.max_depth);
        out.pairs[key] = PairState{nv.level, {nv.entries[0], nv.entries[1], nv.entries[2], nv.entries[3]}};
    }
}

SolveResult solve(const Instance& inst, const SolveOptions& opts) {
    OpCounter ops;
    SolveState st(inst, opts);
    SolveResult res;
    auto finish = [&](bool sat) {
        res.sat = sat;
        res.phase = st.phase();
        res.metrics = st.metrics();
        res.metrics.field_ops = ops.count();
        if (!sat) res.witness = st.witness();
        return res;
    };
    st.set_phase(Phase::Preprocessing);
    if (!apply_preprocessing(st)) return finish(false);
    st.set_phase(Phase::ProductDiscretization);
    if (!st.step1_product_discretize()) return finish(false);
    st.set_phase(Phase::CycleDiscretization);
    if (!st.step2_cycle_discretize()) return finish(false);
    st.set_phase(Phase::Normalization);
    st.normalize(res.assignment);
    return finish(true);
}

}  // namespace q2sat
