#include "q2sat/preprocess.hpp"

#include <algorithm>
#include <map>

#include "q2sat/transfer.hpp"

namespace q2sat {

namespace {

std::size_t first_nonzero(const Row& r) {
    for (std::size_t i = 0; i < 4; ++i)
        if (!is_zero(r[i])) return i;
    return 4;
}

std::string pair_text(int u, int v) { return "(" + std::to_string(u) + ", " + std::to_string(v) + ")"; }

}  // namespace

Row oriented_row(const Constraint& c) {
    if (c.u < c.v) return c.eta;
    return {c.eta[0], c.eta[2], c.eta[1], c.eta[3]};
}

PairSummary summarize_pair(int u, int v, const std::vector<std::pair<int, Row>>& rows) {
    PairSummary s;
    s.u = u;
    s.v = v;
    std::vector<Row> echelon;
    std::vector<std::size_t> pivots;
    for (const auto& [id, row] : rows) {
        if (echelon.size() == 4) break;
        Row r = row;
        for (std::size_t k = 0; k < echelon.size(); ++k) {
            const std::size_t p = pivots[k];
            if (is_zero(r[p])) continue;
            const FieldElement f = r[p], g = echelon[k][p];
            for (std::size_t j = 0; j < 4; ++j) r[j] = g * r[j] - f * echelon[k][j];
        }
        const std::size_t p = first_nonzero(r);
        if (p == 4) continue;
        s.kept.push_back(id);
        echelon.push_back(r);
        pivots.push_back(p);
    }
    s.rank = static_cast<int>(echelon.size());
    if (s.rank != 3) return s;

    // Row k is zero on the pivots of rows < k, so solve from the last row up.
    std::size_t free_col = 0;
    while (std::find(pivots.begin(), pivots.end(), free_col) != pivots.end()) ++free_col;
    Row x;
    for (auto& e : x) e = FieldElement(0);
    x[free_col] = FieldElement(1);
    for (int k = 2; k >= 0; --k) {
        const std::size_t p = pivots[static_cast<std::size_t>(k)];
        FieldElement acc(0);
        for (std::size_t j = 0; j < 4; ++j)
            if (j != p) acc = acc + echelon[static_cast<std::size_t>(k)][j] * x[j];
        x[p] = -acc / echelon[static_cast<std::size_t>(k)][p];
    }
    s.kernel = x;
    s.kernel_is_product = is_zero(x[0] * x[3] - x[1] * x[2]);
    if (s.kernel_is_product) {
        // x reshaped is a b^T: a is a nonzero column, b a nonzero row.
        s.a = (!is_zero(x[0]) || !is_zero(x[2])) ? Vec2{x[0], x[2]} : Vec2{x[1], x[3]};
        s.b = (!is_zero(x[0]) || !is_zero(x[1])) ? Vec2{x[0], x[1]} : Vec2{x[2], x[3]};
    }
    return s;
}

bool apply_preprocessing(SolveState& st) {
    const Instance& inst = st.instance();
    std::map<std::pair<int, int>, std::vector<std::pair<int, Row>>> groups;
    for (const Constraint& c : inst.constraints)
        groups[{std::min(c.u, c.v), std::max(c.u, c.v)}].emplace_back(c.id, oriented_row(c));

    std::vector<int> active;
    std::vector<PairSummary> rank3;
    for (const auto& [key, rows] : groups) {
        PairSummary s = summarize_pair(key.first, key.second, rows);
        if (s.rank == 4) {
            st.set_witness("constraints on " + pair_text(s.u, s.v) + " have full rank");
            return false;
        }
        if (s.rank <= 2)
            active.insert(active.end(), s.kept.begin(), s.kept.end());
        else
            rank3.push_back(std::move(s));
    }

    std::map<int, int> rank3_uses;
    for (const auto& s : rank3) {
        ++rank3_uses[s.u];
        ++rank3_uses[s.v];
    }
    std::map<int, Vec2> forced;
    for (const auto& s : rank3) {
        if (!s.kernel_is_product) {
            for (int q : {s.u, s.v})
                if (rank3_uses[q] > 1) {
                    st.set_witness("qubit " + std::to_string(q) + " is entangled by " + pair_text(s.u, s.v) +
                                   " and constrained by another rank-3 pair");
                    return false;
                }
            st.preassign_entangled(s.u);
            st.preassign_entangled(s.v);
            st.working().pairs[{s.u, s.v}] = PairState{inst.base, *s.kernel};
            st.metrics().max_coeff_bits =
                std::max({st.metrics().max_coeff_bits, (*s.kernel)[0].bits(), (*s.kernel)[1].bits(),
                          (*s.kernel)[2].bits(), (*s.kernel)[3].bits()});
            continue;
        }
        for (const auto& [q, vec] : {std::pair{s.u, s.a}, std::pair{s.v, s.b}}) {
            auto it = forced.find(q);
            if (it != forced.end() && !proportional(it->second, vec)) {
                st.set_witness("rank-3 pairs force conflicting states on qubit " + std::to_string(q));
                return false;
            }
            forced.emplace(q, vec);
        }
    }
    for (const auto& [q, vec] : forced) st.preassign_single(q, vec);

    std::sort(active.begin(), active.end());
    for (int cid : active) st.activate(cid);

    InteractionGraph& g = st.graph();
    for (const auto& s : rank3) {
        if (s.kernel_is_product) {
            for (const auto& [q, vec] : {std::pair{s.u, s.a}, std::pair{s.v, s.b}}) {
                if (!g.qubit_live(q)) continue;
                CRState cr = st.induce_cr(q, vec, inst.base);
                if (!cr.complete()) {
                    st.set_witness("chain reaction from rank-3 pair " + pair_text(s.u, s.v) + ": " + cr.witness);
                    return false;
                }
                st.commit(cr);
            }
            continue;
        }
        for (int q : {s.u, s.v})
            for (const Edge& e : g.live_edges(q))
                if (!st.constraint_is_product(e.cid)) {
                    st.set_witness("entangled pair " + pair_text(s.u, s.v) + " has the non-product constraint " +
                                   std::to_string(e.cid));
                    return false;
                }
        for (int q : {s.u, s.v}) {
            const std::vector<Edge> incident = g.live_edges(q);
            for (const Edge& e : incident) {
                if (!g.constraint_live(e.cid)) continue;
                const ProductFactors& f = st.factors(e.cid);
                CRState cr = st.induce_cr(e.nbr, e.forward ? f.perp_v : f.perp_u, inst.base);
                if (!cr.complete()) {
                    st.set_witness("chain reaction next to entangled pair " + pair_text(s.u, s.v) + ": " + cr.witness);
                    return false;
                }
                st.commit(cr);
            }
        }
    }
    for (const auto& s : rank3)
        if (!s.kernel_is_product) {
            const int qs[2] = {s.u, s.v};
            g.remove_assigned(qs);
        }
    return true;
}

}  // namespace q2sat
