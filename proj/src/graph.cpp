#include "q2sat/graph.hpp"

#include <stdexcept>

namespace q2sat {

InteractionGraph::InteractionGraph(int n)
    : adj_(static_cast<std::size_t>(n)), qubit_live_(static_cast<std::size_t>(n), 1), dirty_(static_cast<std::size_t>(n), 0),
      live_qubits_(n) {}

void InteractionGraph::add_constraint(int cid, int u, int v) {
    if (!qubit_live(u) || !qubit_live(v)) throw std::logic_error("constraint added on a removed qubit");
    if (cid >= static_cast<int>(constraint_live_.size())) constraint_live_.resize(static_cast<std::size_t>(cid) + 1, 0);
    if (constraint_live_[cid]) throw std::logic_error("constraint added twice");
    constraint_live_[cid] = 1;
    ++live_constraints_;
    adj_[u].push_back({v, cid, true});
    adj_[v].push_back({u, cid, false});
}

const std::vector<Edge>& InteractionGraph::live_edges(int q) {
    if (dirty_[q]) {
        std::erase_if(adj_[q], [&](const Edge& e) { return !constraint_live_[e.cid]; });
        dirty_[q] = 0;
    }
    return adj_[q];
}

void InteractionGraph::remove_assigned(std::span<const int> qubits) {
    for (int q : qubits) {
        if (!qubit_live_[q]) throw std::logic_error("qubit removed twice");
        qubit_live_[q] = 0;
        --live_qubits_;
        for (const Edge& e : adj_[q]) {
            if (!constraint_live_[e.cid]) continue;
            constraint_live_[e.cid] = 0;
            --live_constraints_;
            dirty_[e.nbr] = 1;
        }
        adj_[q].clear();
    }
}

}  // namespace q2sat
