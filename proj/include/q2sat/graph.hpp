#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace q2sat {

struct Edge {
    int nbr;
    int cid;
    bool forward;  // this endpoint is the constraint's u
};

/*
 * Interaction graph with lazy deletion. Dead entries are dropped from a qubit's
 * list when live_edges() is called on it; between removals the lists only shrink,
 * so cursors held across calls stay valid as long as no removal happens.
 */
class InteractionGraph {
public:
    explicit InteractionGraph(int n);

    void add_constraint(int cid, int u, int v);

    int num_qubits() const { return static_cast<int>(adj_.size()); }
    bool qubit_live(int q) const { return qubit_live_[q] != 0; }
    bool constraint_live(int cid) const { return cid < static_cast<int>(constraint_live_.size()) && constraint_live_[cid] != 0; }
    int live_qubit_count() const { return live_qubits_; }
    std::size_t live_constraint_count() const { return live_constraints_; }

    // Compacts and returns the adjacency of q; every entry is live on return.
    const std::vector<Edge>& live_edges(int q);
    // Raw list (may contain dead entries).
    const std::vector<Edge>& edges(int q) const { return adj_[q]; }

    // Kills the qubits and every incident constraint.
    void remove_assigned(std::span<const int> qubits);

private:
    std::vector<std::vector<Edge>> adj_;
    std::vector<char> qubit_live_;
    std::vector<char> constraint_live_;
    std::vector<char> dirty_;
    int live_qubits_;
    std::size_t live_constraints_ = 0;
};

}  // namespace q2sat
