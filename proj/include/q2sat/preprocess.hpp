#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "q2sat/model.hpp"
#include "q2sat/solver.hpp"

namespace q2sat {

struct PairSummary {
    int u = 0, v = 0;  // u < v; rows are oriented to (u, v)
    int rank = 0;
    std::vector<int> kept;       // constraint ids that raised the rank, in input order
    std::optional<Row> kernel;   // rank 3 only
    bool kernel_is_product = false;
    Vec2 a, b;                   // kernel = a (x) b when product
};

// `rows` are (constraint id, row oriented to (u, v)) in input order.
PairSummary summarize_pair(int u, int v, const std::vector<std::pair<int, Row>>& rows);

// Row of constraint c written in the basis of (min, max).
Row oriented_row(const Constraint& c);

// Fills the graph of `st` with the surviving constraints, records rank-3 pairs and
// runs their forced chain reactions. False on UNSAT (witness set on `st`).
bool apply_preprocessing(SolveState& st);

}  // namespace q2sat
