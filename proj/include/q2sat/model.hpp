#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "q2sat/field.hpp"

namespace q2sat {

// Row <eta| in the basis |00>, |01>, |10>, |11> of (u, v); a state x is allowed
// iff eta . x == 0 (no conjugation).
using Row = std::array<FieldElement, 4>;
using Vec2 = std::array<FieldElement, 2>;

struct Constraint {
    int id = 0;
    int u = 0;
    int v = 0;
    Row eta;
};

struct Instance {
    int n = 0;
    FieldPtr field;
    LevelPtr base;
    std::vector<Constraint> constraints;

    static Instance empty(int n, FieldPtr field);
    // Appends with id == constraints.size(). Coefficients are lifted to `base`.
    void add(int u, int v, const Row& eta);
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line, int column);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

Instance parse_instance(std::string_view text);
std::string serialize_instance(const Instance& inst);
// Same field polynomial and box, qubit count, and constraint rows (exact values).
bool structurally_equal(const Instance& a, const Instance& b);

// The Gaussian integers with i in the upper half plane.
FieldPtr gaussian_field();

struct QubitState {
    LevelPtr level;
    Vec2 vec;
};

struct PairState {
    LevelPtr level;
    Row vec;  // amplitudes on |00>, |01>, |10>, |11> of (first, second)
};

struct Assignment {
    std::map<int, QubitState> singles;
    std::map<std::pair<int, int>, PairState> pairs;  // key (first, second), first < second
};

std::string serialize_assignment(const Assignment& a);
inline constexpr std::string_view kUnsatText = "UNSAT\n";
// nullopt for an "UNSAT" file. Levels are interned through `levels`, which must be
// built on the instance field.
std::optional<Assignment> parse_assignment(std::string_view text, const Instance& inst, LevelInterner& levels);

// ----------------------------------------------------------------- 2-CNF

struct Cnf {
    int num_vars = 0;
    // DIMACS literals: +k is x_k, -k is its negation (k >= 1).
    std::vector<std::vector<int>> clauses;
};

Cnf parse_dimacs(std::string_view text);
std::string serialize_dimacs(const Cnf& f);
// One product constraint <c_a| (x) <c_b| per clause, c = 1 for a negated literal.
// Unit clauses and clauses on a single variable are rejected.
Instance embed_cnf(const Cnf& f);

}  // namespace q2sat
