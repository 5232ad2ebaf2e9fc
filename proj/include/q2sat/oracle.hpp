#pragma once

#include <cstdint>
#include <string>

#include "q2sat/model.hpp"

namespace q2sat {

inline constexpr int kOracleMaxQubits = 12;

// dim of the joint kernel of all constraints on (C^2)^{(x) n}, by exact dense
// elimination over the base field (independent of the tower arithmetic).
// Connected components are eliminated separately and their dimensions multiplied,
// so only the largest component is bounded by kOracleMaxQubits.
std::uint64_t brute_kernel_dim(const Instance& inst);

struct VerifyResult {
    enum class Status { Ok, CoverageGap, Violation, NotNormalized };
    Status status = Status::Ok;
    int constraint_id = -1;  // Violation
    int qubit = -1;          // CoverageGap / NotNormalized
    std::string detail;

    bool ok() const { return status == Status::Ok; }
};

// Checks every constraint on the tensor product of the assigned factors, and the
// unit norm of every factor. Factors over unrelated towers are compared inside a
// common compositum.
VerifyResult verify_assignment(const Instance& inst, const Assignment& a);

// Implication graph + strongly connected components.
bool classical_2sat_reference(const Cnf& f);
// Exhaustive evaluation, num_vars <= 24.
bool truth_table_sat(const Cnf& f);

}  // namespace q2sat
