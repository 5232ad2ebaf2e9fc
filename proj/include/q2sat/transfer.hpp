#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "q2sat/field.hpp"
#include "q2sat/model.hpp"

namespace q2sat {

// Row-major [[m00, m01], [m10, m11]].
struct Mat2 {
    std::array<FieldElement, 4> m;

    const FieldElement& operator()(int r, int c) const { return m[2 * r + c]; }
    FieldElement& operator()(int r, int c) { return m[2 * r + c]; }

    static Mat2 identity();
    static Mat2 of(const FieldElement& a, const FieldElement& b, const FieldElement& c, const FieldElement& d);
};

Mat2 operator*(const Mat2& a, const Mat2& b);
Vec2 operator*(const Mat2& a, const Vec2& v);
Mat2 operator-(const Mat2& a);
Mat2 adjugate(const Mat2& a);
FieldElement det(const Mat2& a);
FieldElement trace(const Mat2& a);

// Maps the state on the source endpoint to the state forced on the other one:
// forward is u -> v with T = [[-e01, -e11], [e00, e10]]; backward is v -> u and
// equals -adj of the forward matrix.
Mat2 transfer_of(const Row& eta, bool forward);
Mat2 transfer_of(const Constraint& c, bool forward);
// Row with forward transfer `t` (inverse of transfer_of up to the factor 1).
Row row_from_transfer(const Mat2& t);

// walk[0] is applied first: returns walk[k-1] * ... * walk[0].
Mat2 compose(std::span<const Mat2> walk);

// A = c B for some nonzero c; false when either side is zero.
bool proportional(std::span<const FieldElement> a, std::span<const FieldElement> b);
// A = c B for some c, zero allowed.
bool proportional_star(std::span<const FieldElement> a, std::span<const FieldElement> b);
bool proportional(const Vec2& a, const Vec2& b);
bool proportional(const Mat2& a, const Mat2& b);
bool proportional_star(const Mat2& a, const Mat2& b);
bool is_zero_vec(std::span<const FieldElement> a);

// A row is product iff its reshaped 2x2 determinant vanishes.
bool is_product(const Row& eta);

struct ProductFactors {
    Vec2 gamma_u;  // eta . (a (x) b) = (gamma_u . a) (gamma_v . b)
    Vec2 gamma_v;
    Vec2 perp_u;   // gamma_u . perp_u == 0
    Vec2 perp_v;
};
// Requires is_product(eta). Factors are taken up to scale.
ProductFactors product_factors(const Row& eta);

// (-g1, g0): the annihilator of the functional g.
Vec2 annihilator(const Vec2& g);

struct EigenPair {
    FieldElement lambda;
    Vec2 vec;
    LevelPtr level;
};

struct Eigenvectors {
    bool degenerate = false;  // T proportional to I: every vector is an eigenvector
    std::vector<EigenPair> pairs;
};

// One eigenvector per distinct eigenvalue, computed over the level extended by
// sqrt(tr^2 - 4 det).
Eigenvectors eigenvectors(const Mat2& t, const LevelPtr& level, TowerCache* cache = nullptr,
                          int max_depth = TowerLevel::kMaxDepth);

}  // namespace q2sat
