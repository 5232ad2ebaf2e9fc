#include "q2sat/transfer.hpp"

#include <stdexcept>

namespace q2sat {

Mat2 Mat2::identity() { return of(FieldElement(1), FieldElement(0), FieldElement(0), FieldElement(1)); }

Mat2 Mat2::of(const FieldElement& a, const FieldElement& b, const FieldElement& c, const FieldElement& d) {
    return Mat2{{a, b, c, d}};
}

Mat2 operator*(const Mat2& a, const Mat2& b) {
    return Mat2::of(a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0), a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1),
                    a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0), a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1));
}

Vec2 operator*(const Mat2& a, const Vec2& v) {
    return {a(0, 0) * v[0] + a(0, 1) * v[1], a(1, 0) * v[0] + a(1, 1) * v[1]};
}

Mat2 operator-(const Mat2& a) { return Mat2::of(-a(0, 0), -a(0, 1), -a(1, 0), -a(1, 1)); }

Mat2 adjugate(const Mat2& a) { return Mat2::of(a(1, 1), -a(0, 1), -a(1, 0), a(0, 0)); }

FieldElement det(const Mat2& a) { return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0); }

FieldElement trace(const Mat2& a) { return a(0, 0) + a(1, 1); }

Mat2 transfer_of(const Row& eta, bool forward) {
    if (forward) return Mat2::of(-eta[1], -eta[3], eta[0], eta[2]);
    return Mat2::of(-eta[2], -eta[3], eta[0], eta[1]);
}

Mat2 transfer_of(const Constraint& c, bool forward) { return transfer_of(c.eta, forward); }

Row row_from_transfer(const Mat2& t) { return {t(1, 0), -t(0, 0), t(1, 1), -t(0, 1)}; }

Mat2 compose(std::span<const Mat2> walk) {
    if (walk.empty()) throw std::invalid_argument("compose needs a nonempty walk");
    Mat2 acc = walk[0];
    for (std::size_t i = 1; i < walk.size(); ++i) acc = walk[i] * acc;
    return acc;
}

bool is_zero_vec(std::span<const FieldElement> a) {
    for (const auto& x : a)
        if (!is_zero(x)) return false;
    return true;
}

bool proportional(std::span<const FieldElement> a, std::span<const FieldElement> b) {
    if (a.size() != b.size()) throw std::invalid_argument("proportional: shape mismatch");
    std::size_t p = b.size();
    for (std::size_t i = 0; i < b.size(); ++i)
        if (!is_zero(b[i])) {
            p = i;
            break;
        }
    if (p == b.size() || is_zero(a[p])) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i == p) continue;
        if (!fe_eq(a[i] * b[p], a[p] * b[i])) return false;
    }
    return true;
}

bool proportional_star(std::span<const FieldElement> a, std::span<const FieldElement> b) {
    return is_zero_vec(a) || proportional(a, b);
}

bool proportional(const Vec2& a, const Vec2& b) { return proportional(std::span(a), std::span(b)); }

bool proportional(const Mat2& a, const Mat2& b) { return proportional(std::span(a.m), std::span(b.m)); }

bool proportional_star(const Mat2& a, const Mat2& b) { return proportional_star(std::span(a.m), std::span(b.m)); }

bool is_product(const Row& eta) { return is_zero(eta[0] * eta[3] - eta[1] * eta[2]); }

Vec2 annihilator(const Vec2& g) { return {-g[1], g[0]}; }

ProductFactors product_factors(const Row& eta) {
    ProductFactors f;
    // Reshaped H = [[e00, e01], [e10, e11]] = gamma_u gamma_v^T.
    if (!is_zero(eta[0]) || !is_zero(eta[2]))
        f.gamma_u = {eta[0], eta[2]};
    else
        f.gamma_u = {eta[1], eta[3]};
    if (!is_zero(eta[0]) || !is_zero(eta[1]))
        f.gamma_v = {eta[0], eta[1]};
    else
        f.gamma_v = {eta[2], eta[3]};
    if (is_zero_vec(f.gamma_u) || is_zero_vec(f.gamma_v)) throw std::invalid_argument("zero constraint row");
    f.perp_u = annihilator(f.gamma_u);
    f.perp_v = annihilator(f.gamma_v);
    return f;
}

Eigenvectors eigenvectors(const Mat2& t, const LevelPtr& level, TowerCache* cache, int max_depth) {
    Eigenvectors out;
    if (is_zero(t(0, 1)) && is_zero(t(1, 0)) && fe_eq(t(0, 0), t(1, 1))) {
        if (is_zero(t(0, 0))) throw std::invalid_argument("eigenvectors of the zero matrix");
        out.degenerate = true;
        return out;
    }
    const FieldElement tr = trace(t);
    const FieldElement disc = tr * tr - FieldElement(4) * det(t);
    SqrtResult s = adjoin_sqrt(level, disc, cache, max_depth);
    const FieldElement two(2);
    const FieldElement half(mpq_class(1, 2));
    std::vector<FieldElement> twice_lambdas{tr + s.root};
    if (!is_zero(s.root)) twice_lambdas.push_back(tr - s.root);
    for (const FieldElement& tl : twice_lambdas) {
        // Kernel of T - lambda I from its first row, else from its second.
        Vec2 w{two * t(0, 1), tl - two * t(0, 0)};
        if (is_zero_vec(w)) w = {tl - two * t(1, 1), two * t(1, 0)};
        out.pairs.push_back({tl * half, {w[0].lifted(s.level), w[1].lifted(s.level)}, s.level});
    }
    return out;
}

}  // namespace q2sat
