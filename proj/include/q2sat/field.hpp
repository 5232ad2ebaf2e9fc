#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "q2sat/number_field.hpp"
#include "q2sat/numeric.hpp"

namespace q2sat {

// Mixing elements of unrelated towers, or exceeding the depth bound.
class TowerError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Division by zero, zero vector normalization, conjugation outside the tower.
class ArithmeticError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

using Coeffs = std::vector<mpz_class>;

class TowerLevel;
using LevelPtr = std::shared_ptr<const TowerLevel>;

/*
 * F[t_1]...[t_k]: each t_j is the principal square root of an integral element
 * R_j of the previous level. Numerators are integer polynomials of degree < d in w
 * and degree <= 1 in every t_j; coefficient index = mask * d + (power of w), with
 * bit j-1 of mask selecting t_j. Extensions may be redundant (t_j can already lie
 * in the previous level).
 */
class TowerLevel {
public:
    static constexpr int kMaxDepth = 3;
    // Composita built while verifying foreign assignments.
    static constexpr int kMaxScratchDepth = 8;

    static LevelPtr base(FieldPtr field);
    // No perfect-square shortcut; `radicand` must be nonzero, of parent width.
    static LevelPtr adjoin(const LevelPtr& parent, Coeffs radicand, int max_depth = kMaxDepth);

    const NumberField& field() const { return *field_; }
    const FieldPtr& field_ptr() const { return field_; }
    int depth() const { return depth_; }
    std::size_t width() const { return width_; }
    const LevelPtr& parent() const { return parent_; }
    const Coeffs& radicand() const { return radicand_; }
    bool radicand_negative_real() const { return negative_real_; }

    // Conjugation image of generator g (0 = w, j = t_j) as an integral numerator of
    // this level, when it lies in the tower.
    const std::optional<Coeffs>& conj_image(int g) const { return conj_images_[g]; }
    bool conj_closed() const;

    // Certified disk for t_depth fixed at construction.
    const Ball& branch_certificate() const { return certificate_; }
    long certificate_precision() const { return certificate_w_; }

    // Disks for generators 0..depth at scale 2^-w; nullopt when w is too small.
    std::optional<std::vector<Ball>> generator_balls(long w) const;

    // Ancestor at the given depth (this level for depth == depth()).
    const TowerLevel& ancestor(int depth) const;

    // "[R_1|R_2|...]" with each radicand written as "1:c0,c1,...".
    std::string descriptor() const;

private:
    TowerLevel() = default;

    FieldPtr field_;
    LevelPtr parent_;
    int depth_ = 0;
    std::size_t width_ = 0;
    Coeffs radicand_;
    bool negative_real_ = false;
    std::vector<std::optional<Coeffs>> conj_images_;
    Ball certificate_;
    long certificate_w_ = 0;
    mutable std::mutex cache_mu_;
    mutable std::map<long, std::vector<Ball>> ball_cache_;
};

bool same_level(const TowerLevel& a, const TowerLevel& b);
// True when `a` equals `b` or one of its ancestors.
bool is_prefix(const TowerLevel& a, const TowerLevel& b);

/*
 * (1/mu) * f(w, t_1, ..., t_k) with mu > 0. A null level denotes a rational
 * constant that lifts into any tower.
 */
class FieldElement {
public:
    FieldElement();
    explicit FieldElement(long v);
    explicit FieldElement(const mpz_class& v);
    explicit FieldElement(const mpq_class& v);
    FieldElement(LevelPtr level, mpz_class mu, Coeffs coeffs);

    static FieldElement zero(const LevelPtr& level);
    static FieldElement from_rational(const LevelPtr& level, const mpq_class& v);
    static FieldElement generator(const LevelPtr& level, int g);

    const LevelPtr& level() const { return level_; }
    const mpz_class& mu() const { return mu_; }
    const Coeffs& coeffs() const { return coeffs_; }
    std::size_t width() const { return coeffs_.size(); }

    bool syntactically_zero() const;
    // The value as a rational when only the constant coefficient is nonzero.
    std::optional<mpq_class> as_rational() const;
    FieldElement lifted(const LevelPtr& to) const;
    // Divides out gcd(mu, coeffs).
    FieldElement reduced() const;
    std::size_t bits() const;
    std::string to_string() const;

private:
    LevelPtr level_;
    mpz_class mu_;
    Coeffs coeffs_;
};

// Deepest of the two levels; throws TowerError if neither is a prefix of the other.
LevelPtr common_level(const LevelPtr& a, const LevelPtr& b);

FieldElement operator+(const FieldElement& a, const FieldElement& b);
FieldElement operator-(const FieldElement& a, const FieldElement& b);
FieldElement operator-(const FieldElement& a);
FieldElement operator*(const FieldElement& a, const FieldElement& b);
FieldElement inverse(const FieldElement& a);
FieldElement operator/(const FieldElement& a, const FieldElement& b);

// Exact equality of the denoted complex numbers.
bool fe_eq(const FieldElement& a, const FieldElement& b);
bool is_zero(const FieldElement& a);

FieldElement conjugate(const FieldElement& a);

// Box of width <= 2^-precision_bits containing the value.
ComplexBox numeric_box(const FieldElement& a, long precision_bits);

// Interns adjoined and conjugation-closed levels so that equal radicands over
// the same parent yield the same level object. Confined to one solve.
class TowerCache {
public:
    LevelPtr adjoin(const LevelPtr& parent, const Coeffs& radicand, int max_depth);
    LevelPtr closure(const LevelPtr& level, int max_depth);

private:
    std::map<std::pair<const TowerLevel*, std::string>, LevelPtr> adjoined_;
    std::map<const TowerLevel*, LevelPtr> closed_;
    std::vector<LevelPtr> keep_alive_;
};

struct SqrtResult {
    LevelPtr level;
    FieldElement root;
};

// Square root of d (an element of `level` or of a prefix). A rational d whose
// numerator*denominator is a perfect square keeps the level and returns a
// rational root.
SqrtResult adjoin_sqrt(const LevelPtr& level, const FieldElement& d, TowerCache* cache = nullptr,
                       int max_depth = TowerLevel::kMaxDepth);

// Smallest extension of `level` (by further square roots) on which complex
// conjugation maps every generator into the tower.
LevelPtr close_under_conjugation(const LevelPtr& level, TowerCache* cache = nullptr,
                                 int max_depth = TowerLevel::kMaxDepth);

struct NormalizedVector {
    std::vector<FieldElement> entries;
    LevelPtr level;
};

// v / sqrt(<v|v>) over `at` extended by sqrt(<v|v>) when needed.
NormalizedVector normalize_vector(const std::vector<FieldElement>& v, const LevelPtr& at,
                                  TowerCache* cache = nullptr,
                                  int max_depth = TowerLevel::kMaxDepth);

// Hermitian inner product <a|b>.
FieldElement inner_product(const std::vector<FieldElement>& a, const std::vector<FieldElement>& b);

// Counts field operations performed on this thread while alive; nested counters
// forward their totals to the enclosing one.
class OpCounter {
public:
    OpCounter();
    ~OpCounter();
    OpCounter(const OpCounter&) = delete;
    OpCounter& operator=(const OpCounter&) = delete;
    std::uint64_t count() const { return count_; }

private:
    std::uint64_t count_ = 0;
    std::uint64_t* previous_;
};

// Text form "mu:c0,c1,..." and level specs; parse_level_spec interns prefixes.
FieldElement parse_element(const LevelPtr& level, std::string_view text);
Coeffs parse_coeffs(std::string_view text, std::size_t width);

class LevelInterner {
public:
    explicit LevelInterner(FieldPtr field);
    LevelPtr get(std::string_view descriptor);
    const LevelPtr& base() const { return base_; }

private:
    FieldPtr field_;
    LevelPtr base_;
    std::map<std::string, LevelPtr, std::less<>> levels_;
};

}  // namespace q2sat
