#include "q2sat/field.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "q2sat/bigint.hpp"

namespace q2sat {

namespace {

thread_local std::uint64_t* op_sink = nullptr;

inline void count_op() {
    if (op_sink) ++*op_sink;
}

constexpr long kStartPrecision = 64;
constexpr long kMaxPrecision = 1L << 16;
// Branch certification stops here; failure means the radicand sits on the branch cut
// without an exact realness proof.
constexpr long kMaxCertificatePrecision = 1L << 12;

bool range_zero(const Coeffs& c, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
        if (sgn(c[i]) != 0) return false;
    return true;
}

bool all_zero(const Coeffs& c) { return range_zero(c, 0, c.size()); }

// Only the constant coefficient may be nonzero.
bool is_constant(const Coeffs& c) { return range_zero(c, 1, c.size()); }

Coeffs slice(const Coeffs& c, std::size_t b, std::size_t e) {
    return Coeffs(c.begin() + static_cast<std::ptrdiff_t>(b), c.begin() + static_cast<std::ptrdiff_t>(e));
}

Coeffs widened(const Coeffs& c, std::size_t w) {
    Coeffs r(c);
    r.resize(w);
    return r;
}

void add_into(Coeffs& a, const Coeffs& b) {
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
}

void sub_into(Coeffs& a, const Coeffs& b) {
    for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
}

Coeffs scaled(const Coeffs& a, const mpz_class& k) {
    Coeffs r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * k;
    return r;
}

int level_degree(const TowerLevel* L) { return L ? L->field().degree() : 1; }

std::size_t level_width(const TowerLevel* L) { return L ? L->width() : 1; }

Coeffs generator_coeffs(const TowerLevel& L, int g) {
    Coeffs c(L.width());
    const std::size_t d = static_cast<std::size_t>(L.field().degree());
    if (g == 0) {
        if (d == 1) throw std::logic_error("the generator of Q has no separate coefficient");
        c[1] = 1;
    } else {
        c[(std::size_t{1} << (g - 1)) * d] = 1;
    }
    return c;
}

Coeffs base_mul(const TowerLevel* L, const Coeffs& a, const Coeffs& b) {
    const int d = level_degree(L);
    if (d == 1) return Coeffs{a[0] * b[0]};
    const auto& p = L->field().poly();
    Coeffs prod(static_cast<std::size_t>(2 * d - 1));
    for (int i = 0; i < d; ++i) {
        if (sgn(a[i]) == 0) continue;
        for (int j = 0; j < d; ++j)
            mpz_addmul(prod[i + j].get_mpz_t(), a[i].get_mpz_t(), b[j].get_mpz_t());
    }
    for (int t = 2 * d - 2; t >= d; --t) {
        if (sgn(prod[t]) == 0) continue;
        const mpz_class c = prod[t];
        for (int i = 0; i < d; ++i)
            mpz_submul(prod[t - d + i].get_mpz_t(), c.get_mpz_t(), p[i].get_mpz_t());
        prod[t] = 0;
    }
    prod.resize(static_cast<std::size_t>(d));
    return prod;
}

Coeffs num_mul(const TowerLevel* L, const Coeffs& a, const Coeffs& b) {
    if (!L || L->depth() == 0) return base_mul(L, a, b);
    const TowerLevel* P = L->parent().get();
    const std::size_t h = L->width() / 2;
    const bool a1z = range_zero(a, h, 2 * h);
    const bool b1z = range_zero(b, h, 2 * h);
    Coeffs a0 = slice(a, 0, h), b0 = slice(b, 0, h);
    Coeffs low, high;
    if (a1z && b1z) {
        low = num_mul(P, a0, b0);
        high.assign(h, 0);
    } else if (a1z) {
        low = num_mul(P, a0, b0);
        high = num_mul(P, a0, slice(b, h, 2 * h));
    } else if (b1z) {
        low = num_mul(P, a0, b0);
        high = num_mul(P, slice(a, h, 2 * h), b0);
    } else {
        Coeffs a1 = slice(a, h, 2 * h), b1 = slice(b, h, 2 * h);
        Coeffs t0 = num_mul(P, a0, b0);
        Coeffs t2 = num_mul(P, a1, b1);
        add_into(a0, a1);
        add_into(b0, b1);
        high = num_mul(P, a0, b0);
        sub_into(high, t0);
        sub_into(high, t2);
        low = std::move(t0);
        add_into(low, num_mul(P, t2, L->radicand()));
    }
    low.insert(low.end(), high.begin(), high.end());
    return low;
}

Ball num_eval(const TowerLevel* L, const Coeffs& c, const std::vector<Ball>& gens, long w) {
    if (!L || L->depth() == 0) {
        const int d = level_degree(L);
        Ball acc = Ball::exact_integer(c[d - 1], w);
        for (int i = d - 2; i >= 0; --i)
            acc = ball::add(ball::mul(acc, gens[0], w), Ball::exact_integer(c[i], w));
        return acc;
    }
    const TowerLevel* P = L->parent().get();
    const std::size_t h = L->width() / 2;
    Ball lo = num_eval(P, slice(c, 0, h), gens, w);
    if (range_zero(c, h, 2 * h)) return lo;
    Ball hi = num_eval(P, slice(c, h, 2 * h), gens, w);
    return ball::add(lo, ball::mul(hi, gens[L->depth()], w));
}

bool num_is_zero(const TowerLevel* L, const Coeffs& c);

// Given a0^2 == a1^2 * R with a1 != 0, decide whether a0 + a1*t vanishes
// (the alternative being a0 - a1*t == 0).
bool branch_decides_zero(const TowerLevel& L, const Coeffs& a0, const Coeffs& a1) {
    const TowerLevel* P = L.parent().get();
    for (long w = kStartPrecision; w <= kMaxPrecision; w *= 2) {
        auto gens = L.generator_balls(w);
        if (!gens) continue;
        Ball e0 = num_eval(P, a0, *gens, w);
        Ball t = ball::mul(num_eval(P, a1, *gens, w), (*gens)[L.depth()], w);
        if (ball::excludes_zero(ball::add(e0, t))) return false;
        if (ball::excludes_zero(ball::sub(e0, t))) return true;
    }
    throw std::runtime_error("interval refinement did not separate conjugate candidates");
}

bool num_is_zero(const TowerLevel* L, const Coeffs& c) {
    if (all_zero(c)) return true;
    if (!L || L->depth() == 0) return false;
    const TowerLevel* P = L->parent().get();
    const std::size_t h = L->width() / 2;
    Coeffs a0 = slice(c, 0, h), a1 = slice(c, h, 2 * h);
    if (num_is_zero(P, a1)) return num_is_zero(P, a0);
    if (num_is_zero(P, a0)) return false;
    Coeffs n = num_mul(P, a0, a0);
    sub_into(n, num_mul(P, num_mul(P, a1, a1), L->radicand()));
    if (!num_is_zero(P, n)) return false;
    return branch_decides_zero(*L, a0, a1);
}

// Polynomials over Q, lowest degree first, no trailing zeros.
using QPoly = std::vector<mpq_class>;

void trim(QPoly& p) {
    while (!p.empty() && sgn(p.back()) == 0) p.pop_back();
}

QPoly qpoly_sub(const QPoly& a, const QPoly& b) {
    QPoly r(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    trim(r);
    return r;
}

QPoly qpoly_mul(const QPoly& a, const QPoly& b) {
    if (a.empty() || b.empty()) return {};
    QPoly r(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    trim(r);
    return r;
}

void qpoly_divmod(QPoly a, const QPoly& b, QPoly& q, QPoly& r) {
    q.assign(a.size() >= b.size() ? a.size() - b.size() + 1 : 0, 0);
    while (a.size() >= b.size() && !a.empty()) {
        const std::size_t shift = a.size() - b.size();
        mpq_class f = a.back() / b.back();
        q[shift] = f;
        for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= f * b[i];
        a.pop_back();
        trim(a);
    }
    trim(q);
    r = std::move(a);
}

std::pair<mpz_class, Coeffs> base_inverse(const TowerLevel* L, const Coeffs& c) {
    const int d = level_degree(L);
    if (d == 1) {
        if (sgn(c[0]) == 0) throw ArithmeticError("division by zero");
        return {mpz_class(abs(c[0])), Coeffs{mpz_class(sgn(c[0]))}};
    }
    const auto& p = L->field().poly();
    QPoly r0(p.begin(), p.end()), r1(c.begin(), c.end());
    trim(r1);
    if (r1.empty()) throw ArithmeticError("division by zero");
    QPoly s0, s1{mpq_class(1)};
    while (!r1.empty()) {
        QPoly q, r;
        qpoly_divmod(r0, r1, q, r);
        QPoly s2 = qpoly_sub(s0, qpoly_mul(q, s1));
        r0 = std::move(r1);
        r1 = std::move(r);
        s0 = std::move(s1);
        s1 = std::move(s2);
    }
    if (r0.size() != 1) throw ArithmeticError("element shares a factor with the minimal polynomial");
    QPoly u;
    for (const auto& x : s0) u.push_back(x / r0[0]);
    QPoly q, rem;
    qpoly_divmod(u, QPoly(p.begin(), p.end()), q, rem);
    rem.resize(static_cast<std::size_t>(d));
    mpz_class den = 1;
    for (const auto& x : rem) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), x.get_den_mpz_t());
    Coeffs out(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        mpq_class v = rem[i] * den;
        out[i] = v.get_num();
    }
    return {den, out};
}

// (mu, g) with g / mu == 1 / value(c).
std::pair<mpz_class, Coeffs> num_inverse(const TowerLevel* L, const Coeffs& c) {
    if (!L || L->depth() == 0) return base_inverse(L, c);
    const TowerLevel* P = L->parent().get();
    const std::size_t h = L->width() / 2;
    Coeffs a0 = slice(c, 0, h), a1 = slice(c, h, 2 * h);
    if (num_is_zero(P, a1)) {
        auto r = num_inverse(P, a0);
        r.second.resize(L->width());
        return r;
    }
    Coeffs n = num_mul(P, a0, a0);
    sub_into(n, num_mul(P, num_mul(P, a1, a1), L->radicand()));
    if (!num_is_zero(P, n)) {
        auto r = num_inverse(P, n);
        Coeffs lo = num_mul(P, a0, r.second);
        Coeffs hi = num_mul(P, a1, r.second);
        for (auto& x : hi) x = -x;
        lo.insert(lo.end(), hi.begin(), hi.end());
        return {r.first, lo};
    }
    // Redundant extension: a0 = +-a1*t, so the value is 0 or 2*a0.
    if (branch_decides_zero(*L, a0, a1)) throw ArithmeticError("division by zero");
    auto r = num_inverse(P, scaled(a0, 2));
    r.second.resize(L->width());
    return r;
}

// Numerator at T of f(images), where f is the numerator `c` at level S (a prefix of T).
Coeffs eval_at(const TowerLevel& T, const TowerLevel* S, const Coeffs& c,
               const std::vector<std::optional<Coeffs>>& images) {
    if (all_zero(c)) return Coeffs(T.width());
    if (!S || S->depth() == 0) {
        const int d = level_degree(S);
        if (d == 1 || T.field().omega_real() || is_constant(c)) return widened(c, T.width());
        if (!images[0]) throw ArithmeticError("conjugate of the field generator is not in the field");
        Coeffs acc(T.width());
        acc[0] = c[d - 1];
        for (int i = d - 2; i >= 0; --i) {
            acc = num_mul(&T, acc, *images[0]);
            acc[0] += c[i];
        }
        return acc;
    }
    const std::size_t h = S->width() / 2;
    Coeffs r = eval_at(T, S->parent().get(), slice(c, 0, h), images);
    Coeffs a1 = slice(c, h, 2 * h);
    if (!all_zero(a1)) {
        const auto& img = images[S->depth()];
        if (!img) throw ArithmeticError("conjugate of an adjoined root is not in the tower");
        add_into(r, num_mul(&T, eval_at(T, S->parent().get(), a1, images), *img));
    }
    return r;
}

std::vector<std::optional<Coeffs>> images_of(const TowerLevel& L) {
    std::vector<std::optional<Coeffs>> imgs;
    for (int g = 0; g <= L.depth(); ++g) imgs.push_back(L.conj_image(g));
    return imgs;
}

std::string coeffs_key(const Coeffs& c) {
    std::string s;
    for (const auto& x : c) {
        s += x.get_str(16);
        s += ',';
    }
    return s;
}

FieldElement make_element(LevelPtr L, mpz_class mu, Coeffs c) {
    FieldElement e(std::move(L), std::move(mu), std::move(c));
    const unsigned threshold =
        e.level() ? e.level()->field().gcd_threshold_bits() : NumberField::kDefaultGcdThreshold;
    if (e.mu() != 1 && bit_length(e.mu()) > threshold) return e.reduced();
    return e;
}

}  // namespace

// ---------------------------------------------------------------- TowerLevel

LevelPtr TowerLevel::base(FieldPtr field) {
    std::shared_ptr<TowerLevel> L(new TowerLevel());
    L->field_ = std::move(field);
    L->depth_ = 0;
    L->width_ = static_cast<std::size_t>(L->field_->degree());
    L->conj_images_.resize(1);
    if (L->field_->omega_conjugate()) L->conj_images_[0] = *L->field_->omega_conjugate();
    return L;
}

LevelPtr TowerLevel::adjoin(const LevelPtr& parent, Coeffs radicand, int max_depth) {
    if (!parent) throw TowerError("adjoin requires a parent level");
    if (parent->depth() + 1 > max_depth)
        throw TowerError("tower depth would exceed " + std::to_string(max_depth));
    if (radicand.size() != parent->width()) throw TowerError("radicand width does not match its level");
    const TowerLevel* P = parent.get();
    if (num_is_zero(P, radicand)) throw ArithmeticError("cannot adjoin the square root of zero");

    std::shared_ptr<TowerLevel> L(new TowerLevel());
    L->field_ = parent->field_;
    L->parent_ = parent;
    L->depth_ = parent->depth_ + 1;
    L->width_ = parent->width_ * 2;
    L->radicand_ = std::move(radicand);
    const int k = L->depth_;
    L->conj_images_.resize(static_cast<std::size_t>(k) + 1);
    for (int g = 0; g < k; ++g)
        if (parent->conj_images_[g]) L->conj_images_[g] = widened(*parent->conj_images_[g], L->width_);

    std::optional<Coeffs> conj_r;
    try {
        conj_r = eval_at(*P, P, L->radicand_, parent->conj_images_);
    } catch (const ArithmeticError&) {
        conj_r.reset();
    }
    if (conj_r) {
        Coeffs diff = *conj_r;
        sub_into(diff, L->radicand_);
        if (num_is_zero(P, diff)) {
            int sign = 0;
            for (long w = kStartPrecision; w <= kMaxPrecision && sign == 0; w *= 2) {
                auto gens = P->generator_balls(w);
                if (!gens) continue;
                Ball b = num_eval(P, L->radicand_, *gens, w);
                if (b.re > b.rad) sign = 1;
                else if (-b.re > b.rad) sign = -1;
            }
            if (sign == 0) throw std::runtime_error("could not determine the sign of a real radicand");
            L->negative_real_ = sign < 0;
            Coeffs img = generator_coeffs(*L, k);
            if (sign < 0)
                for (auto& x : img) x = -x;
            L->conj_images_[k] = std::move(img);
        } else {
            for (int i = 1; i < k; ++i) {
                if (parent->conj_images_[i]) continue;
                Coeffs ri = widened(parent->ancestor(i).radicand_, P->width_);
                Coeffs d2 = *conj_r;
                sub_into(d2, ri);
                if (num_is_zero(P, d2)) {
                    L->conj_images_[k] = generator_coeffs(*L, i);
                    L->conj_images_[i] = generator_coeffs(*L, k);
                    break;
                }
            }
        }
    }

    for (long w = kStartPrecision;; w *= 2) {
        if (w > kMaxCertificatePrecision)
            throw std::runtime_error("could not certify the principal square root branch");
        auto gens = L->generator_balls(w);
        if (!gens) continue;
        L->certificate_ = gens->back();
        L->certificate_w_ = w;
        break;
    }
    return L;
}

bool TowerLevel::conj_closed() const {
    for (const auto& img : conj_images_)
        if (!img) return false;
    return true;
}

const TowerLevel& TowerLevel::ancestor(int depth) const {
    const TowerLevel* L = this;
    while (L->depth_ > depth) L = L->parent_.get();
    return *L;
}

std::optional<std::vector<Ball>> TowerLevel::generator_balls(long w) const {
    {
        std::lock_guard<std::mutex> lock(cache_mu_);
        auto it = ball_cache_.find(w);
        if (it != ball_cache_.end()) return it->second;
    }
    std::vector<Ball> g(static_cast<std::size_t>(depth_) + 1);
    g[0] = field_->degree() == 1 ? Ball::exact_integer(-field_->poly()[0], w) : field_->omega_ball(w);
    for (int j = 1; j <= depth_; ++j) {
        const TowerLevel& Lj = ancestor(j);
        Ball r = num_eval(Lj.parent_.get(), Lj.radicand_, g, w);
        auto s = ball::principal_sqrt(r, Lj.negative_real_, w);
        if (!s) return std::nullopt;
        g[j] = *s;
    }
    std::lock_guard<std::mutex> lock(cache_mu_);
    ball_cache_.emplace(w, g);
    return g;
}

std::string TowerLevel::descriptor() const {
    std::string s = "[";
    for (int j = 1; j <= depth_; ++j) {
        if (j > 1) s += '|';
        s += "1:";
        const Coeffs& r = ancestor(j).radicand_;
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) s += ',';
            s += r[i].get_str();
        }
    }
    s += ']';
    return s;
}

bool same_level(const TowerLevel& a, const TowerLevel& b) {
    if (&a == &b) return true;
    if (a.depth() != b.depth()) return false;
    if (a.depth() == 0) return a.field().equivalent(b.field());
    return a.radicand() == b.radicand() && same_level(*a.parent(), *b.parent());
}

bool is_prefix(const TowerLevel& a, const TowerLevel& b) {
    if (a.depth() > b.depth()) return false;
    return same_level(a, b.ancestor(a.depth()));
}

LevelPtr common_level(const LevelPtr& a, const LevelPtr& b) {
    if (!a) return b;
    if (!b || a == b) return a;
    if (a->depth() >= b->depth()) {
        if (is_prefix(*b, *a)) return a;
    } else if (is_prefix(*a, *b)) {
        return b;
    }
    throw TowerError("elements belong to incompatible towers");
}

// -------------------------------------------------------------- FieldElement

FieldElement::FieldElement() : mu_(1), coeffs_{mpz_class(0)} {}

FieldElement::FieldElement(long v) : mu_(1), coeffs_{mpz_class(v)} {}

FieldElement::FieldElement(const mpz_class& v) : mu_(1), coeffs_{v} {}

FieldElement::FieldElement(const mpq_class& v) : mu_(v.get_den()), coeffs_{v.get_num()} {}

FieldElement::FieldElement(LevelPtr level, mpz_class mu, Coeffs coeffs)
    : level_(std::move(level)), mu_(std::move(mu)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != level_width(level_.get()))
        throw TowerError("coefficient count does not match the level width");
    if (sgn(mu_) == 0) throw ArithmeticError("zero denominator");
    if (sgn(mu_) < 0) {
        mu_ = -mu_;
        for (auto& x : coeffs_) x = -x;
    }
}

FieldElement FieldElement::zero(const LevelPtr& level) {
    return FieldElement(level, 1, Coeffs(level_width(level.get())));
}

FieldElement FieldElement::from_rational(const LevelPtr& level, const mpq_class& v) {
    Coeffs c(level_width(level.get()));
    c[0] = v.get_num();
    return FieldElement(level, v.get_den(), std::move(c));
}

FieldElement FieldElement::generator(const LevelPtr& level, int g) {
    return FieldElement(level, 1, generator_coeffs(*level, g));
}

bool FieldElement::syntactically_zero() const { return all_zero(coeffs_); }

std::optional<mpq_class> FieldElement::as_rational() const {
    if (!is_constant(coeffs_)) return std::nullopt;
    mpq_class q(coeffs_[0], mu_);
    q.canonicalize();
    return q;
}

FieldElement FieldElement::lifted(const LevelPtr& to) const {
    if (level_ == to) return *this;
    if (!to) {
        auto q = as_rational();
        if (!q) throw TowerError("cannot drop a non-rational element to the rationals");
        return FieldElement(*q);
    }
    if (level_ && !is_prefix(*level_, *to)) throw TowerError("lift target does not extend the element's level");
    if (level_ && !(level_->field().equivalent(to->field())))
        throw TowerError("lift across different base fields");
    return FieldElement(to, mu_, widened(coeffs_, to->width()));
}

FieldElement FieldElement::reduced() const {
    mpz_class g = mu_;
    for (const auto& x : coeffs_) {
        if (g == 1) break;
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
    }
    if (g == 1) return *this;
    Coeffs c(coeffs_.size());
    for (std::size_t i = 0; i < c.size(); ++i) mpz_divexact(c[i].get_mpz_t(), coeffs_[i].get_mpz_t(), g.get_mpz_t());
    mpz_class mu;
    mpz_divexact(mu.get_mpz_t(), mu_.get_mpz_t(), g.get_mpz_t());
    return FieldElement(level_, mu, std::move(c));
}

std::size_t FieldElement::bits() const {
    std::size_t b = bit_length(mu_);
    for (const auto& x : coeffs_) b = std::max(b, bit_length(x));
    return b;
}

std::string FieldElement::to_string() const {
    std::string s = mu_.get_str();
    s += ':';
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        if (i) s += ',';
        s += coeffs_[i].get_str();
    }
    return s;
}

FieldElement operator+(const FieldElement& a, const FieldElement& b) {
    count_op();
    LevelPtr L = common_level(a.level(), b.level());
    const std::size_t w = level_width(L.get());
    Coeffs A = widened(a.coeffs(), w);
    const Coeffs& bc = b.coeffs();
    if (a.mu() == b.mu()) {
        for (std::size_t i = 0; i < bc.size(); ++i) A[i] += bc[i];
        return make_element(L, a.mu(), std::move(A));
    }
    for (auto& x : A) x *= b.mu();
    for (std::size_t i = 0; i < bc.size(); ++i) mpz_addmul(A[i].get_mpz_t(), bc[i].get_mpz_t(), a.mu().get_mpz_t());
    return make_element(L, a.mu() * b.mu(), std::move(A));
}

FieldElement operator-(const FieldElement& a) {
    count_op();
    Coeffs c(a.coeffs());
    for (auto& x : c) x = -x;
    return FieldElement(a.level(), a.mu(), std::move(c));
}

FieldElement operator-(const FieldElement& a, const FieldElement& b) {
    count_op();
    LevelPtr L = common_level(a.level(), b.level());
    const std::size_t w = level_width(L.get());
    Coeffs A = widened(a.coeffs(), w);
    const Coeffs& bc = b.coeffs();
    if (a.mu() == b.mu()) {
        for (std::size_t i = 0; i < bc.size(); ++i) A[i] -= bc[i];
        return make_element(L, a.mu(), std::move(A));
    }
    for (auto& x : A) x *= b.mu();
    for (std::size_t i = 0; i < bc.size(); ++i) mpz_submul(A[i].get_mpz_t(), bc[i].get_mpz_t(), a.mu().get_mpz_t());
    return make_element(L, a.mu() * b.mu(), std::move(A));
}

FieldElement operator*(const FieldElement& a, const FieldElement& b) {
    count_op();
    LevelPtr L = common_level(a.level(), b.level());
    const std::size_t w = level_width(L.get());
    mpz_class mu = a.mu() * b.mu();
    if (is_constant(a.coeffs())) return make_element(L, mu, widened(scaled(b.coeffs(), a.coeffs()[0]), w));
    if (is_constant(b.coeffs())) return make_element(L, mu, widened(scaled(a.coeffs(), b.coeffs()[0]), w));
    return make_element(L, mu, num_mul(L.get(), widened(a.coeffs(), w), widened(b.coeffs(), w)));
}

FieldElement inverse(const FieldElement& a) {
    count_op();
    auto [mu, c] = num_inverse(a.level().get(), a.coeffs());
    for (auto& x : c) x *= a.mu();
    return make_element(a.level(), mu, std::move(c));
}

FieldElement operator/(const FieldElement& a, const FieldElement& b) { return a * inverse(b); }

bool fe_eq(const FieldElement& a, const FieldElement& b) {
    count_op();
    LevelPtr L = common_level(a.level(), b.level());
    const std::size_t w = level_width(L.get());
    if (a.mu() == b.mu() && widened(a.coeffs(), w) == widened(b.coeffs(), w)) return true;
    // mu_b * num_a - mu_a * num_b, i.e. both tower components of the cross difference
    Coeffs diff = scaled(widened(a.coeffs(), w), b.mu());
    const Coeffs& bc = b.coeffs();
    for (std::size_t i = 0; i < bc.size(); ++i) mpz_submul(diff[i].get_mpz_t(), bc[i].get_mpz_t(), a.mu().get_mpz_t());
    return num_is_zero(L.get(), diff);
}

bool is_zero(const FieldElement& a) {
    count_op();
    return num_is_zero(a.level().get(), a.coeffs());
}

FieldElement conjugate(const FieldElement& a) {
    count_op();
    if (!a.level()) return a;
    const TowerLevel& L = *a.level();
    return FieldElement(a.level(), a.mu(), eval_at(L, &L, a.coeffs(), images_of(L)));
}

ComplexBox numeric_box(const FieldElement& a, long precision_bits) {
    if (precision_bits < 8) precision_bits = 8;
    const TowerLevel* L = a.level().get();
    for (long w = std::max(kStartPrecision, precision_bits + 8);; w *= 2) {
        if (w > kMaxPrecision * 4) throw std::runtime_error("numeric_box precision limit reached");
        std::vector<Ball> gens;
        if (L) {
            auto g = L->generator_balls(w);
            if (!g) continue;
            gens = std::move(*g);
        } else {
            gens.push_back(Ball{0, 0, 0});
        }
        Ball b = ball::div_int(num_eval(L, a.coeffs(), gens, w), a.mu());
        mpz_class limit = mpz_class(1) << static_cast<unsigned long>(w - precision_bits);
        if (2 * b.rad <= limit) return ball::to_box(b, w);
    }
}

// ----------------------------------------------------------------- Towers

LevelPtr TowerCache::adjoin(const LevelPtr& parent, const Coeffs& radicand, int max_depth) {
    auto key = std::make_pair(parent.get(), coeffs_key(radicand));
    auto it = adjoined_.find(key);
    if (it != adjoined_.end()) return it->second;
    LevelPtr L = TowerLevel::adjoin(parent, radicand, max_depth);
    keep_alive_.push_back(parent);
    adjoined_.emplace(key, L);
    return L;
}

LevelPtr TowerCache::closure(const LevelPtr& level, int max_depth) {
    auto it = closed_.find(level.get());
    if (it != closed_.end()) return it->second;
    LevelPtr c = close_under_conjugation(level, this, max_depth);
    keep_alive_.push_back(level);
    closed_.emplace(level.get(), c);
    return c;
}

SqrtResult adjoin_sqrt(const LevelPtr& level, const FieldElement& d, TowerCache* cache, int max_depth) {
    count_op();
    LevelPtr L = common_level(level, d.level());
    if (!L) throw TowerError("adjoin_sqrt requires a tower level");
    FieldElement D = d.lifted(L).reduced();
    if (num_is_zero(L.get(), D.coeffs())) return {L, FieldElement::zero(L)};
    if (auto q = D.as_rational()) {
        if (sgn(q->get_num()) >= 0) {
            if (auto s = isqrt_exact(q->get_num() * q->get_den())) {
                return {L, FieldElement::from_rational(L, mpq_class(*s, q->get_den()))};
            }
        }
    }
    // t = sqrt(mu * num) = mu * sqrt(D), so sqrt(D) = t / mu.
    Coeffs R = scaled(D.coeffs(), D.mu());
    LevelPtr child = cache ? cache->adjoin(L, R, max_depth) : TowerLevel::adjoin(L, R, max_depth);
    return {child, FieldElement(child, D.mu(), generator_coeffs(*child, child->depth()))};
}

LevelPtr close_under_conjugation(const LevelPtr& level, TowerCache* cache, int max_depth) {
    LevelPtr cur = level;
    for (;;) {
        if (!cur->conj_image(0) && cur->field().degree() > 1 && !cur->field().omega_real())
            throw ArithmeticError("conjugate of the field generator is not in the field");
        int missing = -1;
        for (int g = 1; g <= cur->depth(); ++g)
            if (!cur->conj_image(g)) {
                missing = g;
                break;
            }
        if (missing < 0) return cur;
        const TowerLevel& Lj = cur->ancestor(missing);
        Coeffs S = eval_at(*cur, Lj.parent().get(), Lj.radicand(), images_of(*cur));
        cur = cache ? cache->adjoin(cur, S, max_depth) : TowerLevel::adjoin(cur, S, max_depth);
        if (!cur->conj_image(missing)) throw std::logic_error("conjugate root did not pair with its radicand");
    }
}

FieldElement inner_product(const std::vector<FieldElement>& a, const std::vector<FieldElement>& b) {
    FieldElement acc;
    for (std::size_t i = 0; i < a.size(); ++i) acc = acc + conjugate(a[i]) * b[i];
    return acc;
}

NormalizedVector normalize_vector(const std::vector<FieldElement>& v, const LevelPtr& at, TowerCache* cache,
                                  int max_depth) {
    LevelPtr L0 = at;
    for (const auto& x : v) L0 = common_level(L0, x.level());
    if (!L0) throw TowerError("normalize_vector requires a tower level");
    bool nonzero = false;
    for (const auto& x : v)
        if (!is_zero(x)) nonzero = true;
    if (!nonzero) throw ArithmeticError("cannot normalize the zero vector");
    LevelPtr L = cache ? cache->closure(L0, max_depth) : close_under_conjugation(L0, nullptr, max_depth);
    std::vector<FieldElement> lifted;
    for (const auto& x : v) lifted.push_back(x.lifted(L));
    FieldElement n = inner_product(lifted, lifted);
    if (fe_eq(n, FieldElement(1))) return {lifted, L};
    SqrtResult s = adjoin_sqrt(L, n, cache, max_depth);
    FieldElement inv = inverse(s.root);
    NormalizedVector out{{}, s.level};
    for (const auto& x : lifted) out.entries.push_back((x * inv).lifted(s.level));
    return out;
}

// ------------------------------------------------------------- Op counting

OpCounter::OpCounter() : previous_(op_sink) { op_sink = &count_; }

OpCounter::~OpCounter() {
    op_sink = previous_;
    if (previous_) *previous_ += count_;
}

// ------------------------------------------------------------------ Parsing

Coeffs parse_coeffs(std::string_view text, std::size_t width) {
    Coeffs out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string tok(text.substr(pos, end - pos));
        while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front()))) tok.erase(tok.begin());
        while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.pop_back();
        mpz_class v;
        if (tok.empty() || (tok[0] == '+') || v.set_str(tok, 10) != 0)
            throw std::invalid_argument("malformed integer coefficient '" + tok + "'");
        out.push_back(v);
        pos = end + 1;
    }
    if (out.size() != width)
        throw std::invalid_argument("expected " + std::to_string(width) + " coefficients, got " +
                                    std::to_string(out.size()));
    return out;
}

FieldElement parse_element(const LevelPtr& level, std::string_view text) {
    const std::size_t colon = text.find(':');
    mpz_class mu = 1;
    std::string_view body = text;
    if (colon != std::string_view::npos) {
        std::string m(text.substr(0, colon));
        if (m.empty() || mu.set_str(m, 10) != 0 || sgn(mu) == 0)
            throw std::invalid_argument("malformed denominator '" + m + "'");
        body = text.substr(colon + 1);
    }
    return FieldElement(level, mu, parse_coeffs(body, level_width(level.get())));
}

LevelInterner::LevelInterner(FieldPtr field) : field_(std::move(field)), base_(TowerLevel::base(field_)) {
    levels_.emplace("[]", base_);
}

LevelPtr LevelInterner::get(std::string_view desc) {
    auto it = levels_.find(desc);
    if (it != levels_.end()) return it->second;
    if (desc.size() < 2 || desc.front() != '[' || desc.back() != ']')
        throw std::invalid_argument("level descriptor must be enclosed in brackets");
    std::string_view inner = desc.substr(1, desc.size() - 2);
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (pos <= inner.size()) {
        std::size_t end = inner.find('|', pos);
        if (end == std::string_view::npos) end = inner.size();
        parts.push_back(inner.substr(pos, end - pos));
        pos = end + 1;
    }
    LevelPtr cur = base_;
    std::string key = "[";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) key += '|';
        key += parts[i];
        const std::string full = key + "]";
        auto hit = levels_.find(full);
        if (hit != levels_.end()) {
            cur = hit->second;
            continue;
        }
        FieldElement r = parse_element(cur, parts[i]);
        if (r.mu() != 1) throw std::invalid_argument("radicands must be integral numerators");
        cur = TowerLevel::adjoin(cur, r.coeffs(), TowerLevel::kMaxScratchDepth);
        levels_.emplace(full, cur);
    }
    return cur;
}

}  // namespace q2sat
