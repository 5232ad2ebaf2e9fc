#include "q2sat/number_field.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "q2sat/bigint.hpp"

namespace q2sat {

namespace {

using cld = std::complex<long double>;

constexpr long kInitialPrecision = 96;
constexpr long kMaxLoadPrecision = 1L << 13;
constexpr int kMaxDegreeForFactorCheck = 16;

std::vector<cld> durand_kerner(const std::vector<mpz_class>& p) {
    const int d = static_cast<int>(p.size()) - 1;
    std::vector<long double> c(p.size());
    long double bound = 1;
    for (std::size_t i = 0; i < p.size(); ++i) {
        c[i] = static_cast<long double>(p[i].get_d());
        bound = std::max(bound, 1 + std::fabs(c[i]));
    }
    auto eval = [&](cld z) {
        cld acc = 1;
        for (int i = d - 1; i >= 0; --i) acc = acc * z + c[i];
        return acc;
    };
    std::vector<cld> z(d);
    const cld seed(0.4L, 0.9L);
    cld pw = 1;
    for (int i = 0; i < d; ++i) {
        z[i] = pw * (bound / 2);
        pw *= seed;
    }
    for (int iter = 0; iter < 5000; ++iter) {
        long double change = 0;
        for (int i = 0; i < d; ++i) {
            cld den = 1;
            for (int j = 0; j < d; ++j)
                if (j != i) den *= (z[i] - z[j]);
            if (den == cld(0)) den = cld(1e-30L, 0);
            cld step = eval(z[i]) / den;
            z[i] -= step;
            change = std::max(change, std::abs(step) / (1 + std::abs(z[i])));
        }
        if (change < 1e-18L) break;
    }
    return z;
}

mpz_class ld_to_fixed(long double v, long w) {
    int e = 0;
    long double m = std::frexp(v, &e);  // v = m * 2^e, |m| in [0.5, 1)
    mpz_class mant(static_cast<double>(std::ldexp(m, 53)));  // 53 significant bits
    long shift = w + e - 53;
    if (shift >= 0) return mant << static_cast<unsigned long>(shift);
    mpz_class r;
    mpz_fdiv_q_2exp(r.get_mpz_t(), mant.get_mpz_t(), static_cast<mp_bitcnt_t>(-shift));
    return r;
}

mpz_class rescale(const mpz_class& x, long from, long to) {
    if (to >= from) return x << static_cast<unsigned long>(to - from);
    mpz_class r;
    mpz_fdiv_q_2exp(r.get_mpz_t(), x.get_mpz_t(), static_cast<mp_bitcnt_t>(from - to));
    return r;
}

struct PolyEval {
    Ball value, derivative;
};

PolyEval eval_poly(const std::vector<mpz_class>& p, const Ball& z, long w) {
    const int d = static_cast<int>(p.size()) - 1;
    Ball acc = Ball::exact_integer(1, w);
    Ball dacc = Ball::exact_integer(d, w);
    for (int i = d - 1; i >= 0; --i) {
        acc = ball::add(ball::mul(acc, z, w), Ball::exact_integer(p[i], w));
        if (i >= 1) dacc = ball::add(ball::mul(dacc, z, w), Ball::exact_integer(p[i] * i, w));
    }
    return {acc, dacc};
}

// Newton refinement at scale w followed by a root-disk certificate: for any z,
// some root lies within d*|p(z)|/|p'(z)|.
std::optional<Ball> refine_root(const std::vector<mpz_class>& p, Ball z, long w, bool real) {
    const auto uw = static_cast<unsigned long>(w);
    const int d = static_cast<int>(p.size()) - 1;
    z.rad = 0;
    if (real) z.im = 0;
    for (int iter = 0; iter < 200; ++iter) {
        PolyEval e = eval_poly(p, z, w);
        const Ball& P = e.value;
        const Ball& Q = e.derivative;
        mpz_class den = Q.re * Q.re + Q.im * Q.im;
        if (sgn(den) == 0) return std::nullopt;
        mpz_class nre = (P.re * Q.re + P.im * Q.im) << uw;
        mpz_class nim = (P.im * Q.re - P.re * Q.im) << uw;
        mpz_class qre, qim;
        mpz_fdiv_q(qre.get_mpz_t(), nre.get_mpz_t(), den.get_mpz_t());
        mpz_fdiv_q(qim.get_mpz_t(), nim.get_mpz_t(), den.get_mpz_t());
        if (real) qim = 0;
        z.re -= qre;
        z.im -= qim;
        if (abs(qre) + abs(qim) <= 2) break;
    }
    PolyEval e = eval_poly(p, z, w);
    mpz_class lower = ball::abs_lower(e.derivative);
    if (sgn(lower) == 0) return std::nullopt;
    mpz_class num = mpz_class(d) * ball::abs_upper(e.value) << uw;
    mpz_class r;
    mpz_cdiv_q(r.get_mpz_t(), num.get_mpz_t(), lower.get_mpz_t());
    z.rad = r + 1;
    return z;
}

// Square hull of a disk, as fixed-point bounds.
struct Square {
    mpz_class re_lo, re_hi, im_lo, im_hi;
};

Square hull(const Ball& b) { return {b.re - b.rad, b.re + b.rad, b.im - b.rad, b.im + b.rad}; }

bool squares_meet(const Square& a, const Square& b) {
    return a.re_lo <= b.re_hi && b.re_lo <= a.re_hi && a.im_lo <= b.im_hi && b.im_lo <= a.im_hi;
}

// Compare fixed-point x (scale 2^-w) with rational q: sign of x/2^w - q.
int cmp_fixed(const mpz_class& x, const mpq_class& q, long w) {
    mpz_class lhs = x * q.get_den();
    mpz_class rhs = q.get_num() << static_cast<unsigned long>(w);
    return cmp(lhs, rhs);
}

bool square_inside_box(const Square& s, const ComplexBox& b, long w) {
    return cmp_fixed(s.re_lo, b.re_lo, w) >= 0 && cmp_fixed(s.re_hi, b.re_hi, w) <= 0 &&
           cmp_fixed(s.im_lo, b.im_lo, w) >= 0 && cmp_fixed(s.im_hi, b.im_hi, w) <= 0;
}

bool square_meets_box(const Square& s, const ComplexBox& b, long w) {
    return cmp_fixed(s.re_hi, b.re_lo, w) >= 0 && cmp_fixed(s.re_lo, b.re_hi, w) <= 0 &&
           cmp_fixed(s.im_hi, b.im_lo, w) >= 0 && cmp_fixed(s.im_lo, b.im_hi, w) <= 0;
}

// Is disk b1 (scale w1) contained in disk b0 (scale w0)?
bool disk_within(const Ball& b1, long w1, const Ball& b0, long w0) {
    long w = std::max(w0, w1);
    mpz_class dre = rescale(b1.re, w1, w) - rescale(b0.re, w0, w);
    mpz_class dim = rescale(b1.im, w1, w) - rescale(b0.im, w0, w);
    mpz_class r1 = rescale(b1.rad, w1, w) + 1;
    mpz_class r0 = rescale(b0.rad, w0, w);
    if (r0 < r1) return false;
    mpz_class slack = r0 - r1;
    return dre * dre + dim * dim <= slack * slack;
}

// p mod f for monic integer f.
bool divides(const std::vector<mpz_class>& f, std::vector<mpz_class> p) {
    const int df = static_cast<int>(f.size()) - 1;
    for (int t = static_cast<int>(p.size()) - 1; t >= df; --t) {
        mpz_class c = p[t];
        if (sgn(c) == 0) continue;
        for (int i = 0; i <= df; ++i) p[t - df + i] -= c * f[i];
    }
    for (int i = 0; i < df; ++i)
        if (sgn(p[i]) != 0) return false;
    return true;
}

}  // namespace

FieldPtr NumberField::rationals() {
    static const FieldPtr q = create({mpz_class(0), mpz_class(1)}, std::nullopt);
    return q;
}

FieldPtr NumberField::create(std::vector<mpz_class> poly, std::optional<ComplexBox> box,
                             unsigned gcd_threshold_bits) {
    if (poly.size() < 2) throw FieldSpecError("minimal polynomial must have degree >= 1");
    if (poly.back() != 1) throw FieldSpecError("minimal polynomial must be monic");
    if (poly.size() > 2 && !box)
        throw FieldSpecError("an embedding box is required for fields of degree >= 2");
    if (box && (box->re_lo > box->re_hi || box->im_lo > box->im_hi))
        throw FieldSpecError("embedding box has inverted bounds");
    std::shared_ptr<NumberField> f(new NumberField());
    f->poly_ = std::move(poly);
    f->box_ = std::move(box);
    f->gcd_threshold_bits_ = gcd_threshold_bits;
    f->locate_root();
    return f;
}

void NumberField::locate_root() {
    const int d = degree();
    if (d == 1) {
        real_ = true;
        w0_ = 0;
        isolating_ = Ball{-poly_[0], 0, 0};
        conj_ = std::vector<mpz_class>{-poly_[0]};
        if (box_ && !box_->contains(mpq_class(-poly_[0]), 0))
            throw FieldSpecError("embedding box does not contain the root of a linear polynomial");
        return;
    }

    const std::vector<cld> approx = durand_kerner(poly_);
    for (long w = kInitialPrecision; w <= kMaxLoadPrecision; w *= 2) {
        std::vector<Ball> disks;
        bool ok = true;
        for (const cld& a : approx) {
            Ball z{ld_to_fixed(a.real(), w), ld_to_fixed(a.imag(), w), 0};
            auto r = refine_root(poly_, z, w, false);
            if (!r) {
                ok = false;
                break;
            }
            disks.push_back(*r);
        }
        if (!ok) continue;
        std::vector<Square> sq;
        for (const Ball& b : disks) sq.push_back(hull(b));
        for (int i = 0; i < d && ok; ++i)
            for (int j = i + 1; j < d && ok; ++j)
                if (squares_meet(sq[i], sq[j])) ok = false;
        if (!ok) continue;

        int inside = -1, meeting = 0, inside_count = 0;
        for (int i = 0; i < d; ++i) {
            if (square_meets_box(sq[i], *box_, w)) ++meeting;
            if (square_inside_box(sq[i], *box_, w)) {
                ++inside_count;
                inside = i;
            }
        }
        if (inside_count > 1) throw FieldSpecError("embedding box contains more than one root");
        if (meeting == 0) throw FieldSpecError("embedding box contains no root");
        if (meeting != 1 || inside_count != 1) continue;

        const Square mirror{sq[inside].re_lo, sq[inside].re_hi, -sq[inside].im_hi, -sq[inside].im_lo};
        int mirror_hits = 0, mirror_other = -1;
        bool hits_self = false;
        for (int j = 0; j < d; ++j) {
            if (!squares_meet(mirror, sq[j])) continue;
            ++mirror_hits;
            if (j == inside)
                hits_self = true;
            else
                mirror_other = j;
        }
        if (mirror_hits != 1) continue;

        real_ = hits_self;
        w0_ = w;
        // Widen to a disk free of every other root: the distance to each other
        // center minus that disk's radius.
        mpz_class sep;
        for (int j = 0; j < d; ++j) {
            if (j == inside) continue;
            mpz_class dre = disks[inside].re - disks[j].re, dim = disks[inside].im - disks[j].im;
            mpz_class gap = isqrt_floor(dre * dre + dim * dim) - 1 - disks[j].rad;
            if (j == (inside == 0 ? 1 : 0) || gap < sep) sep = gap;
        }
        if (sep <= disks[inside].rad) continue;
        const Ball region{disks[inside].re, disks[inside].im, sep};
        if (real_) {
            Ball seed = disks[inside];
            seed.im = 0;
            auto r = refine_root(poly_, seed, w, true);
            if (!r || !disk_within(*r, w, region, w)) continue;
            isolating_ = region;
            conj_ = std::vector<mpz_class>(d, 0);
            (*conj_)[1] = 1;
        } else {
            isolating_ = region;
            (void)mirror_other;
            if (d == 2) conj_ = std::vector<mpz_class>{-poly_[1], -1};
        }

        // Factor search: a monic integer factor of degree <= d/2 has a subset of
        // the roots as zeros; enclose its coefficients and test nearby integers.
        if (d <= kMaxDegreeForFactorCheck) {
            const auto uw = static_cast<unsigned long>(w);
            for (unsigned mask = 1; mask < (1u << d); ++mask) {
                const int k = __builtin_popcount(mask);
                if (2 * k > d) continue;
                std::vector<Ball> f{Ball::exact_integer(1, w)};
                for (int i = 0; i < d; ++i) {
                    if (!(mask & (1u << i))) continue;
                    std::vector<Ball> g(f.size() + 1, Ball{0, 0, 0});
                    for (std::size_t t = 0; t < f.size(); ++t) {
                        g[t + 1] = ball::add(g[t + 1], f[t]);
                        g[t] = ball::sub(g[t], ball::mul(f[t], disks[i], w));
                    }
                    f = std::move(g);
                }
                std::vector<mpz_class> cand(f.size());
                bool integral = true;
                for (std::size_t t = 0; t < f.size() && integral; ++t) {
                    mpz_class n;
                    mpz_class half = mpz_class(1) << (uw - 1);
                    mpz_class shifted = f[t].re + half;
                    mpz_fdiv_q_2exp(n.get_mpz_t(), shifted.get_mpz_t(), uw);
                    mpz_class dre = f[t].re - (n << uw);
                    if (dre * dre + f[t].im * f[t].im > f[t].rad * f[t].rad) integral = false;
                    if (f[t].rad > (mpz_class(1) << (uw - 2)))
                        throw FieldSpecError("could not certify irreducibility of the minimal polynomial");
                    cand[t] = n;
                }
                if (integral && divides(cand, poly_))
                    throw FieldSpecError("minimal polynomial is reducible over the integers");
            }
        }
        return;
    }
    throw FieldSpecError("could not isolate the root selected by the embedding box");
}

Ball NumberField::omega_ball(long w) const {
    if (degree() == 1) return Ball::exact_integer(-poly_[0], w);
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(w);
    if (it != cache_.end()) return it->second;
    Ball seed{rescale(isolating_.re, w0_, w), rescale(isolating_.im, w0_, w), 0};
    auto r = refine_root(poly_, seed, w, real_);
    if (!r || !disk_within(*r, w, isolating_, w0_))
        throw std::logic_error("root refinement left the isolating disk");
    cache_.emplace(w, *r);
    return *r;
}

bool NumberField::equivalent(const NumberField& o) const {
    if (this == &o) return true;
    if (poly_ != o.poly_) return false;
    if (degree() == 1) return true;
    if (box_.has_value() != o.box_.has_value()) return false;
    if (!box_) return true;
    return box_->re_lo == o.box_->re_lo && box_->re_hi == o.box_->re_hi &&
           box_->im_lo == o.box_->im_lo && box_->im_hi == o.box_->im_hi;
}

std::string NumberField::describe() const {
    if (is_rationals()) return "Q";
    std::ostringstream os;
    os << "Q[x]/(";
    bool first = true;
    for (int i = degree(); i >= 0; --i) {
        if (sgn(poly_[i]) == 0) continue;
        if (!first) os << (poly_[i] > 0 ? " + " : " - ");
        else if (poly_[i] < 0) os << "-";
        mpz_class a = abs(poly_[i]);
        if (a != 1 || i == 0) os << a.get_str();
        if (i >= 1) os << "x";
        if (i >= 2) os << "^" << i;
        first = false;
    }
    os << ")";
    return os.str();
}

}  // namespace q2sat
