#include "q2sat/numeric.hpp"

#include <sstream>

#include "q2sat/bigint.hpp"

namespace q2sat {

mpq_class ComplexBox::width() const {
    mpq_class a = re_hi - re_lo;
    mpq_class b = im_hi - im_lo;
    return a > b ? a : b;
}

std::string ComplexBox::to_string() const {
    std::ostringstream os;
    os << "[" << re_lo.get_d() << ", " << re_hi.get_d() << "] x [" << im_lo.get_d() << ", "
       << im_hi.get_d() << "]i";
    return os.str();
}

Ball Ball::exact_integer(const mpz_class& v, long w) {
    return Ball{v << static_cast<unsigned long>(w), 0, 0};
}

namespace ball {

namespace {

mpz_class abs_z(const mpz_class& x) { return x < 0 ? mpz_class(-x) : x; }

// ceil(x / 2^w) for x >= 0
mpz_class shift_ceil(const mpz_class& x, long w) {
    mpz_class r;
    mpz_cdiv_q_2exp(r.get_mpz_t(), x.get_mpz_t(), static_cast<mp_bitcnt_t>(w));
    return r;
}

mpz_class shift_floor(const mpz_class& x, long w) {
    mpz_class r;
    mpz_fdiv_q_2exp(r.get_mpz_t(), x.get_mpz_t(), static_cast<mp_bitcnt_t>(w));
    return r;
}

mpz_class modulus_floor(const Ball& a) { return isqrt_floor(a.re * a.re + a.im * a.im); }

std::optional<Ball> sqrt_right_half(const Ball& z, long w) {
    const auto uw = static_cast<unsigned long>(w);
    const mpz_class& x = z.re;
    const mpz_class& y = z.im;
    mpz_class m = modulus_floor(z);
    mpz_class pa = m + x;
    if (pa < 0) pa = 0;
    mpz_class pb = m - x;
    if (pb < 0) pb = 0;
    mpz_class a = isqrt_floor((pa << uw) >> 1);
    mpz_class b = isqrt_floor((pb << uw) >> 1);
    if (y < 0) b = -b;

    mpz_class dre = a * a - b * b - (x << uw);
    mpz_class dim = 2 * a * b - (y << uw);
    mpz_class delta = shift_ceil(abs_z(dre) + abs_z(dim), w) + z.rad;
    mpz_class slow = isqrt_floor(a * a + b * b);
    if (sgn(slow) == 0) return std::nullopt;
    if (((4 * delta) << uw) > slow * slow) return std::nullopt;
    mpz_class e;
    mpz_class num = delta << uw;
    mpz_cdiv_q(e.get_mpz_t(), num.get_mpz_t(), slow.get_mpz_t());
    e += 1;
    if (a - e <= 0) return std::nullopt;
    return Ball{a, b, e};
}

}  // namespace

Ball add(const Ball& a, const Ball& b) { return Ball{a.re + b.re, a.im + b.im, a.rad + b.rad}; }

Ball sub(const Ball& a, const Ball& b) { return Ball{a.re - b.re, a.im - b.im, a.rad + b.rad}; }

Ball neg(const Ball& a) { return Ball{-a.re, -a.im, a.rad}; }

Ball times_i(const Ball& a) { return Ball{-a.im, a.re, a.rad}; }

Ball mul(const Ball& a, const Ball& b, long w) {
    Ball r;
    r.re = shift_floor(a.re * b.re - a.im * b.im, w);
    r.im = shift_floor(a.re * b.im + a.im * b.re, w);
    mpz_class ma = abs_z(a.re) + abs_z(a.im);
    mpz_class mb = abs_z(b.re) + abs_z(b.im);
    r.rad = shift_ceil(ma * b.rad + mb * a.rad + a.rad * b.rad, w) + 2;
    return r;
}

Ball mul_int(const Ball& a, const mpz_class& k) {
    return Ball{a.re * k, a.im * k, a.rad * abs_z(k)};
}

Ball div_int(const Ball& a, const mpz_class& k) {
    Ball r;
    mpz_fdiv_q(r.re.get_mpz_t(), a.re.get_mpz_t(), k.get_mpz_t());
    mpz_fdiv_q(r.im.get_mpz_t(), a.im.get_mpz_t(), k.get_mpz_t());
    mpz_cdiv_q(r.rad.get_mpz_t(), a.rad.get_mpz_t(), k.get_mpz_t());
    r.rad += 2;
    return r;
}

mpz_class abs_upper(const Ball& a) { return modulus_floor(a) + 1 + a.rad; }

mpz_class abs_lower(const Ball& a) {
    mpz_class v = modulus_floor(a) - a.rad;
    return v < 0 ? mpz_class(0) : v;
}

bool excludes_zero(const Ball& a) { return modulus_floor(a) > a.rad; }

std::optional<Ball> principal_sqrt(const Ball& z, bool negative_real, long w) {
    if (!negative_real) return sqrt_right_half(z, w);
    auto r = sqrt_right_half(neg(z), w);
    if (!r) return std::nullopt;
    return times_i(*r);
}

ComplexBox to_box(const Ball& a, long w) {
    mpz_class den = mpz_class(1) << static_cast<unsigned long>(w);
    ComplexBox b;
    b.re_lo = mpq_class(a.re - a.rad, den);
    b.re_hi = mpq_class(a.re + a.rad, den);
    b.im_lo = mpq_class(a.im - a.rad, den);
    b.im_hi = mpq_class(a.im + a.rad, den);
    b.re_lo.canonicalize();
    b.re_hi.canonicalize();
    b.im_lo.canonicalize();
    b.im_hi.canonicalize();
    return b;
}

}  // namespace ball

}  // namespace q2sat
