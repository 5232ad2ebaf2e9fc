#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>

namespace q2sat {

// Closed complex box with rational corners.
struct ComplexBox {
    mpq_class re_lo, re_hi, im_lo, im_hi;

    bool contains(const mpq_class& re, const mpq_class& im) const {
        return re_lo <= re && re <= re_hi && im_lo <= im && im <= im_hi;
    }
    bool contains_zero() const { return contains(0, 0); }
    bool overlaps(const ComplexBox& o) const {
        return re_lo <= o.re_hi && o.re_lo <= re_hi && im_lo <= o.im_hi && o.im_lo <= im_hi;
    }
    mpq_class width() const;
    std::string to_string() const;
};

// Complex disk in fixed point: every scalar is an integer scaled by 2^-W, with W
// supplied by the caller. The represented set is {z : |z - (re + i im)| <= rad}.
struct Ball {
    mpz_class re, im, rad;

    static Ball exact_integer(const mpz_class& v, long w);
};

namespace ball {

Ball add(const Ball& a, const Ball& b);
Ball sub(const Ball& a, const Ball& b);
Ball neg(const Ball& a);
Ball mul(const Ball& a, const Ball& b, long w);
Ball mul_int(const Ball& a, const mpz_class& k);
// Division by a positive integer.
Ball div_int(const Ball& a, const mpz_class& k);
Ball times_i(const Ball& a);

// Upper bound on |z| for z in the ball (scale 2^-W).
mpz_class abs_upper(const Ball& a);
// Lower bound on |z| for z in the ball, clamped at 0.
mpz_class abs_lower(const Ball& a);

bool excludes_zero(const Ball& a);

// Principal square root (argument in (-pi/2, pi/2]) of every point of `z`.
// `negative_real` asserts the true value is a negative real, whose principal root
// lies on the positive imaginary axis. nullopt means the precision is insufficient.
std::optional<Ball> principal_sqrt(const Ball& z, bool negative_real, long w);

ComplexBox to_box(const Ball& a, long w);

}  // namespace ball

}  // namespace q2sat
