#pragma once

#include <gmpxx.h>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "q2sat/numeric.hpp"

namespace q2sat {

class FieldSpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumberField;
using FieldPtr = std::shared_ptr<const NumberField>;

/*
 * Base field Q[w] for a monic irreducible integer polynomial p and an isolating
 * box that selects the complex embedding of w. Validation at construction:
 * the box must contain exactly one root (certified root disks), and p must not
 * have a monic integer factor of degree <= d/2.
 */
class NumberField {
public:
    // Coefficients c0..cd of p with cd == 1. A box is required when d >= 2.
    static FieldPtr create(std::vector<mpz_class> poly, std::optional<ComplexBox> box,
                           unsigned gcd_threshold_bits = kDefaultGcdThreshold);
    static FieldPtr rationals();

    static constexpr unsigned kDefaultGcdThreshold = 256;

    int degree() const { return static_cast<int>(poly_.size()) - 1; }
    const std::vector<mpz_class>& poly() const { return poly_; }
    const std::optional<ComplexBox>& box() const { return box_; }
    bool is_rationals() const { return degree() == 1 && sgn(poly_[0]) == 0; }
    bool omega_real() const { return real_; }
    // Integral numerator (length d) of conj(w) when it lies in the field.
    const std::optional<std::vector<mpz_class>>& omega_conjugate() const { return conj_; }
    unsigned gcd_threshold_bits() const { return gcd_threshold_bits_; }

    // Disk of radius below 2^-(w-8) around w, in fixed point at scale 2^-w.
    Ball omega_ball(long w) const;

    bool equivalent(const NumberField& o) const;
    std::string describe() const;

private:
    NumberField() = default;
    void locate_root();
    void check_irreducible() const;

    std::vector<mpz_class> poly_;
    std::optional<ComplexBox> box_;
    unsigned gcd_threshold_bits_ = kDefaultGcdThreshold;
    bool real_ = true;
    std::optional<std::vector<mpz_class>> conj_;
    // Disk around w containing no other root of p, at scale 2^-w0_.
    long w0_ = 0;
    Ball isolating_;
    mutable std::mutex mu_;
    mutable std::map<long, Ball> cache_;
};

}  // namespace q2sat
