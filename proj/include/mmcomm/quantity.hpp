#pragma once

// A word count that is exact whenever its defining expression is rational.
//
// Bound formulas take square and cube roots. When the radicand is a perfect
// power the result stays a Rational; otherwise it degrades to a long double
// and every comparison involving it uses a relative tolerance.

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "mmcomm/rational.hpp"

namespace mmcomm {

// Relative tolerance for comparisons that involve an irrational operand.
inline constexpr long double kIrrationalRelTol = 1e-12L;

class Quantity {
public:
    Quantity(Rational exact) : exact_(exact), value_(exact.to_long_double()) {}

    template <typename I>
        requires(std::is_integral_v<I>)
    Quantity(I exact) : Quantity(Rational(exact)) {}

    static Quantity approximate(long double value) {
        Quantity q{Rational{}};
        q.exact_.reset();
        q.value_ = value;
        return q;
    }

    bool is_exact() const noexcept { return exact_.has_value(); }
    const std::optional<Rational>& exact() const noexcept { return exact_; }
    long double value() const noexcept { return value_; }

    // Exact decimal when rational, otherwise 18 significant digits.
    std::string to_decimal() const {
        if (exact_) return exact_->to_decimal();
        std::ostringstream os;
        os << std::setprecision(std::numeric_limits<long double>::digits10) << value_;
        return os.str();
    }

    friend Quantity operator+(const Quantity& a, const Quantity& b) {
        if (a.exact_ && b.exact_) return *a.exact_ + *b.exact_;
        return approximate(a.value_ + b.value_);
    }
    friend Quantity operator-(const Quantity& a, const Quantity& b) {
        if (a.exact_ && b.exact_) return *a.exact_ - *b.exact_;
        return approximate(a.value_ - b.value_);
    }
    friend Quantity operator*(const Quantity& a, const Quantity& b) {
        if (a.exact_ && b.exact_) return *a.exact_ * *b.exact_;
        return approximate(a.value_ * b.value_);
    }
    friend Quantity operator/(const Quantity& a, const Quantity& b) {
        if (a.exact_ && b.exact_) return *a.exact_ / *b.exact_;
        return approximate(a.value_ / b.value_);
    }

private:
    std::optional<Rational> exact_;
    long double value_ = 0;
};

// -1, 0 or +1. Exact when both operands are exact; otherwise operands
// within `rel_tol` of each other (relative to the larger magnitude) compare
// equal.
inline int compare(const Quantity& a, const Quantity& b, long double rel_tol = kIrrationalRelTol) {
    if (a.is_exact() && b.is_exact()) {
        auto c = *a.exact() <=> *b.exact();
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    long double scale = std::max(std::fabs(a.value()), std::fabs(b.value()));
    long double diff = a.value() - b.value();
    if (std::fabs(diff) <= rel_tol * scale) return 0;
    return diff < 0 ? -1 : 1;
}

inline bool approx_equal(const Quantity& a, const Quantity& b, long double rel_tol = kIrrationalRelTol) {
    return compare(a, b, rel_tol) == 0;
}

inline Quantity max(const Quantity& a, const Quantity& b) { return compare(a, b) >= 0 ? a : b; }

inline Quantity sqrt(const Rational& r) {
    if (auto e = exact_root(r, 2)) return *e;
    return Quantity::approximate(std::sqrt(r.to_long_double()));
}

inline Quantity cbrt(const Rational& r) {
    if (auto e = exact_root(r, 3)) return *e;
    return Quantity::approximate(std::cbrt(r.to_long_double()));
}

// r^(2/3); rational exactly when r is a rational cube.
inline Quantity pow_two_thirds(const Rational& r) {
    if (auto e = exact_root(r, 3)) return *e * *e;
    long double c = std::cbrt(r.to_long_double());
    return Quantity::approximate(c * c);
}

}  // namespace mmcomm
