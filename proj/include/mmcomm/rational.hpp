#pragma once

// Exact rational arithmetic over 128-bit integers.
//
// Every operation is checked: a result that does not fit throws
// std::overflow_error instead of wrapping. Comparison never forms cross
// products, so ordering is exact for any representable operands.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace mmcomm {

using int128 = __int128;

namespace detail {

[[noreturn]] inline void overflow() {
    throw std::overflow_error("mmcomm: rational arithmetic overflow");
}

inline int128 checked_add(int128 a, int128 b) {
    int128 r;
    if (__builtin_add_overflow(a, b, &r)) overflow();
    return r;
}

inline int128 checked_sub(int128 a, int128 b) {
    int128 r;
    if (__builtin_sub_overflow(a, b, &r)) overflow();
    return r;
}

inline int128 checked_mul(int128 a, int128 b) {
    int128 r;
    if (__builtin_mul_overflow(a, b, &r)) overflow();
    return r;
}

inline int128 abs128(int128 v) { return v < 0 ? -v : v; }

inline int128 gcd128(int128 a, int128 b) {
    a = abs128(a);
    b = abs128(b);
    while (b != 0) {
        int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// Floor division for den > 0.
inline int128 floor_div(int128 num, int128 den) {
    int128 q = num / den;
    if ((num % den != 0) && (num < 0)) --q;
    return q;
}

inline std::string to_string(int128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    std::string digits;
    while (v != 0) {
        int d = static_cast<int>(v % 10);
        digits.push_back(static_cast<char>('0' + (d < 0 ? -d : d)));
        v /= 10;
    }
    if (neg) digits.push_back('-');
    return {digits.rbegin(), digits.rend()};
}

inline int128 parse_int128(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("mmcomm: empty integer literal");
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i == s.size()) throw std::invalid_argument("mmcomm: malformed integer literal");
    int128 v = 0;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c < '0' || c > '9')
            throw std::invalid_argument("mmcomm: malformed integer literal '" + std::string(s) + "'");
        v = checked_add(checked_mul(v, 10), c - '0');
    }
    return neg ? -v : v;
}

// Largest r >= 0 with r^degree <= v, for v >= 0 and degree in {2, 3}.
inline int128 integer_root_floor(int128 v, int degree) {
    if (v < 0) throw std::domain_error("mmcomm: root of negative integer");
    if (v < 2) return v;
    auto power_le = [&](int128 r) {
        int128 acc = 1;
        for (int i = 0; i < degree; ++i) {
            if (__builtin_mul_overflow(acc, r, &acc)) return false;
        }
        return acc <= v;
    };
    int128 lo = 1;
    int128 hi = 2;
    while (power_le(hi)) hi *= 2;
    while (hi - lo > 1) {
        int128 mid = lo + (hi - lo) / 2;
        if (power_le(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

inline std::optional<int128> exact_integer_root(int128 v, int degree) {
    if (v < 0) return std::nullopt;
    int128 r = integer_root_floor(v, degree);
    int128 acc = 1;
    for (int i = 0; i < degree; ++i) acc = checked_mul(acc, r);
    if (acc != v) return std::nullopt;
    return r;
}

}  // namespace detail

class Rational {
public:
    constexpr Rational() = default;

    template <typename I>
        requires(std::is_integral_v<I> || std::is_same_v<I, int128>)
    constexpr Rational(I value) : num_(static_cast<int128>(value)) {}

    Rational(int128 num, int128 den) : num_(num), den_(den) {
        if (den_ == 0) throw std::domain_error("mmcomm: zero denominator");
        normalize();
    }

    int128 numerator() const noexcept { return num_; }
    int128 denominator() const noexcept { return den_; }

    bool is_integer() const noexcept { return den_ == 1; }
    bool is_zero() const noexcept { return num_ == 0; }
    int sign() const noexcept { return (num_ > 0) - (num_ < 0); }

    long double to_long_double() const {
        return static_cast<long double>(num_) / static_cast<long double>(den_);
    }

    // Largest integer not greater than the value.
    int128 floor() const { return detail::floor_div(num_, den_); }

    // "num/den", always with an explicit denominator.
    std::string to_fraction() const {
        return detail::to_string(num_) + "/" + detail::to_string(den_);
    }

    // Exact decimal expansion when it terminates within 40 fractional
    // digits; otherwise rounded half away from zero to `max_fraction_digits`.
    std::string to_decimal(int max_fraction_digits = 12) const;

    // Accepts "a", "a/b" and plain decimals such as "-12.375".
    static Rational parse(std::string_view text);

    friend Rational operator+(const Rational& a, const Rational& b) {
        int128 g = detail::gcd128(a.den_, b.den_);
        int128 lhs = detail::checked_mul(a.num_, b.den_ / g);
        int128 rhs = detail::checked_mul(b.num_, a.den_ / g);
        return {detail::checked_add(lhs, rhs), detail::checked_mul(a.den_, b.den_ / g)};
    }

    friend Rational operator-(const Rational& a) {
        Rational r = a;
        r.num_ = detail::checked_sub(0, r.num_);
        return r;
    }

    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

    friend Rational operator*(const Rational& a, const Rational& b) {
        // cross-reduce first to keep intermediates small
        int128 g1 = detail::gcd128(a.num_, b.den_);
        int128 g2 = detail::gcd128(b.num_, a.den_);
        if (g1 == 0) g1 = 1;
        if (g2 == 0) g2 = 1;
        return {detail::checked_mul(a.num_ / g1, b.num_ / g2),
                detail::checked_mul(a.den_ / g2, b.den_ / g1)};
    }

    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("mmcomm: division by zero");
        return a * Rational(b.den_, b.num_);
    }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        return compare(a.num_, a.den_, b.num_, b.den_);
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
        os << detail::to_string(r.num_);
        if (r.den_ != 1) os << '/' << detail::to_string(r.den_);
        return os;
    }

private:
    void normalize() {
        if (den_ < 0) {
            num_ = detail::checked_sub(0, num_);
            den_ = detail::checked_sub(0, den_);
        }
        int128 g = detail::gcd128(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    // Compares a/b with c/d (b, d > 0) by continued-fraction expansion.
    static std::strong_ordering compare(int128 a, int128 b, int128 c, int128 d) {
        bool flipped = false;
        auto result = [&](std::strong_ordering r) { return flipped ? 0 <=> r : r; };
        for (;;) {
            int128 qa = detail::floor_div(a, b);
            int128 qc = detail::floor_div(c, d);
            if (qa != qc) return result(qa <=> qc);
            int128 ra = a - qa * b;  // in [0, b)
            int128 rc = c - qc * d;
            if (ra == 0 && rc == 0) return std::strong_ordering::equal;
            if (ra == 0) return result(std::strong_ordering::less);
            if (rc == 0) return result(std::strong_ordering::greater);
            // ra/b vs rc/d has the opposite sense of b/ra vs d/rc
            int128 na = b, nb = ra, nc = d, nd = rc;
            a = na;
            b = nb;
            c = nc;
            d = nd;
            flipped = !flipped;
        }
    }

    int128 num_ = 0;
    int128 den_ = 1;
};

inline Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }

inline std::string Rational::to_decimal(int max_fraction_digits) const {
    int128 mag_num = detail::abs128(num_);
    int128 whole = mag_num / den_;
    int128 rem = mag_num % den_;

    // A reduced fraction terminates iff its denominator is 2^a 5^b.
    int128 d = den_;
    int twos = 0, fives = 0;
    while (d % 2 == 0) { d /= 2; ++twos; }
    while (d % 5 == 0) { d /= 5; ++fives; }
    bool terminates = d == 1 && std::max(twos, fives) <= 40;
    int digits = terminates ? std::max(twos, fives) : max_fraction_digits;

    std::string frac;
    for (int i = 0; i < digits; ++i) {
        rem = detail::checked_mul(rem, 10);
        frac.push_back(static_cast<char>('0' + static_cast<int>(rem / den_)));
        rem %= den_;
    }
    if (!terminates && detail::checked_mul(rem, 2) >= den_) {
        // round half away from zero, carrying through the digits
        int i = static_cast<int>(frac.size()) - 1;
        for (; i >= 0; --i) {
            if (frac[i] == '9') {
                frac[i] = '0';
            } else {
                ++frac[i];
                break;
            }
        }
        if (i < 0) whole = detail::checked_add(whole, 1);
    }
    while (!frac.empty() && frac.back() == '0') frac.pop_back();

    std::string out = (num_ < 0 && (whole != 0 || !frac.empty())) ? "-" : "";
    out += detail::to_string(whole);
    if (!frac.empty()) out += "." + frac;
    return out;
}

inline Rational Rational::parse(std::string_view text) {
    auto trim = [](std::string_view v) {
        while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
        while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) v.remove_suffix(1);
        return v;
    };
    text = trim(text);
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        return {detail::parse_int128(trim(text.substr(0, slash))),
                detail::parse_int128(trim(text.substr(slash + 1)))};
    }
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        std::string_view int_part = text.substr(0, dot);
        std::string_view frac_part = text.substr(dot + 1);
        if (frac_part.empty() || frac_part.front() == '-' || frac_part.front() == '+')
            throw std::invalid_argument("mmcomm: malformed decimal '" + std::string(text) + "'");
        std::string digits(int_part);
        if (digits.empty() || digits == "-" || digits == "+") digits += "0";
        digits += frac_part;
        int128 scale = 1;
        for (std::size_t i = 0; i < frac_part.size(); ++i) scale = detail::checked_mul(scale, 10);
        return {detail::parse_int128(digits), scale};
    }
    return {detail::parse_int128(text), 1};
}

// Exact `degree`-th root of a nonnegative rational, when it is rational.
inline std::optional<Rational> exact_root(const Rational& r, int degree) {
    if (r.sign() < 0) return std::nullopt;
    auto num = detail::exact_integer_root(r.numerator(), degree);
    if (!num) return std::nullopt;
    auto den = detail::exact_integer_root(r.denominator(), degree);
    if (!den) return std::nullopt;
    return Rational(*num, *den);
}

}  // namespace mmcomm
