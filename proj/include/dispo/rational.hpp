#pragma once

// Exact rational arithmetic on 128-bit integers.
//
// Reference prices, returns and portfolio balances are kept exact so that
// gain/loss classification never depends on floating-point rounding, and so
// that rescaling every price by a constant leaves every ratio bit-identical.

#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dispo {

using int128 = __int128;

class ArithmeticOverflow : public std::overflow_error {
public:
    ArithmeticOverflow() : std::overflow_error("rational arithmetic overflow") {}
};

namespace detail {

inline int128 abs128(int128 v) { return v < 0 ? -v : v; }

inline int128 gcd128(int128 a, int128 b) {
    a = abs128(a);
    b = abs128(b);
    constexpr int128 u64max = static_cast<int128>(UINT64_MAX);
    while (b != 0) {
        if (a <= u64max && b <= u64max) {
            return static_cast<int128>(
                std::gcd(static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(b)));
        }
        int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

inline int128 mul(int128 a, int128 b) {
    int128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw ArithmeticOverflow();
    return r;
}

inline int128 add(int128 a, int128 b) {
    int128 r;
    if (__builtin_add_overflow(a, b, &r)) throw ArithmeticOverflow();
    return r;
}

inline int128 sub(int128 a, int128 b) {
    int128 r;
    if (__builtin_sub_overflow(a, b, &r)) throw ArithmeticOverflow();
    return r;
}

constexpr int128 kExactDoubleLimit = static_cast<int128>(1) << 53;

}  // namespace detail

// num / den converted to double. The result depends only on the value of
// the fraction, not on its representation: small operands convert exactly
// and divide with a single rounding; large ones are reduced first.
inline double ratio_to_double(int128 num, int128 den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    if (detail::abs128(num) <= detail::kExactDoubleLimit && den <= detail::kExactDoubleLimit) {
        return static_cast<double>(num) / static_cast<double>(den);
    }
    const int128 g = detail::gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    if (detail::abs128(num) <= detail::kExactDoubleLimit && den <= detail::kExactDoubleLimit) {
        return static_cast<double>(num) / static_cast<double>(den);
    }
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

class Rational {
public:
    constexpr Rational() = default;
    Rational(int128 num, int128 den = 1) : num_(num), den_(den) {
        if (den_ == 0) throw std::domain_error("rational with zero denominator");
        normalize();
    }

    int128 num() const noexcept { return num_; }
    int128 den() const noexcept { return den_; }
    int sign() const noexcept { return (num_ > 0) - (num_ < 0); }
    bool is_zero() const noexcept { return num_ == 0; }

    double to_double() const { return ratio_to_double(num_, den_); }
    long double to_long_double() const {
        return static_cast<long double>(num_) / static_cast<long double>(den_);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        if (a.den_ == b.den_) return {detail::add(a.num_, b.num_), a.den_};
        const int128 g = detail::gcd128(a.den_, b.den_);
        const int128 bd = b.den_ / g;
        return {detail::add(detail::mul(a.num_, bd), detail::mul(b.num_, a.den_ / g)),
                detail::mul(a.den_, bd)};
    }
    friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_); }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        const int128 g1 = detail::gcd128(a.num_, b.den_);
        const int128 g2 = detail::gcd128(b.num_, a.den_);
        const int128 s1 = g1 == 0 ? 1 : g1;
        const int128 s2 = g2 == 0 ? 1 : g2;
        return {detail::mul(a.num_ / s1, b.num_ / s2), detail::mul(a.den_ / s2, b.den_ / s1)};
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return a * Rational(b.den_, b.num_);
    }

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        const int128 lhs = detail::mul(a.num_, b.den_);
        const int128 rhs = detail::mul(b.num_, a.den_);
        return lhs < rhs ? std::strong_ordering::less
                         : (lhs > rhs ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

private:
    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        if (num_ == 0) {
            den_ = 1;
            return;
        }
        if (den_ == 1) return;
        const int128 g = detail::gcd128(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    int128 num_ = 0;
    int128 den_ = 1;
};

}  // namespace dispo
