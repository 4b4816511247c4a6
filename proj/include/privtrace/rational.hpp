#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace privtrace {

/// Exact rational number on 64-bit numerator/denominator.
///
/// Always stored normalized: gcd(num, den) == 1 and den > 0. Intermediate
/// products use 128-bit arithmetic; results that do not fit back into 64 bits
/// throw std::overflow_error rather than wrap.
class Rational {
public:
    constexpr Rational() : num_(0), den_(1) {}
    constexpr Rational(std::int64_t n) : num_(n), den_(1) {}

    Rational(std::int64_t num, std::int64_t den) {
        if (den == 0) throw std::domain_error("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const std::int64_t g = std::gcd(num, den);
        num_ = g ? num / g : num;
        den_ = g ? den / g : den;
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_,
                    i128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.den_ - i128(b.num_) * a.den_,
                    i128(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
        return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }
    friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_); }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        return i128(a.num_) * b.den_ <=> i128(b.num_) * a.den_;
    }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    /// Renders as "n" for integers and "n/d" otherwise.
    std::string to_string() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    /// Accepts "3", "-5", "3/4", "-3/4" and decimal forms like "1.5".
    static Rational parse(std::string_view text);

    /// Smallest integer >= *this.
    std::int64_t ceil() const {
        if (num_ >= 0) return (num_ + den_ - 1) / den_;
        return -((-num_) / den_);
    }
    /// Largest integer <= *this.
    std::int64_t floor() const {
        if (num_ >= 0) return num_ / den_;
        return -(((-num_) + den_ - 1) / den_);
    }

private:
    using i128 = __int128;

    static Rational make(i128 num, i128 den) {
        if (den < 0) { num = -num; den = -den; }
        const i128 g = gcd128(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
        if (num > INT64_MAX_128 || num < -INT64_MAX_128 || den > INT64_MAX_128)
            throw std::overflow_error("Rational: value out of 64-bit range");
        Rational r;
        r.num_ = static_cast<std::int64_t>(num);
        r.den_ = static_cast<std::int64_t>(den);
        return r;
    }

    static i128 gcd128(i128 a, i128 b) {
        while (b != 0) { const i128 t = a % b; a = b; b = t; }
        return a == 0 ? 1 : a;
    }

    static constexpr i128 INT64_MAX_128 = 0x7fffffffffffffffLL;

    std::int64_t num_;
    std::int64_t den_;
};

inline Rational abs(const Rational& r) {
    return r.num() < 0 ? -r : r;
}

inline Rational Rational::parse(std::string_view text) {
    const auto bad = [&] {
        return std::invalid_argument("not a rational: '" + std::string(text) + "'");
    };
    if (text.empty()) throw bad();

    const auto slash = text.find('/');
    const auto dot = text.find('.');
    try {
        if (slash != std::string_view::npos) {
            const std::int64_t n = std::stoll(std::string(text.substr(0, slash)));
            const std::int64_t d = std::stoll(std::string(text.substr(slash + 1)));
            return Rational(n, d);
        }
        if (dot != std::string_view::npos) {
            const std::string whole(text.substr(0, dot));
            const std::string frac(text.substr(dot + 1));
            if (frac.empty() || frac.size() > 18) throw bad();
            for (char c : frac)
                if (c < '0' || c > '9') throw bad();
            std::int64_t scale = 1;
            for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
            const std::int64_t w = whole.empty() || whole == "-" ? 0 : std::stoll(whole);
            const std::int64_t f = std::stoll(frac);
            const bool neg = !whole.empty() && whole[0] == '-';
            const std::int64_t num = w * scale + (neg ? -f : f);
            return Rational(num, scale);
        }
        return Rational(std::stoll(std::string(text)));
    } catch (const std::invalid_argument&) {
        throw bad();
    } catch (const std::out_of_range&) {
        throw std::overflow_error("rational literal out of range: '" + std::string(text) + "'");
    }
}

}  // namespace privtrace
