#ifndef INFODENS_SPECIALFN_HPP
#define INFODENS_SPECIALFN_HPP

// Exponentially scaled modified Bessel K and modified Struve L at integer and
// half-integer orders, plus a domain-checked log-gamma.
//
//   bessel_k_scaled(a, z) = e^{+z} K_a(z)
//   struve_l_scaled(a, z) = e^{-z} L_a(z)
//
// With these conventions the products K_a L_b that appear in the CDF kernels can
// be formed for large z without overflow. The log_* variants never overflow and
// are what the distribution kernels use internally.

#include "infodens/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace infodens::specialfn {

// An order restricted to multiples of 1/2, no smaller than -1.
class Order {
public:
    explicit Order(double value)
    {
        const double twice = 2.0 * value;
        if (!std::isfinite(value) || twice != std::round(twice)) {
            throw DomainError("order must be a multiple of 1/2, got " + std::to_string(value));
        }
        twice_ = static_cast<long>(twice);
        if (twice_ < -2) {
            throw DomainError("order must be >= -1, got " + std::to_string(value));
        }
    }

    static Order from_twice(long twice) { return Order(0.5 * static_cast<double>(twice)); }

    double value() const noexcept { return 0.5 * static_cast<double>(twice_); }
    long twice() const noexcept { return twice_; }
    bool is_integer() const noexcept { return twice_ % 2 == 0; }

private:
    long twice_ = 0;
};

inline double lgamma(double x)
{
    if (!(x > 0.0)) {
        throw DomainError("lgamma: argument must be positive");
    }
#if defined(__GLIBC__) || defined(__APPLE__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr int kRescaleBits = 300;
inline const double kRescaleUp = std::ldexp(1.0, kRescaleBits);
inline const double kRescaleDown = std::ldexp(1.0, -kRescaleBits);

// A positive number held as mantissa * 2^exp2 so that long recurrences never
// overflow. Rescaling uses exact powers of two.
struct Scaled {
    double mantissa = 0.0;
    long exp2 = 0;

    double log() const { return std::log(mantissa) + static_cast<double>(exp2) * std::numbers::ln2; }
};

// e^x K_0(x) and e^x K_1(x): Temme's series for x < 2, Steed's continued
// fraction CF2 otherwise.
struct K01 {
    double k0;
    double k1;
};

inline K01 bessel_k01_scaled(double x)
{
    constexpr double euler_gamma = 0.57721566490153286061;
    constexpr int max_iter = 100000;
    if (x < 2.0) {
        const double half = 0.5 * x;
        double ff = -std::log(half) - euler_gamma;
        double p = 0.5;
        double q = 0.5;
        double c = 1.0;
        const double d = half * half;
        double sum = ff;
        double sum1 = p;
        for (int i = 1; i <= max_iter; ++i) {
            const double di = static_cast<double>(i);
            ff = (di * ff + p + q) / (di * di);
            c *= d / di;
            p /= di;
            q /= di;
            const double del = c * ff;
            sum += del;
            sum1 += c * (p - di * ff);
            if (std::fabs(del) < std::fabs(sum) * kEps) {
                break;
            }
        }
        const double ex = std::exp(x);
        return {sum * ex, sum1 * (2.0 / x) * ex};
    }

    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 1; i <= max_iter; ++i) {
        const double di = static_cast<double>(i);
        a -= 2.0 * di;
        c = -a * c / (di + 1.0);
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::fabs(dels / s) < kEps) {
            break;
        }
    }
    h = a1 * h;
    const double k0 = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
    const double k1 = k0 * (x + 0.5 - h) / x;
    return {k0, k1};
}

// e^x K_n(x) for integer n >= 0 by upward recurrence, which is stable for K.
inline Scaled bessel_k_integer_scaled(long n, double x)
{
    const K01 base = bessel_k01_scaled(x);
    if (n == 0) {
        return {base.k0, 0};
    }
    double prev = base.k0;
    double curr = base.k1;
    long exp2 = 0;
    for (long k = 1; k < n; ++k) {
        const double next = prev + (2.0 * static_cast<double>(k) / x) * curr;
        prev = curr;
        curr = next;
        if (curr > kRescaleUp) {
            prev *= kRescaleDown;
            curr *= kRescaleDown;
            exp2 += kRescaleBits;
        }
    }
    return {curr, exp2};
}

// e^x K_{n+1/2}(x) from the terminating sum
//   K_{n+1/2}(x) = sqrt(pi/(2x)) e^{-x} sum_{i=0}^{n} (n+i)! / ((n-i)! i! (2x)^i).
// All terms are positive, so the sum is accurate to rounding.
inline Scaled bessel_k_half_integer_scaled(long n, double x)
{
    double term = 1.0;
    double sum = 1.0;
    long exp2 = 0;
    for (long i = 0; i < n; ++i) {
        const double di = static_cast<double>(i);
        const double dn = static_cast<double>(n);
        term *= (dn + di + 1.0) * (dn - di) / ((di + 1.0) * 2.0 * x);
        sum += term;
        if (sum > kRescaleUp) {
            sum *= kRescaleDown;
            term *= kRescaleDown;
            exp2 += kRescaleBits;
        }
    }
    const double pref = std::sqrt(std::numbers::pi / (2.0 * x));
    return {sum * pref, exp2};
}

// log(e^{-x} L_nu(x)) from the ascending series
//   L_nu(x) = sum_k (x/2)^{2k+nu+1} / (Gamma(k+3/2) Gamma(k+nu+3/2)),
// whose terms are all positive for nu > -3/2. Requires x > 0.
inline double log_struve_l_series_scaled(double nu, double x)
{
    const double half = 0.5 * x;
    const double half2 = half * half;
    const double log_t0 = (nu + 1.0) * std::log(half) - lgamma(1.5) - lgamma(nu + 1.5);
    double term = 1.0;
    double sum = 1.0;
    long exp2 = 0;
    constexpr long max_iter = 10'000'000;
    for (long k = 0; k < max_iter; ++k) {
        const double dk = static_cast<double>(k);
        const double ratio = half2 / ((dk + 1.5) * (dk + nu + 1.5));
        term *= ratio;
        sum += term;
        if (sum > kRescaleUp) {
            sum *= kRescaleDown;
            term *= kRescaleDown;
            exp2 += kRescaleBits;
        }
        if (ratio < 0.5 && term < 0.25 * kEps * sum) {
            break;
        }
    }
    return log_t0 + std::log(sum) + static_cast<double>(exp2) * std::numbers::ln2 - x;
}

} // namespace detail

// log(e^z K_a(z)). Finite for every z > 0 representable in double.
inline double log_bessel_k_scaled(Order order, double z)
{
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw DomainError("bessel_k: argument must be positive and finite");
    }
    const long twice = std::labs(order.twice());
    if (z < 1e-30) {
        // leading small-z term; corrections are below rounding here
        if (twice == 0) {
            constexpr double euler_gamma = 0.57721566490153286061;
            return std::log(std::numbers::ln2 - std::log(z) - euler_gamma) + z;
        }
        const double nu = 0.5 * static_cast<double>(twice);
        return lgamma(nu) + nu * (std::numbers::ln2 - std::log(z)) - std::numbers::ln2 + z;
    }
    if (twice % 2 == 0) {
        return detail::bessel_k_integer_scaled(twice / 2, z).log();
    }
    return detail::bessel_k_half_integer_scaled((twice - 1) / 2, z).log();
}

// e^z K_a(z). Throws NumericalFailure when the scaled value exceeds double range
// (large orders at small z); use log_bessel_k_scaled there.
inline double bessel_k_scaled(Order order, double z)
{
    const double value = std::exp(log_bessel_k_scaled(order, z));
    if (!std::isfinite(value)) {
        throw NumericalFailure("bessel_k_scaled: result overflows double precision");
    }
    return value;
}

// log(e^{-z} L_a(z)); -infinity where L_a(z) = 0 (z = 0, a > -1).
inline double log_struve_l_scaled(Order order, double z)
{
    if (!(z >= 0.0) || !std::isfinite(z)) {
        throw DomainError("struve_l: argument must be nonnegative and finite");
    }
    const double nu = order.value();
    if (z == 0.0) {
        return order.twice() == -2 ? std::log(2.0 / std::numbers::pi)
                                   : -std::numeric_limits<double>::infinity();
    }
    if (order.twice() == -1) {
        // L_{-1/2}(z) = sqrt(2/(pi z)) sinh z
        return 0.5 * std::log(2.0 / (std::numbers::pi * z)) + std::log(-0.5 * std::expm1(-2.0 * z));
    }
    if (order.twice() == -2) {
        // L_{-1}(z) = L_1(z) + 2/pi
        const double log_l1 = detail::log_struve_l_series_scaled(1.0, z);
        const double log_c = std::log(2.0 / std::numbers::pi) - z;
        const double hi = std::max(log_l1, log_c);
        return hi + std::log(std::exp(log_l1 - hi) + std::exp(log_c - hi));
    }
    return detail::log_struve_l_series_scaled(nu, z);
}

inline double struve_l_scaled(Order order, double z)
{
    return std::exp(log_struve_l_scaled(order, z));
}

} // namespace infodens::specialfn

#endif // INFODENS_SPECIALFN_HPP
