#ifndef INFODENS_SERIES_HPP
#define INFODENS_SERIES_HPP

// Reference evaluation of the information-density law: multi-index box sums
// for PDF and CDF, equal-correlation formulas, central moments, the shifted
// characteristic function and a moment-matched Gaussian.
//
// Box sum (r >= 2, w = |x - I| / rho_r):
//   f(x) ~ 1/(rho_r sqrt(pi)) sum_{k_1..k_{r-1} <= caps} prod_i c_i(k_i) U_K(w)
//   c_i(k) = (rho_r/rho_i) (2k)!/(4^k k!^2) (1 - rho_r^2/rho_i^2)^k,  K = sum k_i
// and the CDF uses D_K in place of U_K / (rho_r sqrt(pi)).

#include "infodens/errors.hpp"
#include "infodens/kernels.hpp"
#include "infodens/specialfn.hpp"
#include "infodens/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace infodens {

struct ApproxValue {
    double value = 0.0;
    long n_terms = 1;
    double error_bound = 0.0;
    bool underflow = false; // the final e^{-w} factor underflowed (PDF only)
};

namespace series {

namespace detail {

// Per-index coefficients c_i(0..cap).
inline std::vector<double> box_coefficients(double rho_r, double rho_i, long cap)
{
    std::vector<double> c(static_cast<std::size_t>(cap) + 1);
    const double ratio = rho_r / rho_i;
    const double b = 1.0 - ratio * ratio;
    c[0] = ratio;
    for (long k = 0; k < cap; ++k) {
        c[k + 1] = c[k] * b * (2.0 * k + 1.0) / (2.0 * k + 2.0);
    }
    return c;
}

// Per-index partial sums s_i(n) = sum_{k<=n} c_i(k); the box sum of
// coefficients factorizes as the product of these.
inline double box_coefficient_mass(const CanonicalSpectrum& s, std::span<const long> caps)
{
    const double rho_r = s.smallest();
    double mass = 1.0;
    for (std::size_t i = 0; i < caps.size(); ++i) {
        const auto c = box_coefficients(rho_r, s[i], caps[i]);
        double partial = 0.0;
        for (double v : c) {
            partial += v;
        }
        mass *= partial;
    }
    return mass;
}

inline double pdf_gamma_factor(double r, double order_offset, double rho_r)
{
    // Gamma((r-1)/2 + N) / (2 rho_r sqrt(pi) Gamma(r/2 + N))
    const double a = 0.5 * (r - 1.0) + order_offset;
    return std::exp(specialfn::lgamma(a) - specialfn::lgamma(a + 0.5)) / (2.0 * rho_r) *
           std::numbers::inv_sqrtpi;
}

inline void check_caps(const CanonicalSpectrum& s, std::span<const long> caps)
{
    if (s.rank() == 0) {
        throw InputError("rank 0: the information density is identically zero and has no density");
    }
    if (caps.size() != s.rank() - 1) {
        throw InputError("caps must have r-1 = " + std::to_string(s.rank() - 1) + " entries, got " +
                         std::to_string(caps.size()));
    }
    for (long c : caps) {
        if (c < 0) {
            throw InputError("caps must be nonnegative");
        }
    }
}

// Walks every multi-index in the box and accumulates coef * kernel(K).
template <class Kernel>
double box_sum(const CanonicalSpectrum& s, std::span<const long> caps, Kernel&& kernel)
{
    const std::size_t dims = caps.size();
    const double rho_r = s.smallest();
    std::vector<std::vector<double>> coef(dims);
    for (std::size_t i = 0; i < dims; ++i) {
        coef[i] = box_coefficients(rho_r, s[i], caps[i]);
    }
    std::unordered_map<long, double> cache;
    auto kernel_at = [&](long total) {
        auto it = cache.find(total);
        if (it != cache.end()) {
            return it->second;
        }
        const double v = kernel(total);
        cache.emplace(total, v);
        return v;
    };

    std::vector<long> idx(dims, 0);
    double sum = 0.0;
    while (true) {
        double c = 1.0;
        long total = 0;
        for (std::size_t i = 0; i < dims; ++i) {
            c *= coef[i][static_cast<std::size_t>(idx[i])];
            total += idx[i];
        }
        if (c != 0.0) {
            sum += c * kernel_at(total);
        }
        std::size_t d = 0;
        while (d < dims) {
            if (idx[d] < caps[d]) {
                ++idx[d];
                break;
            }
            idx[d] = 0;
            ++d;
        }
        if (d == dims) {
            break;
        }
    }
    return sum;
}

inline long box_size(std::span<const long> caps)
{
    long n = 1;
    for (long c : caps) {
        n *= c + 1;
    }
    return n;
}

} // namespace detail

// Bound printed with the box sum: the Gamma ratio is taken at N = sum caps.
inline double pdf_box_bound(const CanonicalSpectrum& s, std::span<const long> caps)
{
    detail::check_caps(s, caps);
    if (s.rank() == 1) {
        return 0.0;
    }
    long total = 0;
    for (long c : caps) {
        total += c;
    }
    const double deficit = std::max(0.0, 1.0 - detail::box_coefficient_mass(s, caps));
    return detail::pdf_gamma_factor(static_cast<double>(s.rank()), static_cast<double>(total), s.smallest()) *
           deficit;
}

// Same deficit with the Gamma ratio at the smallest order a tail multi-index can
// have, min_i (caps_i + 1). Never smaller than pdf_box_bound.
inline double pdf_box_bound_conservative(const CanonicalSpectrum& s, std::span<const long> caps)
{
    detail::check_caps(s, caps);
    if (s.rank() == 1) {
        return 0.0;
    }
    const long min_tail = *std::min_element(caps.begin(), caps.end()) + 1;
    const double deficit = std::max(0.0, 1.0 - detail::box_coefficient_mass(s, caps));
    return detail::pdf_gamma_factor(static_cast<double>(s.rank()), static_cast<double>(min_tail),
                                    s.smallest()) *
           deficit;
}

inline double cdf_box_bound(const CanonicalSpectrum& s, std::span<const long> caps)
{
    detail::check_caps(s, caps);
    if (s.rank() == 1) {
        return 0.0;
    }
    return 0.5 * std::max(0.0, 1.0 - detail::box_coefficient_mass(s, caps));
}

enum class Kind { pdf, cdf };

// Per-index caps whose box bound is at most target. Each index gets an equal
// share of the deficit budget; the PDF budget uses the largest possible Gamma
// ratio (order (r-1)/2), so it also satisfies the conservative bound.
inline std::vector<long> caps_for_target(const CanonicalSpectrum& s, double target, Kind kind,
                                         long max_cap = 10'000'000)
{
    if (!(target > 0.0)) {
        throw InputError("target error must be positive");
    }
    if (s.rank() == 0) {
        throw InputError("rank 0 has no density");
    }
    const std::size_t dims = s.rank() - 1;
    std::vector<long> caps(dims, 0);
    if (dims == 0) {
        return caps;
    }
    const double scale = kind == Kind::cdf
                             ? 0.5
                             : detail::pdf_gamma_factor(static_cast<double>(s.rank()), 0.0, s.smallest());
    const double share = target / (scale * static_cast<double>(dims));
    const double rho_r = s.smallest();
    for (std::size_t i = 0; i < dims; ++i) {
        const double ratio = rho_r / s[i];
        const double b = 1.0 - ratio * ratio;
        double c = ratio;
        double partial = c;
        long k = 0;
        while (1.0 - partial > share) {
            // rounding floor: further terms no longer move the partial sum
            if (k >= max_cap || c < 0.25 * std::numeric_limits<double>::epsilon() * share) {
                throw TruncationFailure("box caps exceed the per-index limit", scale * (1.0 - partial), k);
            }
            c *= b * (2.0 * k + 1.0) / (2.0 * k + 2.0);
            partial += c;
            ++k;
        }
        caps[i] = k;
    }
    return caps;
}

inline ApproxValue pdf_direct(const CanonicalSpectrum& s, double x, std::span<const long> caps)
{
    detail::check_caps(s, caps);
    const long r = static_cast<long>(s.rank());
    const double rho_r = s.smallest();
    const double v = x - s.mutual_information();
    const double w = std::fabs(v) / rho_r;
    if (r == 1 && v == 0.0) {
        throw PoleError("density with a single canonical correlation is unbounded at x = I");
    }
    ApproxValue out;
    out.n_terms = detail::box_size(caps);
    const double sum = detail::box_sum(s, caps, [&](long k) { return kernels::u_scaled(r, k, w); });
    const double pre = std::numbers::inv_sqrtpi / rho_r;
    out.value = pre * sum * std::exp(-w);
    out.underflow = out.value == 0.0 && sum > 0.0;
    out.error_bound = pdf_box_bound(s, caps);
    return out;
}

inline ApproxValue cdf_direct(const CanonicalSpectrum& s, double x, std::span<const long> caps)
{
    detail::check_caps(s, caps);
    const long r = static_cast<long>(s.rank());
    const double v = x - s.mutual_information();
    ApproxValue out;
    out.n_terms = detail::box_size(caps);
    out.error_bound = cdf_box_bound(s, caps);
    if (v == 0.0) {
        out.value = 0.5;
        return out;
    }
    const double w = std::fabs(v) / s.smallest();
    const double big_v = detail::box_sum(s, caps, [&](long k) { return kernels::d(r, k, w); });
    out.value = v < 0.0 ? 0.5 - big_v : 0.5 + big_v;
    return out;
}

// ---- equal correlations ------------------------------------------------------

namespace detail {

inline void check_equal(long r, double rho)
{
    if (r < 1) {
        throw InputError("r must be >= 1");
    }
    if (!(rho > 0.0 && rho < 1.0)) {
        throw InputError("rho must lie in (0,1)");
    }
}

// log of (2m-i)! 2^i / ((m-i)! i!)
inline double log_even_coef(long m, long i)
{
    return std::lgamma(static_cast<double>(2 * m - i + 1)) + static_cast<double>(i) * std::numbers::ln2 -
           std::lgamma(static_cast<double>(m - i + 1)) - std::lgamma(static_cast<double>(i + 1));
}

} // namespace detail

// Summed term by term, the same way CanonicalSpectrum does, so both agree bitwise.
inline double equal_mutual_information(long r, double rho)
{
    double sum = 0.0;
    for (long i = 0; i < r; ++i) {
        sum -= 0.5 * std::log1p(-rho * rho);
    }
    return sum;
}

// Single Bessel term, shared arithmetic with pdf_direct at zero caps.
inline double pdf_equal_bessel(long r, double rho, double x)
{
    detail::check_equal(r, rho);
    const double v = x - equal_mutual_information(r, rho);
    if (r == 1 && v == 0.0) {
        throw PoleError("density with a single canonical correlation is unbounded at x = I");
    }
    const double w = std::fabs(v) / rho;
    const double sum = kernels::u_scaled(r, 0, w);
    return std::numbers::inv_sqrtpi / rho * sum * std::exp(-w);
}

inline double cdf_equal_bessel(long r, double rho, double x)
{
    detail::check_equal(r, rho);
    const double v = x - equal_mutual_information(r, rho);
    if (v == 0.0) {
        return 0.5;
    }
    const double w = std::fabs(v) / rho;
    const double big_v = kernels::d(r, 0, w);
    return v < 0.0 ? 0.5 - big_v : 0.5 + big_v;
}

// Even r: f = e^{-w} / (rho 2^{r-1} m!) sum_{i<=m} (2m-i)! 2^i / ((m-i)! i!) w^i, m = r/2 - 1.
inline double pdf_equal_closed(long r, double rho, double x)
{
    detail::check_equal(r, rho);
    if (r % 2 != 0) {
        throw NotApplicableError("closed form needs even r");
    }
    const long m = r / 2 - 1;
    const double w = std::fabs(x - equal_mutual_information(r, rho)) / rho;
    const double log_front = -w - std::log(rho) - static_cast<double>(r - 1) * std::numbers::ln2 -
                             std::lgamma(static_cast<double>(m + 1));
    double sum = 0.0;
    for (long i = 0; i <= m; ++i) {
        const double log_pow = i == 0 ? 0.0 : static_cast<double>(i) * std::log(w);
        if (i > 0 && w == 0.0) {
            break;
        }
        sum += std::exp(detail::log_even_coef(m, i) + log_pow + log_front);
    }
    return sum;
}

// Even r: V(z) = 1/2 - e^{-w}/(2^{r-1} m!) sum_i (2m-i)! 2^i/(m-i)! sum_{j<=i} w^{i-j}/(i-j)!.
// The i! in the PDF weights cancels against the repeated integration.
inline double cdf_equal_closed(long r, double rho, double x)
{
    detail::check_equal(r, rho);
    if (r % 2 != 0) {
        throw NotApplicableError("closed form needs even r");
    }
    const long m = r / 2 - 1;
    const double v = x - equal_mutual_information(r, rho);
    if (v == 0.0) {
        return 0.5;
    }
    const double w = std::fabs(v) / rho;
    const double log_front = -w - static_cast<double>(r - 1) * std::numbers::ln2 -
                             std::lgamma(static_cast<double>(m + 1));
    const double log_w = std::log(w);
    double tail = 0.0;
    for (long i = 0; i <= m; ++i) {
        const double log_c = std::lgamma(static_cast<double>(2 * m - i + 1)) +
                             static_cast<double>(i) * std::numbers::ln2 -
                             std::lgamma(static_cast<double>(m - i + 1));
        for (long l = 0; l <= i; ++l) {
            tail += std::exp(log_c + log_front + static_cast<double>(l) * log_w -
                             std::lgamma(static_cast<double>(l + 1)));
        }
    }
    const double big_v = std::max(0.0, 0.5 - tail);
    return v < 0.0 ? 0.5 - big_v : 0.5 + big_v;
}

inline double pdf_equal(long r, double rho, double x)
{
    return r % 2 == 0 ? pdf_equal_closed(r, rho, x) : pdf_equal_bessel(r, rho, x);
}

inline double cdf_equal(long r, double rho, double x)
{
    return r % 2 == 0 ? cdf_equal_closed(r, rho, x) : cdf_equal_bessel(r, rho, x);
}

// ---- moments, characteristic function, Gaussian reference ----------------------

inline constexpr int kMaxMomentOrder = 64;

// E (i - I)^m. Odd orders vanish; even orders convolve the per-correlation
// polynomials sum_k (2k)!/(4^k k!^2) rho^{2k} t^k and read off t^{m/2}.
inline double central_moment(const CanonicalSpectrum& s, int m)
{
    if (m < 1) {
        throw InputError("moment order must be >= 1");
    }
    if (m > kMaxMomentOrder) {
        throw InputError("moment order above " + std::to_string(kMaxMomentOrder) + " is not supported");
    }
    if (m % 2 == 1 || s.rank() == 0) {
        return 0.0;
    }
    const int half = m / 2;
    const double log_mfact = std::lgamma(static_cast<double>(m + 1));
    if (s.all_equal()) {
        const double r = static_cast<double>(s.rank());
        double log_v = log_mfact - std::lgamma(static_cast<double>(half + 1)) +
                       static_cast<double>(m) * std::log(s.largest());
        for (int j = 1; j <= half; ++j) {
            log_v += std::log(0.5 * r + j - 1);
        }
        return std::exp(log_v);
    }
    std::vector<double> acc(static_cast<std::size_t>(half) + 1, 0.0);
    acc[0] = 1.0;
    std::vector<double> poly(acc.size());
    for (double rho : s.correlations()) {
        const double r2 = rho * rho;
        poly[0] = 1.0;
        for (int k = 0; k < half; ++k) {
            poly[k + 1] = poly[k] * r2 * (2.0 * k + 1.0) / (2.0 * k + 2.0);
        }
        for (int n = half; n >= 0; --n) {
            double v = 0.0;
            for (int k = 0; k <= n; ++k) {
                v += poly[k] * acc[n - k];
            }
            acc[n] = v;
        }
    }
    return std::exp(log_mfact) * acc[half];
}

// Characteristic function of i - I: prod (1 + rho_i^2 t^2)^{-1/2}.
inline double characteristic_function(const CanonicalSpectrum& s, double t)
{
    double log_phi = 0.0;
    for (double rho : s.correlations()) {
        const double a = rho * t;
        log_phi -= 0.5 * std::log1p(a * a);
    }
    return std::exp(log_phi);
}

struct GaussianValue {
    double pdf = 0.0;
    double cdf = 0.0;
};

// Normal law with mean I and variance sum rho_i^2.
inline GaussianValue gaussian_reference(const CanonicalSpectrum& s, double x)
{
    if (s.rank() == 0) {
        throw InputError("rank 0 has no Gaussian reference");
    }
    const double sd = std::sqrt(s.variance());
    const double z = (x - s.mutual_information()) / sd;
    GaussianValue g;
    g.pdf = std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
    g.cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    return g;
}

} // namespace series
} // namespace infodens

#endif // INFODENS_SERIES_HPP
