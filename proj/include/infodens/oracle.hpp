#ifndef INFODENS_ORACLE_HPP
#define INFODENS_ORACLE_HPP

// Independent checks for the series: two Monte-Carlo constructions of the
// information density, characteristic-function inversion by quadrature, and
// Kolmogorov-Smirnov distances.

#include "infodens/errors.hpp"
#include "infodens/parallel.hpp"
#include "infodens/quadrature.hpp"
#include "infodens/series.hpp"
#include "infodens/spectrum.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace infodens::oracle {

enum class Construction { sum_representation, joint_gaussian };

struct SampleBatch {
    std::vector<double> values;
    std::uint64_t seed = 0;
    Construction construction = Construction::sum_representation;

    std::size_t n() const noexcept { return values.size(); }
};

namespace detail {

inline constexpr std::size_t kBlock = 1u << 16;

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Standard normals by exact inverse CDF from 53-bit uniforms in (0,1).
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double operator()()
    {
        const double u = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
        return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
    }

private:
    std::mt19937_64 engine_;
};

// Block b of a batch always uses the same stream, whatever the thread count.
template <class Draw>
SampleBatch sample_blocks(std::size_t n, std::uint64_t seed, Construction c, unsigned threads, Draw&& draw)
{
    if (n == 0) {
        throw InputError("sample size must be >= 1");
    }
    SampleBatch batch;
    batch.seed = seed;
    batch.construction = c;
    batch.values.resize(n);
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    const std::uint64_t tag = c == Construction::sum_representation ? 0x5u : 0xAu;
    parallel::parallel_for(blocks, threads, [&](std::size_t b) {
        NormalStream normal(splitmix64(splitmix64(seed ^ tag) + b));
        const std::size_t lo = b * kBlock;
        const std::size_t hi = std::min(n, lo + kBlock);
        for (std::size_t i = lo; i < hi; ++i) {
            batch.values[i] = draw(normal);
        }
    });
    return batch;
}

inline void check_spectrum(const CanonicalSpectrum& s)
{
    if (s.rank() == 0) {
        throw InputError("sampling needs r >= 1");
    }
}

} // namespace detail

// I + (1/2) sum rho_i (xi_i^2 - eta_i^2) with 2r independent standard normals.
inline SampleBatch sample_sum_representation(const CanonicalSpectrum& s, std::size_t n, std::uint64_t seed,
                                             unsigned threads = 0)
{
    detail::check_spectrum(s);
    const std::vector<double> rho(s.correlations().begin(), s.correlations().end());
    const double info = s.mutual_information();
    return detail::sample_blocks(n, seed, Construction::sum_representation, threads, [&](detail::NormalStream& g) {
        double acc = 0.0;
        for (double c : rho) {
            const double a = g();
            const double b = g();
            acc += c * (a * a - b * b);
        }
        return info + 0.5 * acc;
    });
}

// Sum over pairs (x, rho x + sqrt(1-rho^2) w) of the log ratio of the bivariate
// normal density to the product of its marginals.
inline SampleBatch sample_joint_gaussian(const CanonicalSpectrum& s, std::size_t n, std::uint64_t seed,
                                         unsigned threads = 0)
{
    detail::check_spectrum(s);
    struct Pair {
        double rho, sd, log_term, quad;
    };
    std::vector<Pair> pairs;
    for (double rho : s.correlations()) {
        const double one_minus = std::fma(-rho, rho, 1.0);
        pairs.push_back({rho, std::sqrt(one_minus), -0.5 * std::log(one_minus), rho * rho / (2.0 * one_minus)});
    }
    return detail::sample_blocks(n, seed, Construction::joint_gaussian, threads, [&](detail::NormalStream& g) {
        double acc = 0.0;
        for (const auto& p : pairs) {
            const double x = g();
            const double y = p.rho * x + p.sd * g();
            acc += p.log_term - p.quad * (x * x - 2.0 * x * y / p.rho + y * y);
        }
        return acc;
    });
}

struct QuadratureValue {
    double value = 0.0;
    double error = 0.0;
};

// f(x) = (1/pi) int_0^inf phi(t) cos(t (x - I)) dt, integrated between
// consecutive zeros of the cosine and accelerated with Wynn's epsilon.
inline QuadratureValue pdf_quadrature(const CanonicalSpectrum& s, double x)
{
    if (s.rank() < 2) {
        throw NotApplicableError("quadrature oracle needs r >= 2 (the integrand decays too slowly for r = 1)");
    }
    const double v = std::fabs(x - s.mutual_information());
    auto phi = [&s](double t) { return series::characteristic_function(s, t); };
    QuadratureValue out;
    if (v == 0.0) {
        const auto e = quadrature::integrate_to_infinity(phi, 0.0, 1e-14);
        out.value = e.value / std::numbers::pi;
        out.error = e.error / std::numbers::pi;
        return out;
    }
    const double r = static_cast<double>(s.rank());
    double log_prod = 0.0;
    for (double rho : s.correlations()) {
        log_prod -= std::log(rho);
    }
    // int_T^inf phi <= prod(1/rho_i) T^{1-r} / (r-1)
    auto tail_bound = [&](double t) { return std::exp(log_prod + (1.0 - r) * std::log(t)) / (r - 1.0); };

    auto integrand = [&](double t) { return phi(t) * std::cos(t * v); };
    const double h = std::numbers::pi / v;
    // first quarter period on doubling pieces: it can be very long when v is tiny
    double sum = 0.0;
    bool converged = false;
    for (double a = 0.0, b = std::min(1.0 / s.smallest(), 0.5 * h);; a = b, b = std::min(2.0 * b, 0.5 * h)) {
        sum += quadrature::integrate(integrand, a, b, 1e-12).value;
        if (tail_bound(b) <= 1e-13 * std::numbers::pi) {
            converged = true;
            out.error = tail_bound(b) / std::numbers::pi;
            break;
        }
        if (b >= 0.5 * h) {
            break;
        }
    }
    if (converged) {
        out.value = sum / std::numbers::pi;
        return out;
    }
    std::vector<double> partial;
    partial.push_back(sum);
    constexpr std::size_t kMaxIntervals = 20000;
    double previous = sum;
    double best = sum;
    double best_err = std::numeric_limits<double>::infinity();
    std::size_t last_gain = 0;
    for (std::size_t j = 0; j < kMaxIntervals; ++j) {
        const double a = (static_cast<double>(j) + 0.5) * h;
        const double term = quadrature::integrate(integrand, a, a + h, 1e-12).value;
        sum += term;
        partial.push_back(sum);
        const double bound = tail_bound(a + h);
        if (bound <= 1e-13 * std::numbers::pi) {
            best = sum;
            best_err = bound;
            break;
        }
        if (partial.size() >= 12 && partial.size() % 4 == 0) {
            const std::size_t len = std::min<std::size_t>(partial.size(), 40);
            const auto w = quadrature::wynn_epsilon(std::span(partial).last(len));
            const double err = std::max(w.error, std::fabs(w.value - previous));
            previous = w.value;
            if (err < best_err) {
                best = w.value;
                best_err = err;
                last_gain = j;
            }
            // rounding in the partial sums floors err near 1e-16 * |sum|
            if (err <= 1e-12 || (best_err <= 1e-10 && j > last_gain + 400)) {
                break;
            }
        }
    }
    out.value = best / std::numbers::pi;
    out.error = best_err / std::numbers::pi;
    return out;
}

// sup |F_n - F| by the sorted-sample formula.
inline double ks_statistic(std::span<const double> values, const std::function<double(double)>& cdf)
{
    if (values.empty()) {
        throw InputError("KS statistic needs a nonempty sample");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

inline double ks_statistic(const SampleBatch& batch, const std::function<double(double)>& cdf)
{
    return ks_statistic(batch.values, cdf);
}

// Same, with the model CDF supplied for the sorted sample in bulk (lets callers
// evaluate it on many threads).
inline double ks_statistic_sorted(std::span<const double> sorted, std::span<const double> cdf_values)
{
    if (sorted.empty() || sorted.size() != cdf_values.size()) {
        throw InputError("KS statistic needs matching nonempty inputs");
    }
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf_values[i];
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

inline double two_sample_ks(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) {
        throw InputError("two-sample KS needs nonempty samples");
    }
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double t = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= t) {
            ++i;
        }
        while (j < y.size() && y[j] <= t) {
            ++j;
        }
        d = std::max(d, std::fabs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return d;
}

// Asymptotic Kolmogorov critical value c(alpha) sqrt(1/n) (one sample) or
// c(alpha) sqrt((n+m)/(n m)) (two samples).
inline double ks_critical(double alpha, double n, double m = 0.0)
{
    if (!(alpha > 0.0 && alpha < 1.0) || !(n >= 1.0) || m < 0.0) {
        throw InputError("ks_critical needs 0 < alpha < 1, n >= 1 and m >= 0");
    }
    const double c = std::sqrt(-0.5 * std::log(0.5 * alpha));
    return m > 0.0 ? c * std::sqrt((n + m) / (n * m)) : c / std::sqrt(n);
}

} // namespace infodens::oracle

#endif // INFODENS_ORACLE_HPP
