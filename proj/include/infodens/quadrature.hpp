#ifndef INFODENS_QUADRATURE_HPP
#define INFODENS_QUADRATURE_HPP

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace infodens::quadrature {

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

// Adaptive 61-point Gauss-Kronrod on a finite interval.
template <class F>
Estimate integrate(F&& f, double a, double b, double rel_tol = 1e-13, unsigned max_depth = 12)
{
    Estimate e;
    double l1 = 0.0;
    e.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, max_depth, rel_tol,
                                                                           &e.error, &l1);
    return e;
}

// Tanh-sinh on a finite interval; tolerates integrable endpoint singularities.
template <class F>
Estimate integrate_singular(F&& f, double a, double b, double rel_tol = 1e-13)
{
    thread_local boost::math::quadrature::tanh_sinh<double> integrator;
    Estimate e;
    double l1 = 0.0;
    e.value = integrator.integrate(f, a, b, rel_tol, &e.error, &l1);
    return e;
}

// Exp-sinh on [a, infinity).
template <class F>
Estimate integrate_to_infinity(F&& f, double a, double rel_tol = 1e-13)
{
    thread_local boost::math::quadrature::exp_sinh<double> integrator;
    Estimate e;
    double l1 = 0.0;
    e.value = integrator.integrate(f, a, std::numeric_limits<double>::infinity(), rel_tol, &e.error, &l1);
    return e;
}

// Wynn's epsilon algorithm applied to a sequence of partial sums. Returns the
// last even-column entry and the distance to the previous one as an error proxy.
inline Estimate wynn_epsilon(std::span<const double> partial_sums)
{
    const std::size_t n = partial_sums.size();
    if (n == 0) {
        return {};
    }
    if (n < 3) {
        return {partial_sums.back(), n == 2 ? std::fabs(partial_sums[1] - partial_sums[0]) : 0.0};
    }
    // e_prev holds column k-1, e_curr column k.
    std::vector<double> e_prev(n + 1, 0.0);
    std::vector<double> e_curr(partial_sums.begin(), partial_sums.end());
    Estimate best{partial_sums.back(), std::fabs(partial_sums[n - 1] - partial_sums[n - 2])};
    double last_even = partial_sums.back();
    for (std::size_t col = 1; col < n; ++col) {
        const std::size_t len = n - col;
        std::vector<double> next(len);
        bool ok = true;
        for (std::size_t i = 0; i < len; ++i) {
            const double diff = e_curr[i + 1] - e_curr[i];
            if (diff == 0.0 || !std::isfinite(diff)) {
                ok = false;
                break;
            }
            next[i] = e_prev[i + 1] + 1.0 / diff;
        }
        if (!ok) {
            break;
        }
        e_prev = std::move(e_curr);
        e_curr = std::move(next);
        if (col % 2 == 0) {
            const double candidate = e_curr.back();
            if (!std::isfinite(candidate)) {
                break;
            }
            const double err = std::fabs(candidate - last_even);
            if (err <= best.error) {
                best = {candidate, err};
            }
            last_even = candidate;
        }
    }
    return best;
}

} // namespace infodens::quadrature

#endif // INFODENS_QUADRATURE_HPP
