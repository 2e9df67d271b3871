#ifndef INFODENS_KERNELS_HPP
#define INFODENS_KERNELS_HPP

// Direct special-function definitions of the two kernels shared by the PDF and
// CDF series. With alpha = (r-1)/2 + k and a scaled abscissa w >= 0:
//
//   U_k(w) = K_alpha(w) (w/2)^alpha / Gamma(alpha + 1/2)
//   D_k(w) = (w/2) [K_alpha(w) L_{alpha-1}(w) + K_{alpha-1}(w) L_alpha(w)]
//
// These evaluate each kernel from scratch. The recurrence path in fasteval.hpp
// is checked against them.

#include "infodens/errors.hpp"
#include "infodens/specialfn.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace infodens::kernels {

inline specialfn::Order kernel_order(long r, long k)
{
    return specialfn::Order::from_twice(r - 1 + 2 * k);
}

// U_k(0) = Gamma(alpha) / (2 Gamma(alpha + 1/2)); requires alpha > 0.
inline double u_at_zero(long r, long k)
{
    const double alpha = 0.5 * static_cast<double>(r - 1) + static_cast<double>(k);
    if (!(alpha > 0.0)) {
        throw PoleError("U_0 is unbounded at zero for a single correlation");
    }
    return std::exp(specialfn::lgamma(alpha) - std::numbers::ln2 - specialfn::lgamma(alpha + 0.5));
}

// log(e^w U_k(w)) for w > 0.
inline double log_u_scaled(long r, long k, double w)
{
    const double alpha = 0.5 * static_cast<double>(r - 1) + static_cast<double>(k);
    return specialfn::log_bessel_k_scaled(kernel_order(r, k), w) + alpha * (std::log(w) - std::numbers::ln2) -
           specialfn::lgamma(alpha + 0.5);
}

// e^w U_k(w), with the limit value at w = 0.
inline double u_scaled(long r, long k, double w)
{
    return w == 0.0 ? u_at_zero(r, k) : std::exp(log_u_scaled(r, k, w));
}

inline double u(long r, long k, double w)
{
    return w == 0.0 ? u_at_zero(r, k) : std::exp(log_u_scaled(r, k, w) - w);
}

// D_k(w) from Bessel K and Struve L; D_k(0) = 0.
inline double d(long r, long k, double w)
{
    if (w == 0.0) {
        return 0.0;
    }
    const auto hi = kernel_order(r, k);
    const auto lo = specialfn::Order::from_twice(r - 3 + 2 * k);
    const double a = specialfn::log_bessel_k_scaled(hi, w) + specialfn::log_struve_l_scaled(lo, w);
    const double b = specialfn::log_bessel_k_scaled(lo, w) + specialfn::log_struve_l_scaled(hi, w);
    return 0.5 * w * (std::exp(a) + std::exp(b));
}

} // namespace infodens::kernels

#endif // INFODENS_KERNELS_HPP
