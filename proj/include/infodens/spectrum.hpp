#ifndef INFODENS_SPECTRUM_HPP
#define INFODENS_SPECTRUM_HPP

#include "infodens/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace infodens {

// Sum of log(1/(1 - rho_i^2)) / 2, in nats.
inline double mutual_information(std::span<const double> correlations)
{
    double sum = 0.0;
    for (double rho : correlations) {
        sum -= 0.5 * std::log1p(-rho * rho);
    }
    return sum;
}

// Canonical correlations rho_1 >= ... >= rho_r > 0 of a jointly Gaussian pair,
// together with the mutual information they determine.
class CanonicalSpectrum {
public:
    CanonicalSpectrum() = default;

    // Sorts descending. Every entry must lie strictly inside (0, 1).
    static CanonicalSpectrum from_correlations(std::vector<double> correlations,
                                               double rank_tolerance = 0.0)
    {
        for (double rho : correlations) {
            if (!(rho > 0.0 && rho < 1.0)) {
                throw InputError("canonical correlation outside (0,1): " + std::to_string(rho));
            }
        }
        std::sort(correlations.begin(), correlations.end(), std::greater<>());
        CanonicalSpectrum s;
        s.correlations_ = std::move(correlations);
        s.mutual_information_ = infodens::mutual_information(s.correlations_);
        s.rank_tolerance_ = rank_tolerance;
        return s;
    }

    std::span<const double> correlations() const noexcept { return correlations_; }
    std::size_t rank() const noexcept { return correlations_.size(); }
    double mutual_information() const noexcept { return mutual_information_; }
    double rank_tolerance() const noexcept { return rank_tolerance_; }

    double operator[](std::size_t i) const { return correlations_[i]; }
    double largest() const { return correlations_.front(); }
    double smallest() const { return correlations_.back(); }

    bool all_equal() const noexcept
    {
        return correlations_.empty() || correlations_.front() == correlations_.back();
    }

    double variance() const noexcept
    {
        double v = 0.0;
        for (double rho : correlations_) {
            v += rho * rho;
        }
        return v;
    }

private:
    std::vector<double> correlations_;
    double mutual_information_ = 0.0;
    double rank_tolerance_ = 0.0;
};

inline double mutual_information(const CanonicalSpectrum& spectrum)
{
    return spectrum.mutual_information();
}

// r identical correlations.
inline CanonicalSpectrum equal_spectrum(double rho, std::size_t r)
{
    if (r == 0) {
        throw InputError("equal spectrum needs r >= 1");
    }
    return CanonicalSpectrum::from_correlations(std::vector<double>(r, rho));
}

// Canonical correlations of a continuous-time AWGN channel on [0, T] with a
// Brownian-motion input: rho_i^2 = T^2 / (T^2 + pi^2 (i - 1/2)^2), i = 1..r.
// The pi^2 comes from the Karhunen-Loeve eigenvalues (T / (pi (i - 1/2)))^2 of
// Brownian motion on [0, T].
inline CanonicalSpectrum awgn_brownian_spectrum(double T, std::size_t r)
{
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw InputError("awgn-brownian: T must be positive");
    }
    if (r == 0) {
        throw InputError("awgn-brownian: r must be >= 1");
    }
    std::vector<double> rho(r);
    const double t2 = T * T;
    for (std::size_t i = 0; i < r; ++i) {
        const double m = std::numbers::pi * (static_cast<double>(i) + 0.5);
        rho[i] = std::sqrt(t2 / (t2 + m * m));
    }
    return CanonicalSpectrum::from_correlations(std::move(rho));
}

} // namespace infodens

#endif // INFODENS_SPECTRUM_HPP
