#include "infodens/oracle.hpp"
#include "infodens/quadrature.hpp"
#include "infodens/series.hpp"
#include "oracles.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace infodens;
using series::Kind;

namespace {

CanonicalSpectrum make_spectrum(std::vector<double> rho) { return CanonicalSpectrum::from_correlations(std::move(rho)); }

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

// int g(x) f(x) dx over I +- 40 rho_1, split at I where f has a cusp.
template <class G>
double integrate_against_pdf(const CanonicalSpectrum& s, const std::vector<long>& caps, G&& g)
{
    const double c = s.mutual_information();
    const double half = 40.0 * s.largest();
    auto f = [&](double x) { return g(x) * series::pdf_direct(s, x, caps).value; };
    return quadrature::integrate(f, c - half, c, 1e-12).value + quadrature::integrate(f, c, c + half, 1e-12).value;
}

} // namespace

TEST(PdfDirect, EqualPairAtCenter)
{
    const auto s = equal_spectrum(0.5, 2);
    const std::vector<long> caps{0};
    const auto v = series::pdf_direct(s, s.mutual_information(), caps);
    EXPECT_NEAR(v.value, 1.0, 1e-15);
    EXPECT_EQ(v.error_bound, 0.0);
    EXPECT_EQ(v.n_terms, 1);
}

TEST(PdfDirect, SymmetricAboutMutualInformation)
{
    for (const auto& s : {make_spectrum({0.9, 0.3}), make_spectrum({0.8, 0.5, 0.2}), make_spectrum({0.7}), make_spectrum({0.9, 0.6, 0.55, 0.1})}) {
        const auto caps = series::caps_for_target(s, 1e-6, Kind::pdf);
        const double c = s.mutual_information();
        const double hi = series::pdf_direct(s, c + 0.37, caps).value;
        EXPECT_LT(rel(series::pdf_direct(s, c - 0.37, caps).value, hi), 1e-13);
    }
}

TEST(PdfDirect, AgreesWithQuadratureAtCenter)
{
    const auto s = make_spectrum({0.9, 0.3});
    const auto caps = series::caps_for_target(s, 1e-10, Kind::pdf);
    const auto v = series::pdf_direct(s, s.mutual_information(), caps);
    const auto q = oracle::pdf_quadrature(s, s.mutual_information());
    EXPECT_LE(std::fabs(v.value - q.value), v.error_bound + q.error + 1e-12);
}

TEST(PdfDirect, Errors)
{
    const auto one = make_spectrum({0.6});
    EXPECT_THROW(series::pdf_direct(one, one.mutual_information(), std::vector<long>{}), PoleError);
    const auto two = make_spectrum({0.6, 0.3});
    EXPECT_THROW(series::pdf_direct(two, 0.0, std::vector<long>{}), InputError);
    EXPECT_THROW(series::pdf_direct(two, 0.0, std::vector<long>{1, 2}), InputError);
    EXPECT_THROW(series::pdf_direct(two, 0.0, std::vector<long>{-1}), InputError);
    EXPECT_THROW(series::cdf_direct(two, 0.0, std::vector<long>{}), InputError);
    EXPECT_THROW(series::pdf_direct(CanonicalSpectrum{}, 0.0, std::vector<long>{}), InputError);
}

TEST(PdfDirect, SingleCorrelationAwayFromPole)
{
    const auto s = make_spectrum({0.8});
    const double a = 0.4;
    const double expected = boost::math::cyl_bessel_k(0, a / 0.8) / (0.8 * std::numbers::pi);
    EXPECT_LT(rel(series::pdf_direct(s, s.mutual_information() + a, std::vector<long>{}).value, expected), 1e-13);
}

TEST(PdfDirect, CapsForTargetMeetBothBounds)
{
    for (const auto& s : {make_spectrum({0.9, 0.3}), make_spectrum({0.8, 0.5, 0.2}), awgn_brownian_spectrum(1.0, 4)}) {
        for (double target : {1e-3, 1e-8, 1e-12}) {
            const auto caps = series::caps_for_target(s, target, Kind::pdf);
            EXPECT_LE(series::pdf_box_bound(s, caps), target);
            EXPECT_LE(series::pdf_box_bound_conservative(s, caps), target);
            const auto ccaps = series::caps_for_target(s, target, Kind::cdf);
            EXPECT_LE(series::cdf_box_bound(s, ccaps), target);
        }
    }
}

TEST(PdfDirect, BoundDecreasesWithCaps)
{
    const auto s = make_spectrum({0.8, 0.5, 0.2});
    double prev = 1.0;
    for (long c = 0; c < 40; c += 4) {
        const std::vector<long> caps{c, c};
        const double b = series::cdf_box_bound(s, caps);
        EXPECT_LT(b, prev);
        prev = b;
    }
}

TEST(CdfDirect, HalfAtCenter)
{
    for (const auto& s : {make_spectrum({0.9, 0.3}), make_spectrum({0.8, 0.5, 0.2}), make_spectrum({0.4})}) {
        const std::vector<long> caps(s.rank() - 1, 3);
        EXPECT_EQ(series::cdf_direct(s, s.mutual_information(), caps).value, 0.5);
    }
}

TEST(CdfDirect, EqualPairLaplace)
{
    const auto s = equal_spectrum(0.5, 2);
    const auto v = series::cdf_direct(s, s.mutual_information() + 0.5, std::vector<long>{0});
    EXPECT_NEAR(v.value, 0.8160602794, 1e-10);
    EXPECT_NEAR(v.value, 0.5 + 0.5 * (1.0 - std::exp(-1.0)), 1e-14);
}

TEST(CdfDirect, SymmetryWithinBound)
{
    for (const auto& s : {make_spectrum({0.9, 0.3}), make_spectrum({0.8, 0.5, 0.2})}) {
        const auto caps = series::caps_for_target(s, 1e-9, Kind::cdf);
        for (double z : {0.0, 0.1, 1.0, 5.0}) {
            const auto lo = series::cdf_direct(s, s.mutual_information() - z, caps);
            const auto hi = series::cdf_direct(s, s.mutual_information() + z, caps);
            EXPECT_LE(std::fabs(lo.value + hi.value - 1.0), 2.0 * lo.error_bound + 1e-15);
        }
    }
}

TEST(CdfDirect, MatchesMonteCarlo)
{
    const auto s = make_spectrum({0.9, 0.3});
    const auto caps = series::caps_for_target(s, 1e-10, Kind::cdf);
    const double x = s.mutual_information() + 1.0;
    const auto batch = oracle::sample_sum_representation(s, 1'000'000, 42);
    double below = 0.0;
    for (double v : batch.values) {
        below += v <= x;
    }
    const double ecdf = below / static_cast<double>(batch.n());
    EXPECT_LE(std::fabs(series::cdf_direct(s, x, caps).value - ecdf), 3.0 * oracle::ks_critical(1e-3, 1e6));
}

TEST(CdfDirect, NondecreasingOnGrid)
{
    const auto s = make_spectrum({0.8, 0.5, 0.2});
    const auto caps = series::caps_for_target(s, 1e-10, Kind::cdf);
    double prev = 0.0;
    for (int i = 0; i <= 80; ++i) {
        const double x = s.mutual_information() - 4.0 + 0.1 * i;
        const double f = series::cdf_direct(s, x, caps).value;
        EXPECT_GE(f, prev - 1e-15);
        prev = f;
    }
}

TEST(EqualCorrelations, ZeroCapBoxSumEqualsSingleTermExactly)
{
    for (long r = 1; r <= 9; ++r) {
        for (double rho : {0.2, 0.5, 0.85}) {
            const auto s = equal_spectrum(rho, static_cast<std::size_t>(r));
            const std::vector<long> caps(static_cast<std::size_t>(r - 1), 0);
            for (double z : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
                const double x = s.mutual_information() + z;
                if (r == 1 && z == 0.0) {
                    continue;
                }
                EXPECT_EQ(series::pdf_direct(s, x, caps).value, series::pdf_equal_bessel(r, rho, x));
                EXPECT_EQ(series::cdf_direct(s, x, caps).value, series::cdf_equal_bessel(r, rho, x));
                EXPECT_EQ(series::pdf_direct(s, x, caps).error_bound, 0.0);
            }
        }
    }
}

TEST(EqualCorrelations, SingleCorrelationBesselK0)
{
    const double rho = 0.8;
    const double info = series::equal_mutual_information(1, rho);
    for (double a : {0.05, 0.5, 2.0}) {
        const double expected = boost::math::cyl_bessel_k(0, a / rho) / (rho * std::numbers::pi);
        EXPECT_LT(rel(series::pdf_equal(1, rho, info + a), expected), 1e-13);
        EXPECT_LT(rel(series::pdf_equal(1, rho, info - a), expected), 1e-13);
    }
    EXPECT_THROW(series::pdf_equal(1, rho, info), PoleError);
}

TEST(EqualCorrelations, CenterValuesAndLaplace)
{
    EXPECT_NEAR(series::pdf_equal(4, 0.3, series::equal_mutual_information(4, 0.3)), 1.0 / 1.2, 1e-15);
    EXPECT_NEAR(series::pdf_equal(2, 0.5, series::equal_mutual_information(2, 0.5) + 1.0), std::exp(-2.0), 1e-16);
    const double v = series::cdf_equal(2, 0.5, series::equal_mutual_information(2, 0.5) + 0.5) - 0.5;
    EXPECT_NEAR(v, 0.3160602794, 1e-10);
    EXPECT_NEAR(series::cdf_equal(4, 0.3, series::equal_mutual_information(4, 0.3) + 30.0), 1.0, 1e-10);
}

TEST(EqualCorrelations, ClosedFormsMatchBesselStruvePath)
{
    for (long r : {2L, 4L, 6L, 10L, 20L, 50L}) {
        for (double rho : {0.1, 0.3, 0.5, 0.9}) {
            const double info = series::equal_mutual_information(r, rho);
            for (double z : {0.0, 0.01, 0.3, 1.0, 2.5, 7.0, 15.0}) {
                for (double sgn : {-1.0, 1.0}) {
                    const double x = info + sgn * z;
                    const double pb = series::pdf_equal_bessel(r, rho, x);
                    const double pc = series::pdf_equal_closed(r, rho, x);
                    if (pb > 1e-250) {
                        EXPECT_LT(rel(pc, pb), 1e-12) << "r=" << r << " rho=" << rho << " z=" << z;
                    }
                    EXPECT_NEAR(series::cdf_equal_closed(r, rho, x), series::cdf_equal_bessel(r, rho, x), 1e-12)
                        << "r=" << r << " rho=" << rho << " z=" << z;
                }
            }
        }
    }
}

TEST(EqualCorrelations, ExplicitSmallRankForms)
{
    const double rho = 0.4;
    for (double z : {0.1, 1.0, 3.0}) {
        const double w = z / rho;
        const double i2 = series::equal_mutual_information(2, rho);
        const double i4 = series::equal_mutual_information(4, rho);
        EXPECT_LT(rel(series::pdf_equal(2, rho, i2 + z), std::exp(-w) / (2.0 * rho)), 1e-14);
        EXPECT_LT(rel(series::pdf_equal(4, rho, i4 + z), std::exp(-w) * (1.0 + w) / (4.0 * rho)), 1e-14);
        EXPECT_NEAR(series::cdf_equal(2, rho, i2 + z) - 0.5, 0.5 * (1.0 - std::exp(-w)), 1e-15);
        EXPECT_NEAR(series::cdf_equal(4, rho, i4 + z) - 0.5, 0.5 * (1.0 - std::exp(-w) * (1.0 + 0.5 * w)), 1e-15);
    }
}

TEST(EqualCorrelations, OddRankMatchesMonteCarlo)
{
    const auto s = equal_spectrum(0.6, 3);
    const double x = s.mutual_information() - 0.4;
    const auto batch = oracle::sample_sum_representation(s, 1'000'000, 9);
    double below = 0.0;
    for (double v : batch.values) {
        below += v <= x;
    }
    EXPECT_LE(std::fabs(series::cdf_equal(3, 0.6, x) - below / 1e6), 3.0 * oracle::ks_critical(1e-3, 1e6));
}

TEST(EqualCorrelations, LargeRankStaysFinite)
{
    const long r = 10000;
    const double rho = 0.05;
    const double info = series::equal_mutual_information(r, rho);
    const double sd = std::sqrt(r * rho * rho);
    for (double z : {0.0, sd, 3.0 * sd}) {
        const double p = series::pdf_equal(r, rho, info + z);
        const double g = std::exp(-0.5 * z * z / (sd * sd)) / (sd * std::sqrt(2.0 * std::numbers::pi));
        EXPECT_TRUE(std::isfinite(p));
        EXPECT_NEAR(p / g, 1.0, 0.05);
    }
    const double p_odd = series::pdf_equal(r + 1, rho, series::equal_mutual_information(r + 1, rho));
    EXPECT_TRUE(std::isfinite(p_odd));
    EXPECT_GT(p_odd, 0.0);
}

TEST(CentralMoment, Examples)
{
    EXPECT_EQ(series::central_moment(make_spectrum({0.6, 0.8}), 3), 0.0);
    EXPECT_EQ(series::central_moment(make_spectrum({0.9, 0.1, 0.4}), 7), 0.0);
    EXPECT_NEAR(series::central_moment(make_spectrum({0.6, 0.8}), 2), 1.0, 1e-15);
    EXPECT_NEAR(series::central_moment(make_spectrum({0.5}), 4), 0.5625, 1e-15);
    EXPECT_THROW(series::central_moment(make_spectrum({0.5}), 0), InputError);
    EXPECT_THROW(series::central_moment(make_spectrum({0.5}), 65), InputError);
    EXPECT_EQ(series::central_moment(CanonicalSpectrum{}, 2), 0.0);
}

TEST(CentralMoment, VarianceIsSumOfSquares)
{
    std::mt19937_64 g(21);
    for (int t = 0; t < 20; ++t) {
        const auto rho = oracles::random_spectrum(g, 1 + t % 7);
        double v = 0.0;
        for (double x : rho) {
            v += x * x;
        }
        EXPECT_NEAR(series::central_moment(make_spectrum(rho), 2), v, 1e-14 * std::max(1.0, v));
    }
}

TEST(CentralMoment, FourthMomentTwoSumFormula)
{
    std::mt19937_64 g(23);
    for (int t = 0; t < 10; ++t) {
        const auto rho = oracles::random_spectrum(g, 1 + t % 6);
        double s4 = 0.0;
        double cross = 0.0;
        for (std::size_t i = 0; i < rho.size(); ++i) {
            s4 += std::pow(rho[i], 4);
            for (std::size_t j = i + 1; j < rho.size(); ++j) {
                cross += rho[i] * rho[i] * rho[j] * rho[j];
            }
        }
        const double expected = 9.0 * s4 + 6.0 * cross;
        EXPECT_LT(rel(series::central_moment(make_spectrum(rho), 4), expected), 1e-12);
    }
}

TEST(CentralMoment, ConvolutionMatchesEnumeration)
{
    std::mt19937_64 g(29);
    for (int r = 1; r <= 4; ++r) {
        for (int t = 0; t < 5; ++t) {
            const auto rho = oracles::random_spectrum(g, r);
            for (int m = 2; m <= 8; m += 2) {
                EXPECT_LT(rel(series::central_moment(make_spectrum(rho), m), oracles::moment_by_enumeration(rho, m)), 1e-12)
                    << "r=" << r << " m=" << m;
            }
        }
    }
}

TEST(CentralMoment, SingleCorrelationFormula)
{
    for (double rho : {0.2, 0.5, 0.95}) {
        for (int m : {2, 4, 6}) {
            const double c = std::tgamma(m + 1.0) / std::tgamma(m / 2 + 1.0);
            EXPECT_LT(rel(series::central_moment(make_spectrum({rho}), m), c * c * std::pow(rho / 2.0, m)), 1e-13);
        }
    }
}

TEST(CentralMoment, EqualPathMatchesConvolution)
{
    for (int r : {2, 3, 7}) {
        for (int m : {2, 4, 6, 10}) {
            const double rho = 0.45;
            std::vector<double> perturbed(static_cast<std::size_t>(r), rho);
            perturbed.back() = rho * (1.0 - 1e-15);
            EXPECT_LT(rel(series::central_moment(equal_spectrum(rho, r), m), series::central_moment(make_spectrum(perturbed), m)),
                      1e-12);
        }
    }
}

TEST(CentralMoment, MatchesNumericalIntegration)
{
    const auto s = make_spectrum({0.9, 0.3});
    const auto caps = series::caps_for_target(s, 1e-10, Kind::pdf);
    const double c = s.mutual_information();
    for (int m : {2, 4}) {
        const double num = integrate_against_pdf(s, caps, [&](double x) { return std::pow(x - c, m); });
        EXPECT_NEAR(num, series::central_moment(s, m), 1e-6) << "m=" << m;
    }
}

TEST(PdfDirect, IntegratesToOne)
{
    for (const auto& s : {make_spectrum({0.9, 0.3}), make_spectrum({0.8, 0.5, 0.2})}) {
        const auto caps = series::caps_for_target(s, 1e-9, Kind::pdf);
        EXPECT_NEAR(integrate_against_pdf(s, caps, [](double) { return 1.0; }), 1.0, 1e-6);
    }
}

TEST(PdfDirect, FourierTransformIsCharacteristicFunction)
{
    const auto s = make_spectrum({0.9, 0.3});
    const auto caps = series::caps_for_target(s, 1e-9, Kind::pdf);
    const double c = s.mutual_information();
    for (double t : {0.0, 0.5, 1.0, 2.0}) {
        const double ft = integrate_against_pdf(s, caps, [&](double x) { return std::cos(t * (x - c)); });
        EXPECT_NEAR(ft, series::characteristic_function(s, t), 1e-6) << "t=" << t;
    }
}

TEST(CharacteristicFunction, Values)
{
    const auto s = make_spectrum({0.5});
    EXPECT_EQ(series::characteristic_function(s, 0.0), 1.0);
    EXPECT_NEAR(series::characteristic_function(s, 2.0), 0.7071067812, 1e-10);
    const auto t = make_spectrum({0.9, 0.4, 0.1});
    EXPECT_EQ(series::characteristic_function(t, 5.0), series::characteristic_function(t, -5.0));
    EXPECT_LE(series::characteristic_function(t, 0.3), 1.0);
}

TEST(GaussianReference, Values)
{
    const auto s = make_spectrum({0.6, 0.8});
    const auto g = series::gaussian_reference(s, s.mutual_information());
    EXPECT_NEAR(g.pdf, 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
    EXPECT_EQ(g.cdf, 0.5);
    const auto e = equal_spectrum(0.2, 40);
    EXPECT_NEAR(series::gaussian_reference(e, e.mutual_information()).pdf, 1.0 / std::sqrt(2.0 * std::numbers::pi * 1.6),
                1e-14);
    double prev = 0.0;
    for (int i = 0; i <= 50; ++i) {
        const double c = series::gaussian_reference(s, -3.0 + 0.15 * i).cdf;
        EXPECT_GE(c, prev);
        prev = c;
    }
    EXPECT_THROW(series::gaussian_reference(CanonicalSpectrum{}, 0.0), InputError);
}
