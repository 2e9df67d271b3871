// Covariance model -> canonical correlations -> density and distribution of
// the information density on a few points.

#include "infodens/cca.hpp"
#include "infodens/fasteval.hpp"
#include "infodens/series.hpp"

#include <algorithm>
#include <cstdio>

int main()
{
    using namespace infodens;

    // X and Y are 2-dimensional; coordinate i of X is correlated mainly with coordinate i of Y
    cca::Matrix joint(4, 4);
    joint << 1.0, 0.2, 0.8, 0.08,
             0.2, 1.0, 0.16, 0.4,
             0.8, 0.16, 1.0, 0.064,
             0.08, 0.4, 0.064, 1.0;
    const auto model = cca::CovarianceModel::from_joint(joint, 2);
    const auto result = cca::canonical_spectrum(model);
    const auto& s = result.spectrum;

    std::printf("rank %zu, I = %.6f nats\n", s.rank(), s.mutual_information());
    for (std::size_t i = 0; i < s.rank(); ++i) {
        std::printf("  rho_%zu = %.6f\n", i + 1, s[i]);
    }

    const fasteval::FastEvaluator fe(s, 1e-10);
    std::printf("%8s %14s %14s %10s\n", "x - I", "pdf", "cdf", "bound");
    for (double z = -2.0; z <= 2.0; z += 0.5) {
        const auto f = fe.pdf(s.mutual_information() + z);
        const auto F = fe.cdf(s.mutual_information() + z);
        std::printf("%8.2f %14.10f %14.10f %10.1e\n", z, f.value, F.value, std::max(f.error_bound, F.error_bound));
    }
    std::printf("variance %.6f, fourth central moment %.6f\n", series::central_moment(s, 2),
                series::central_moment(s, 4));
}
