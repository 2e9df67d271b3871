// Series length needed for a 1e-2 truncation bound on the continuous-time
// AWGN/Brownian spectrum with T = 1.

#include "infodens/fasteval.hpp"

#include <cstdio>

int main()
{
    using namespace infodens;
    std::printf("%4s %8s %8s\n", "r", "pdf", "cdf");
    for (std::size_t r : {2u, 5u, 10u, 15u}) {
        fasteval::CoefficientTable table(awgn_brownian_spectrum(1.0, r));
        const long np = fasteval::required_terms(table, 1e-2, series::Kind::pdf);
        const long nc = fasteval::required_terms(table, 1e-2, series::Kind::cdf);
        std::printf("%4zu %8ld %8ld\n", r, np, nc);
    }
}
