#ifndef INFODENS_CCA_HPP
#define INFODENS_CCA_HPP

// Canonical correlation analysis of a jointly Gaussian pair (xi, eta):
//   M = R_X^{-1/2} R_XY R_Y^{-1/2} = U D V^T,
// the nonzero singular values of M are the canonical correlations, and
// A = U^T R_X^{-1/2}, B = V^T R_Y^{-1/2} whiten the pair into independent
// correlated coordinate pairs.

#include "infodens/errors.hpp"
#include "infodens/spectrum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace infodens::cca {

using Matrix = Eigen::MatrixXd;

struct CovarianceModel {
    Matrix r_x;  // p x p
    Matrix r_y;  // q x q
    Matrix r_xy; // p x q

    Eigen::Index p() const { return r_x.rows(); }
    Eigen::Index q() const { return r_y.rows(); }

    // The (p+q) x (p+q) joint covariance [[R_X, R_XY], [R_XY^T, R_Y]].
    Matrix joint() const
    {
        Matrix j(p() + q(), p() + q());
        j << r_x, r_xy, r_xy.transpose(), r_y;
        return j;
    }

    static CovarianceModel from_joint(const Matrix& joint, Eigen::Index p)
    {
        const Eigen::Index q = joint.rows() - p;
        if (joint.rows() != joint.cols() || p <= 0 || q <= 0) {
            throw InputError("joint covariance must be square with p, q >= 1");
        }
        return {joint.topLeftCorner(p, p), joint.bottomRightCorner(q, q), joint.topRightCorner(p, q)};
    }
};

struct WhiteningPair {
    Matrix a; // p x p
    Matrix b; // q x q
};

struct CcaResult {
    CanonicalSpectrum spectrum;
    WhiteningPair whitening;
};

namespace detail {

inline double max_abs(const Matrix& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Returns (M + M^T)/2 after checking that M is symmetric to the given relative tolerance.
inline Matrix symmetrized(const Matrix& m, double rel_tol, const char* name)
{
    if (m.rows() != m.cols()) {
        throw InputError(std::string(name) + " must be square");
    }
    if (!m.allFinite()) {
        throw InputError(std::string(name) + " has non-finite entries");
    }
    const double scale = max_abs(m);
    const double asym = max_abs(m - m.transpose());
    if (asym > rel_tol * scale) {
        throw InputError(std::string(name) + " is not symmetric");
    }
    return 0.5 * (m + m.transpose());
}

// R^{-1/2} for a symmetric positive definite block, via eigendecomposition.
inline Matrix inverse_sqrt_pd(const Matrix& r, const char* name)
{
    Eigen::SelfAdjointEigenSolver<Matrix> eig(r);
    if (eig.info() != Eigen::Success) {
        throw NumericalFailure(std::string("eigendecomposition failed for ") + name);
    }
    const auto& lambda = eig.eigenvalues();
    const double lmax = lambda.maxCoeff();
    const double floor = static_cast<double>(r.rows()) * std::numeric_limits<double>::epsilon() * lmax;
    if (!(lmax > 0.0) || lambda.minCoeff() <= floor) {
        throw InputError(std::string(name) + " is not positive definite");
    }
    const Eigen::VectorXd inv_sqrt = lambda.array().rsqrt();
    return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
}

} // namespace detail

// Principal square root of a symmetric positive semidefinite matrix.
// Eigenvalues in [-tolerance, 0) are clamped to zero; the default tolerance is
// n * eps * max|lambda|.
inline Matrix symmetric_sqrt(const Matrix& m, std::optional<double> tolerance = std::nullopt)
{
    const Matrix s = detail::symmetrized(m, 1e-12, "matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    if (eig.info() != Eigen::Success) {
        throw NumericalFailure("eigendecomposition failed");
    }
    Eigen::VectorXd lambda = eig.eigenvalues();
    const double scale = lambda.size() == 0 ? 0.0 : lambda.cwiseAbs().maxCoeff();
    const double tol = tolerance.value_or(static_cast<double>(s.rows()) *
                                          std::numeric_limits<double>::epsilon() * scale);
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i] < -tol) {
            throw NotPositiveSemidefiniteError("matrix has eigenvalue " + std::to_string(lambda[i]) +
                                               " below -tolerance");
        }
        lambda[i] = std::sqrt(std::max(lambda[i], 0.0));
    }
    return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

// Canonical spectrum and whitening matrices of a covariance model. Singular
// values at or below rank_tolerance are treated as zero; the default is
// max(p, q) * sigma_max * eps.
inline CcaResult canonical_spectrum(const CovarianceModel& model,
                                    std::optional<double> rank_tolerance = std::nullopt)
{
    const Eigen::Index p = model.r_x.rows();
    const Eigen::Index q = model.r_y.rows();
    if (p == 0 || q == 0) {
        throw InputError("p and q must be positive");
    }
    if (model.r_xy.rows() != p || model.r_xy.cols() != q) {
        throw InputError("R_XY must be p x q");
    }
    if (!model.r_xy.allFinite()) {
        throw InputError("R_XY has non-finite entries");
    }
    constexpr double asym_tol = 1e-8;
    const Matrix r_x = detail::symmetrized(model.r_x, asym_tol, "R_X");
    const Matrix r_y = detail::symmetrized(model.r_y, asym_tol, "R_Y");
    const Matrix wx = detail::inverse_sqrt_pd(r_x, "R_X");
    const Matrix wy = detail::inverse_sqrt_pd(r_y, "R_Y");

    const Matrix m = wx * model.r_xy * wy;
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd sigma = svd.singularValues(); // descending

    const double sigma_max = sigma.size() == 0 ? 0.0 : sigma[0];
    const double tol = rank_tolerance.value_or(static_cast<double>(std::max(p, q)) * sigma_max *
                                               std::numeric_limits<double>::epsilon());
    std::vector<double> kept;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma[i] > tol) {
            kept.push_back(sigma[i]);
        }
    }
    if (!kept.empty()) {
        if (kept.front() > 1.0 + 1e-8) {
            throw InputError("joint covariance is not positive semidefinite (canonical correlation " +
                             std::to_string(kept.front()) + ")");
        }
        if (kept.front() >= 1.0 - 1e-12) {
            throw DegenerateModelError("canonical correlation numerically equal to 1");
        }
    }

    CcaResult result;
    result.spectrum = CanonicalSpectrum::from_correlations(std::move(kept), tol);
    result.whitening.a = svd.matrixU().transpose() * wx;
    result.whitening.b = svd.matrixV().transpose() * wy;
    return result;
}

// Kac-Murdock-Szego joint covariance (rho^{|i-j|}) of dimension p + q, split into blocks.
inline CovarianceModel kms_model(double rho, Eigen::Index p, Eigen::Index q)
{
    if (!(std::fabs(rho) < 1.0)) {
        throw InputError("KMS parameter must satisfy |rho| < 1");
    }
    if (p <= 0 || q <= 0) {
        throw InputError("KMS dimensions must be positive");
    }
    const Eigen::Index n = p + q;
    Matrix joint(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            joint(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
        }
    }
    return CovarianceModel::from_joint(joint, p);
}

} // namespace infodens::cca

#endif // INFODENS_CCA_HPP
