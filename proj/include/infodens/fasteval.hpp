#ifndef INFODENS_FASTEVAL_HPP
#define INFODENS_FASTEVAL_HPP

// Single-index series with x-independent weights:
//   f(x) ~ 1/(rho_r sqrt(pi)) sum_{k<=n} P delta_k U_k(w)
//   V(z) ~ sum_{k<=n} P delta_k D_k(w),           w = |x - I| / rho_r
// P = prod_{i<r} rho_r/rho_i, gamma_j = sum_i b_i^j / (2j), b_i = 1 - rho_r^2/rho_i^2,
// delta_0 = 1, delta_{k+1} = 1/(k+1) sum_{j=1}^{k+1} j gamma_j delta_{k+1-j}.
// U_0, U_1 and D_0 come from specialfn; later kernels from two-term recurrences.

#include "infodens/errors.hpp"
#include "infodens/kernels.hpp"
#include "infodens/parallel.hpp"
#include "infodens/quadrature.hpp"
#include "infodens/series.hpp"
#include "infodens/specialfn.hpp"
#include "infodens/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace infodens::fasteval {

using series::Kind;

inline constexpr long kDefaultMaxTerms = 1'000'000;
inline constexpr double kDefaultTarget = 1e-8;
// Struve evaluation is validated up to this scaled argument.
inline constexpr double kStruveLimit = 700.0;

inline void require_distinct(const CanonicalSpectrum& s)
{
    if (s.rank() < 2) {
        throw NotApplicableError("recurrence path needs r >= 2; use the equal-correlation formulas");
    }
    if (s.all_equal()) {
        throw NotApplicableError("all correlations equal: the single-term formula is exact");
    }
}

// gamma_j as printed, evaluated directly.
inline double gamma_coeff(const CanonicalSpectrum& s, long j)
{
    if (s.rank() < 2) {
        throw NotApplicableError("gamma_j needs r >= 2");
    }
    if (j < 1) {
        throw InputError("gamma_j needs j >= 1");
    }
    const double rho_r = s.smallest();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < s.rank(); ++i) {
        const double ratio = rho_r / s[i];
        sum += std::pow(1.0 - ratio * ratio, static_cast<double>(j));
    }
    return sum / (2.0 * static_cast<double>(j));
}

// Weights P delta_k. Mantissas share one power-of-two exponent so that a tiny
// prefactor (large r) does not flush the early terms to zero before the
// recurrence has lifted them.
class CoefficientTable {
public:
    explicit CoefficientTable(const CanonicalSpectrum& s) : spectrum_(s)
    {
        if (s.rank() < 2) {
            throw NotApplicableError("coefficient table needs r >= 2");
        }
        const double rho_r = s.smallest();
        for (std::size_t i = 0; i + 1 < s.rank(); ++i) {
            const double ratio = rho_r / s[i];
            log_prefactor_ += std::log(ratio);
            b_.push_back(1.0 - ratio * ratio);
        }
        powers_ = b_;
        const double e2 = std::floor(log_prefactor_ / std::numbers::ln2);
        exp2_ = static_cast<long>(e2);
        mant_.push_back(std::exp(log_prefactor_ - e2 * std::numbers::ln2));
        push_weight(std::ldexp(mant_[0], static_cast<int>(exp2_)));
    }

    const CanonicalSpectrum& spectrum() const noexcept { return spectrum_; }
    long rank() const noexcept { return static_cast<long>(spectrum_.rank()); }

    // Number of stored weights (indices 0..size()-1).
    long size() const noexcept { return static_cast<long>(weights_.size()); }

    double log_prefactor() const noexcept { return log_prefactor_; }
    double prefactor() const noexcept { return std::exp(log_prefactor_); }

    // j gamma_j, cached by extend_to.
    double j_gamma(long j) const { return jg_.at(static_cast<std::size_t>(j - 1)); }
    double gamma(long j) const { return j_gamma(j) / static_cast<double>(j); }

    double weight(long k) const { return weights_.at(static_cast<std::size_t>(k)); }
    double delta(long k) const
    {
        return std::exp(std::log(mant_.at(static_cast<std::size_t>(k))) +
                        static_cast<double>(exp2_) * std::numbers::ln2 - log_prefactor_);
    }

    // P sum_{j<=k} delta_j, and its complement 1 - that, clamped at 0.
    double scaled_partial_sum(long k) const { return partial_.at(static_cast<std::size_t>(k)); }
    double deficit(long k) const { return deficit_.at(static_cast<std::size_t>(k)); }

    double pdf_bound(long n) const
    {
        return series::detail::pdf_gamma_factor(static_cast<double>(rank()), static_cast<double>(n),
                                                 spectrum_.smallest()) *
               deficit(n);
    }
    double cdf_bound(long n) const { return 0.5 * deficit(n); }
    double bound(Kind kind, long n) const { return kind == Kind::pdf ? pdf_bound(n) : cdf_bound(n); }

    // Fill weights through index upto. Not safe to call concurrently with readers.
    void extend_to(long upto)
    {
        while (size() <= upto) {
            const long k = size() - 1; // computing index k + 1
            ensure_gammas(k + 1);
            double acc = 0.0;
            const long jmax = std::min<long>(k + 1, static_cast<long>(jg_.size()));
            for (long j = 1; j <= jmax; ++j) {
                acc += jg_[static_cast<std::size_t>(j - 1)] * mant_[static_cast<std::size_t>(k + 1 - j)];
            }
            double next = acc / static_cast<double>(k + 1);
            if (!std::isfinite(next)) {
                throw NumericalFailure("delta_k overflowed");
            }
            if (next > specialfn::detail::kRescaleUp) {
                for (double& m : mant_) {
                    m *= specialfn::detail::kRescaleDown;
                }
                next *= specialfn::detail::kRescaleDown;
                exp2_ += specialfn::detail::kRescaleBits;
            }
            mant_.push_back(next);
            push_weight(std::ldexp(next, static_cast<int>(std::clamp<long>(exp2_, -100000, 100000))));
        }
    }

private:
    void ensure_gammas(long j_needed)
    {
        while (static_cast<long>(jg_.size()) < j_needed && !gammas_exhausted_) {
            double sum = 0.0;
            for (std::size_t i = 0; i < powers_.size(); ++i) {
                sum += powers_[i];
                powers_[i] *= b_[i];
            }
            if (sum == 0.0) {
                // every b_i^j underflowed; later gammas are all zero
                gammas_exhausted_ = true;
                break;
            }
            jg_.push_back(0.5 * sum);
        }
    }

    void push_weight(double w)
    {
        weights_.push_back(w);
        // Neumaier summation keeps the deficit meaningful near 1e-15.
        const double t = sum_ + w;
        if (std::fabs(sum_) >= std::fabs(w)) {
            comp_ += (sum_ - t) + w;
        } else {
            comp_ += (w - t) + sum_;
        }
        sum_ = t;
        const double total = sum_ + comp_;
        partial_.push_back(total);
        deficit_.push_back(std::max(0.0, (1.0 - sum_) - comp_));
    }

    CanonicalSpectrum spectrum_;
    std::vector<double> b_;
    std::vector<double> powers_;
    std::vector<double> jg_;
    bool gammas_exhausted_ = false;
    std::vector<double> mant_;
    long exp2_ = 0;
    double log_prefactor_ = 0.0;
    std::vector<double> weights_;
    std::vector<double> partial_;
    std::vector<double> deficit_;
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline CoefficientTable& extend_deltas(CoefficientTable& table, long upto)
{
    table.extend_to(upto);
    return table;
}

// Smallest n whose stopping quantity is at most target, extending the table as
// needed. PDF: the Gamma-ratio bound. CDF: the weight deficit 1 - P sum delta.
inline long required_terms(CoefficientTable& table, double target, Kind kind,
                           long max_terms = kDefaultMaxTerms)
{
    if (!(target > 0.0)) {
        throw InputError("target error must be positive");
    }
    for (long n = 0;; ++n) {
        if (n > max_terms) {
            throw TruncationFailure("term budget exhausted before reaching the target bound",
                                    table.bound(kind, max_terms), max_terms);
        }
        table.extend_to(n);
        const double q = kind == Kind::pdf ? table.pdf_bound(n) : table.deficit(n);
        if (q <= target) {
            return n;
        }
        // the deficit cannot drop below rounding level
        if (table.deficit(n) == 0.0 || (n > 64 && table.weight(n) == 0.0 && table.deficit(n) == table.deficit(n - 64))) {
            throw TruncationFailure("bound stalled above target at rounding level", table.bound(kind, n), n);
        }
    }
}

inline long required_terms(const CanonicalSpectrum& s, double target, Kind kind,
                           long max_terms = kDefaultMaxTerms)
{
    require_distinct(s);
    CoefficientTable table(s);
    return required_terms(table, target, kind, max_terms);
}

// D_0 by quadrature of U_0: (1/sqrt(pi)) int_0^w U_0, or 1/2 minus the tail
// integral for large w.
inline double d0_quadrature(long r, double w)
{
    if (w == 0.0) {
        return 0.0;
    }
    auto u0 = [r](double t) {
        if (r >= 2) {
            return t <= 0.0 ? kernels::u_at_zero(r, 0) : kernels::u(r, 0, t);
        }
        // log singularity at 0 for r = 1; keep subnormal abscissae away from it
        return kernels::u(r, 0, std::max(t, std::numeric_limits<double>::min()));
    };
    if (w <= 50.0) {
        return std::numbers::inv_sqrtpi * quadrature::integrate_singular(u0, 0.0, w).value;
    }
    const double tail = quadrature::integrate_to_infinity(u0, w).value;
    return 0.5 - std::numbers::inv_sqrtpi * tail;
}

// U_k (scaled by e^w) and optionally D_k, advanced in k by the recurrences
//   U_k = w^2/((r+2k-2)(r+2k-4)) U_{k-2} + (r+2k-3)/(r+2k-2) U_{k-1}
//   D_k = D_{k-1} - w U_{k-1} / (2 sqrt(pi) (r/2 + k - 1)).
// Scaled values are stored as mantissa * 2^exponent().
class KernelState {
public:
    KernelState(long r, double w, bool with_d) : r_(r), w_(w), with_d_(with_d)
    {
        if (r < 1 || !(w >= 0.0) || !std::isfinite(w)) {
            throw InputError("kernel state needs r >= 1 and finite w >= 0");
        }
        double l0 = 0.0;
        double l1 = 0.0;
        if (w == 0.0) {
            l0 = std::log(kernels::u_at_zero(r, 0));
            l1 = std::log(kernels::u_at_zero(r, 1));
        } else {
            l0 = kernels::log_u_scaled(r, 0, w);
            l1 = kernels::log_u_scaled(r, 1, w);
        }
        const double e2 = std::floor(l0 / std::numbers::ln2);
        exp2_ = static_cast<long>(e2);
        u_curr_ = std::exp(l0 - e2 * std::numbers::ln2);
        u_next_ = std::exp(l1 - e2 * std::numbers::ln2);
        if (with_d_) {
            if (w == 0.0) {
                d_ = 0.0;
            } else if (w <= kStruveLimit) {
                d_ = kernels::d(r, 0, w);
            } else {
                d_ = d0_quadrature(r, w);
            }
            d_ = std::clamp(d_, 0.0, 0.5);
            update_d_factor();
        }
    }

    long k() const noexcept { return k_; }
    double w() const noexcept { return w_; }
    long exponent() const noexcept { return exp2_; }
    double u_mantissa() const noexcept { return u_curr_; }
    double log_u_scaled() const { return std::log(u_curr_) + static_cast<double>(exp2_) * std::numbers::ln2; }
    double u_scaled() const { return std::ldexp(u_curr_, static_cast<int>(exp2_)); }
    double u() const { return std::exp(log_u_scaled() - w_); }
    double d() const noexcept { return d_; }

    void advance()
    {
        const double u_old = u_curr_;
        if (k_ == 0) {
            u_prev_ = u_curr_;
            u_curr_ = u_next_;
        } else {
            const double kk = static_cast<double>(k_ + 1);
            const double r = static_cast<double>(r_);
            const double a = w_ * w_ / ((r + 2.0 * kk - 2.0) * (r + 2.0 * kk - 4.0));
            const double c = (r + 2.0 * kk - 3.0) / (r + 2.0 * kk - 2.0);
            const double next = a * u_prev_ + c * u_curr_;
            u_prev_ = u_curr_;
            u_curr_ = next;
        }
        if (with_d_) {
            d_ -= d_factor_ * u_old / (0.5 * static_cast<double>(r_) + static_cast<double>(k_));
            d_ = std::max(d_, 0.0);
        }
        ++k_;
        if (u_curr_ > specialfn::detail::kRescaleUp) {
            u_curr_ *= specialfn::detail::kRescaleDown;
            u_prev_ *= specialfn::detail::kRescaleDown;
            exp2_ += specialfn::detail::kRescaleBits;
            if (with_d_) {
                update_d_factor();
            }
        }
    }

private:
    void update_d_factor()
    {
        // w 2^E e^{-w} / (2 sqrt(pi)) turns a mantissa into the D decrement
        d_factor_ = w_ == 0.0 ? 0.0
                              : 0.5 * std::numbers::inv_sqrtpi * w_ *
                                    std::exp(static_cast<double>(exp2_) * std::numbers::ln2 - w_);
    }

    long r_;
    double w_;
    bool with_d_;
    long k_ = 0;
    long exp2_ = 0;
    double u_prev_ = 0.0;
    double u_curr_ = 0.0;
    double u_next_ = 0.0;
    double d_ = 0.0;
    double d_factor_ = 0.0;
};

struct LogValue {
    double log_value = 0.0;
    long n_terms = 0;
    double error_bound = 0.0;
};

// log f(x) from weights 0..n of a table (table.size() > n).
inline LogValue log_pdf_with_table(const CoefficientTable& table, double x, long n)
{
    if (n < 0 || n >= table.size()) {
        throw InputError("table does not hold the requested number of terms");
    }
    const auto& s = table.spectrum();
    const double rho_r = s.smallest();
    const double w = std::fabs(x - s.mutual_information()) / rho_r;
    KernelState ks(table.rank(), w, false);
    long frame = ks.exponent();
    double sum = 0.0;
    for (long k = 0; k <= n; ++k) {
        if (k > 0) {
            ks.advance();
        }
        if (ks.exponent() != frame) {
            sum = std::ldexp(sum, static_cast<int>(frame - ks.exponent()));
            frame = ks.exponent();
        }
        sum += table.weight(k) * ks.u_mantissa();
    }
    LogValue out;
    out.log_value = std::log(sum) + static_cast<double>(frame) * std::numbers::ln2 - w - std::log(rho_r) -
                    0.5 * std::log(std::numbers::pi);
    out.n_terms = n + 1;
    out.error_bound = table.pdf_bound(n);
    return out;
}

inline ApproxValue pdf_with_table(const CoefficientTable& table, double x, long n)
{
    const LogValue lv = log_pdf_with_table(table, x, n);
    ApproxValue out;
    out.value = std::exp(lv.log_value);
    out.underflow = out.value == 0.0 && std::isfinite(lv.log_value);
    out.n_terms = lv.n_terms;
    out.error_bound = lv.error_bound;
    return out;
}

inline ApproxValue cdf_with_table(const CoefficientTable& table, double x, long n)
{
    if (n < 0 || n >= table.size()) {
        throw InputError("table does not hold the requested number of terms");
    }
    const auto& s = table.spectrum();
    const double v = x - s.mutual_information();
    ApproxValue out;
    out.n_terms = n + 1;
    out.error_bound = table.cdf_bound(n);
    if (v == 0.0) {
        out.value = 0.5;
        return out;
    }
    KernelState ks(table.rank(), std::fabs(v) / s.smallest(), true);
    double big_v = 0.0;
    for (long k = 0; k <= n; ++k) {
        if (k > 0) {
            ks.advance();
            if (ks.d() == 0.0) {
                break;
            }
        }
        big_v += table.weight(k) * ks.d();
    }
    big_v = std::min(big_v, 0.5);
    out.value = v < 0.0 ? 0.5 - big_v : 0.5 + big_v;
    return out;
}

// Evaluator for many abscissae sharing one coefficient table. Construction
// fixes n for both kinds; evaluation is const and safe to call concurrently.
class FastEvaluator {
public:
    FastEvaluator(const CanonicalSpectrum& s, double target = kDefaultTarget, long max_terms = kDefaultMaxTerms)
        : spectrum_(s)
    {
        if (s.rank() == 0) {
            throw InputError("rank 0: the information density is identically zero and has no density");
        }
        if (!(target > 0.0)) {
            throw InputError("target error must be positive");
        }
        if (s.rank() >= 2 && !s.all_equal()) {
            table_.emplace(s);
            n_pdf_ = required_terms(*table_, target, Kind::pdf, max_terms);
            n_cdf_ = required_terms(*table_, target, Kind::cdf, max_terms);
        }
    }

    const CanonicalSpectrum& spectrum() const noexcept { return spectrum_; }
    bool uses_closed_form() const noexcept { return !table_.has_value(); }
    long terms(Kind kind) const noexcept { return (kind == Kind::pdf ? n_pdf_ : n_cdf_) + 1; }

    ApproxValue pdf(double x) const
    {
        if (table_) {
            return pdf_with_table(*table_, x, n_pdf_);
        }
        ApproxValue out;
        out.value = series::pdf_equal(static_cast<long>(spectrum_.rank()), spectrum_.largest(), x);
        return out;
    }

    ApproxValue cdf(double x) const
    {
        if (table_) {
            return cdf_with_table(*table_, x, n_cdf_);
        }
        ApproxValue out;
        out.value = series::cdf_equal(static_cast<long>(spectrum_.rank()), spectrum_.largest(), x);
        return out;
    }

    double log_pdf(double x) const
    {
        if (table_) {
            return log_pdf_with_table(*table_, x, n_pdf_).log_value;
        }
        return std::log(pdf(x).value);
    }

    ApproxValue evaluate(Kind kind, double x) const { return kind == Kind::pdf ? pdf(x) : cdf(x); }

    std::vector<ApproxValue> evaluate_grid(Kind kind, std::span<const double> xs, unsigned threads = 0) const
    {
        std::vector<ApproxValue> out(xs.size());
        parallel::parallel_for(xs.size(), threads, [&](std::size_t i) { out[i] = evaluate(kind, xs[i]); });
        return out;
    }

private:
    CanonicalSpectrum spectrum_;
    std::optional<CoefficientTable> table_;
    long n_pdf_ = 0;
    long n_cdf_ = 0;
};

inline ApproxValue pdf_fast(const CanonicalSpectrum& s, double x, double target = kDefaultTarget,
                            long max_terms = kDefaultMaxTerms)
{
    if (s.rank() == 1 || (s.rank() >= 2 && s.all_equal())) {
        ApproxValue out;
        out.value = series::pdf_equal(static_cast<long>(s.rank()), s.largest(), x);
        return out;
    }
    if (s.rank() == 0) {
        throw InputError("rank 0: the information density is identically zero and has no density");
    }
    CoefficientTable table(s);
    const long n = required_terms(table, target, Kind::pdf, max_terms);
    return pdf_with_table(table, x, n);
}

inline ApproxValue cdf_fast(const CanonicalSpectrum& s, double x, double target = kDefaultTarget,
                            long max_terms = kDefaultMaxTerms)
{
    if (s.rank() == 1 || (s.rank() >= 2 && s.all_equal())) {
        ApproxValue out;
        out.value = series::cdf_equal(static_cast<long>(s.rank()), s.largest(), x);
        return out;
    }
    if (s.rank() == 0) {
        throw InputError("rank 0: the information density is identically zero and has no density");
    }
    CoefficientTable table(s);
    const long n = required_terms(table, target, Kind::cdf, max_terms);
    return cdf_with_table(table, x, n);
}

inline double log_pdf_fast(const CanonicalSpectrum& s, double x, double target = kDefaultTarget,
                           long max_terms = kDefaultMaxTerms)
{
    return FastEvaluator(s, target, max_terms).log_pdf(x);
}

} // namespace infodens::fasteval

#endif // INFODENS_FASTEVAL_HPP
