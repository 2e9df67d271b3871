#ifndef INFODENS_ERRORS_HPP
#define INFODENS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace infodens {

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Malformed or inconsistent user input (bad matrix, bad list, bad caps).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotPositiveSemidefiniteError : public InputError {
public:
    using InputError::InputError;
};

// A canonical correlation equal to one: the joint law has no density.
class DegenerateModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The density with a single canonical correlation is unbounded at its center.
class PoleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Operation not defined for this spectrum (e.g. recurrence path with equal correlations).
class NotApplicableError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Adaptive truncation could not reach the requested bound within the term budget.
class TruncationFailure : public NumericalFailure {
public:
    TruncationFailure(const std::string& what, double best_bound, long terms)
        : NumericalFailure(what), best_bound_(best_bound), terms_(terms) {}

    double best_bound() const noexcept { return best_bound_; }
    long terms() const noexcept { return terms_; }

private:
    double best_bound_;
    long terms_;
};

} // namespace infodens

#endif // INFODENS_ERRORS_HPP
