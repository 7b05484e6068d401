#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace levyhk {

// bad argument value for a mathematical function (r <= 0, x == y, ...)
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// caller misuse: wrong regime, missing sampler, bad config, bad CLI input
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// model construction with parameters outside the admissible family
struct ModelError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// quadrature / series / regression did not converge; keeps what we had
struct NumericError : std::runtime_error {
    NumericError(const std::string& what, double partial_value = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(what), partial(partial_value) {}
    double partial;
};

}  // namespace levyhk
