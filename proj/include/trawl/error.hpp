#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace trawl {

/// Invalid model input: a hypothesis of the model fails or a parameter is out of range.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not certify the requested tolerance.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved bound " + format(achieved) + ")"), achieved_(achieved) {}

    double achieved() const noexcept { return achieved_; }

private:
    static std::string format(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", v);
        return buf;
    }

    double achieved_;
};

/// The requested simulator cannot handle this Levy basis.
class UnsupportedSpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parameters fall outside the regime an operation is defined for.
class RegimeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Estimator window is ill-conditioned for the data.
class WindowError : public std::runtime_error {
public:
    WindowError(const std::string& what, double suggested_lo, double suggested_hi)
        : std::runtime_error(what), lo_(suggested_lo), hi_(suggested_hi) {}

    double suggested_lo() const noexcept { return lo_; }
    double suggested_hi() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

/// Malformed ensemble file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace trawl
