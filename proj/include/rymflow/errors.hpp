#pragma once

#include <stdexcept>
#include <string>

namespace rym {

/// Precondition on user-supplied arguments failed (resolution, parameters, keys).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A field was combined with a geometry it is not bound to.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// State contains non-finite values or would overflow a derived quantity.
class InvalidState : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedSurface : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base for failures of the numerics themselves; the CLI maps these to exit code 2.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StepRejected : public NumericalFailure {
public:
    StepRejected(const std::string& what, double suggested_dt)
        : NumericalFailure(what), suggested_dt_(suggested_dt) {}
    double suggested_dt() const { return suggested_dt_; }

private:
    double suggested_dt_;
};

class BlowUp : public NumericalFailure {
public:
    BlowUp(const std::string& what, double t, double max_abs_u)
        : NumericalFailure(what), t_(t), max_abs_u_(max_abs_u) {}
    double t() const { return t_; }
    double max_abs_u() const { return max_abs_u_; }

private:
    double t_;
    double max_abs_u_;
};

class ConvergenceError : public NumericalFailure {
public:
    ConvergenceError(const std::string& what, double residual)
        : NumericalFailure(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

class VolumeDriftGuard : public NumericalFailure {
public:
    VolumeDriftGuard(const std::string& what, double volume)
        : NumericalFailure(what), volume_(volume) {}
    double volume() const { return volume_; }

private:
    double volume_;
};

class OverflowGuard : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class InvalidProfile : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DegenerateProfile : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

/// Config text problems. `line` is 0 for semantic errors that concern a key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line, std::string key)
        : std::runtime_error(what), line_(line), key_(std::move(key)) {}
    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    int line_;
    std::string key_;
};

class IoError : public std::runtime_error {
public:
    IoError(const std::string& what, std::string path)
        : std::runtime_error(what + ": " + path), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace rym
