#pragma once

#include <stdexcept>
#include <string>

namespace hartree {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidField : public Error { using Error::Error; };
class ParameterDomain : public Error { using Error::Error; };
class BoxTooSmall : public Error { using Error::Error; };
class FitFailure : public Error { using Error::Error; };
class ContractViolation : public Error { using Error::Error; };
class StabilityViolation : public Error { using Error::Error; };
class Degeneracy : public Error { using Error::Error; };
class NotNearManifold : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

// Iterative method gave up; carries the last residual it saw.
class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }
private:
    double residual_;
};

class DecompositionLost : public Error {
public:
    DecompositionLost(const std::string& what, double time)
        : Error(what), time_(time) {}
    double time() const { return time_; }
private:
    double time_;
};

class BlowUp : public Error {
public:
    BlowUp(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const { return time_; }
private:
    double time_;
};

class DomainExit : public Error {
public:
    DomainExit(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const { return time_; }
private:
    double time_;
};

} // namespace hartree
