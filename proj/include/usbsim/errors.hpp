#pragma once

#include <stdexcept>
#include <string>

namespace usbsim {

// Base for everything the library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input: non-positive parameter, broken invariant, schema problem.
// The CLI maps these to exit code 2.
struct ValidationError : Error {
    using Error::Error;
};

struct SingularityError : Error {
    double residual;
    SingularityError(const std::string& what, double res = 0.0) : Error(what), residual(res) {}
};

struct DomainError : Error {
    using Error::Error;
};

struct ModelRangeError : Error {
    using Error::Error;
};

struct ModulationWindowEmpty : Error {
    using Error::Error;
};

struct InfeasibleLinkError : Error {
    std::string constraint;
    InfeasibleLinkError(const std::string& what, std::string c) : Error(what), constraint(std::move(c)) {}
};

struct CapacityError : Error {
    using Error::Error;
};

struct LockFailure : Error {
    double drift;
    LockFailure(const std::string& what, double d) : Error(what), drift(d) {}
};

struct RootSolveError : Error {
    using Error::Error;
};

} // namespace usbsim
