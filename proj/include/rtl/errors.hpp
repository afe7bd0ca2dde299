#ifndef RTL_ERRORS_HPP
#define RTL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rtl {

// Base class for every failure the library reports. Subclasses name the
// failure mode; the CLI maps ConfigError to exit code 2 and everything
// else derived from Error to exit code 3.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidGrid : Error {
    using Error::Error;
};
struct InvalidFrequency : Error {
    using Error::Error;
};
struct RegularizationFailed : Error {
    using Error::Error;
};
struct DiffeoNotInvertible : Error {
    using Error::Error;
};
struct ConvergenceFailure : Error {
    using Error::Error;
};
struct NormalFormFailed : Error {
    int step = 0;
    NormalFormFailed(const std::string& msg, int step_index)
        : Error(msg), step(step_index) {}
};
struct NotResonantlyStable : Error {
    using Error::Error;
};
struct NoHyperbolicStructure : Error {
    using Error::Error;
};
struct DegenerateVectorField : Error {
    using Error::Error;
};
struct IntegrationFailure : Error {
    using Error::Error;
};
struct StepFailure : Error {
    using Error::Error;
};
struct InvalidSeries : Error {
    using Error::Error;
};
struct DimensionError : Error {
    using Error::Error;
};
struct RegionTooSmall : Error {
    using Error::Error;
};
struct EscapeConstructionFailed : Error {
    double offending_x = 0.0;
    EscapeConstructionFailed(const std::string& msg, double x)
        : Error(msg), offending_x(x) {}
};
struct WrongRegime : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace rtl

#endif
