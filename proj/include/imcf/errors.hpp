#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace imcf {

/// Precondition failures on user-supplied parameters (bad n, alpha0 <= 0, t outside [0,T], ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Base for every failure raised while integrating, solving or shooting.
/// The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CurvatureFloor : public NumericalError {
public:
    CurvatureFloor(std::size_t node, double H, double t)
        : NumericalError("mean curvature " + std::to_string(H) + " at node " + std::to_string(node) +
                         " fell to the curvature floor (t = " + std::to_string(t) + ")"),
          node(node), H(H), t(t) {}
    std::size_t node;
    double H;
    double t;
};

class NewtonDiverged : public NumericalError {
public:
    NewtonDiverged(double residual, int iterations, double t)
        : NumericalError("Newton iteration stalled at residual " + std::to_string(residual) + " after " +
                         std::to_string(iterations) + " iterations (t = " + std::to_string(t) + ")"),
          residual(residual), iterations(iterations), t(t) {}
    double residual;
    int iterations;
    double t;
};

/// Initial datum leaves the cone sandwich alpha0*r <= u0 <= alpha0*r + kappa.
class SandwichViolation : public std::invalid_argument {
public:
    SandwichViolation(std::size_t node, double magnitude)
        : std::invalid_argument("initial datum leaves the cone sandwich at node " + std::to_string(node) +
                                " by " + std::to_string(magnitude)),
          node(node), magnitude(magnitude) {}
    std::size_t node;
    double magnitude;
};

class MeanConvexityViolation : public std::invalid_argument {
public:
    MeanConvexityViolation(std::size_t node, double H)
        : std::invalid_argument("initial datum is not strictly mean convex at node " + std::to_string(node) +
                                " (H = " + std::to_string(H) + ")"),
          node(node), H(H) {}
    std::size_t node;
    double H;
};

class NotFlattened : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class SeriesStartInvalid : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Shooting hit the slope overflow guard before r_max. Carries the last
/// accepted radius and the flux ratio r*u_r/u there.
class BlowUp : public NumericalError {
public:
    BlowUp(double r, double flux_ratio)
        : NumericalError("profile slope exceeded the overflow guard at r = " + std::to_string(r)),
          r(r), flux_ratio(flux_ratio) {}
    double r;
    double flux_ratio;
};

class NotConverged : public NumericalError {
public:
    NotConverged(const std::string& what, double variation) : NumericalError(what), variation(variation) {}
    double variation;
};

/// Parse or validation failure in a run configuration. line/column are
/// 1-based; 0 means "not tied to a source position".
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string key, std::size_t line, std::size_t column, const std::string& message)
        : std::invalid_argument(format(key, line, column, message)), key(std::move(key)), line(line),
          column(column), message(message) {}
    std::string key;
    std::size_t line;
    std::size_t column;
    std::string message;

private:
    static std::string format(const std::string& key, std::size_t line, std::size_t column,
                              const std::string& message) {
        std::string s;
        if (line > 0) s += "line " + std::to_string(line) + ":" + std::to_string(column) + ": ";
        if (!key.empty()) s += key + ": ";
        return s + message;
    }
};

}  // namespace imcf
