#ifndef SPRINGY_COMMON_HPP
#define SPRINGY_COMMON_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace springy {

// Thrown for invalid run configurations and parameter-domain violations.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a simulation cannot continue (event stall, missed collision,
// integrator failure, no-release pathology, ...).
class SimulationError : public std::runtime_error {
public:
    explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

constexpr double kPi = 3.14159265358979323846;

inline double sqr(double x) { return x * x; }

} // namespace springy

#endif
