#pragma once

#include <stdexcept>
#include <string>

namespace flapopt {

/// Malformed inputs (bad knot vectors, inconsistent sizes, invalid config).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A design-vector component left its box; remembers which one.
class BoundViolationError : public ValidationError {
public:
    BoundViolationError(int index, double value, double lo, double hi)
        : ValidationError("design variable " + std::to_string(index) + " = " +
                          std::to_string(value) + " outside [" + std::to_string(lo) +
                          ", " + std::to_string(hi) + "]"),
          index(index) {}
    int index;
};

/// Degenerate panels, zero-length edges and the like.
class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear-solver breakdown; carries a reciprocal condition estimate when known.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& msg, double rcond = -1.0)
        : std::runtime_error(msg), rcond(rcond) {}
    double rcond;
};

} // namespace flapopt
