#ifndef GEODESIGN_ERRORS_HPP
#define GEODESIGN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace geodesign {

// Error categories map to stable CLI exit codes:
//   validation_error -> 2, feasibility_error -> 3, numerical_error -> 4.

// Bad inputs: malformed files, out-of-range parameters, inconsistent specs.
class validation_error : public std::runtime_error {
public:
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A design cannot be constructed under the requested constraints
// (packing density too high, candidate set too sparse, budget exhausted).
class feasibility_error : public std::runtime_error {
public:
  explicit feasibility_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Linear algebra or optimisation failure (factorisation, non-convergence).
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace geodesign

#endif  // GEODESIGN_ERRORS_HPP
