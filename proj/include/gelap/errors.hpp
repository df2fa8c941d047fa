#pragma once

#include <stdexcept>
#include <string>

namespace gelap {

// Invalid user-supplied argument or configuration value.
struct ArgumentError : std::invalid_argument {
  explicit ArgumentError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Geometric precondition violated (self-intersection, curves touching,
// point outside a Fermi chart, curve not closed, ...).
struct GeometryError : std::runtime_error {
  explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

// Linear-algebra or quadrature failure inside a field solver.
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// A sampled function does not satisfy the decay/parity/coverage contract
// required by a layer-profile operation.
struct ProfileError : std::runtime_error {
  explicit ProfileError(const std::string& msg) : std::runtime_error(msg) {}
};

// Matched-data consistency failure (non-convergent scalar solve, scale
// mismatch between the two sides of the interface, ...).
struct MatchingError : std::runtime_error {
  explicit MatchingError(const std::string& msg) : std::runtime_error(msg) {}
};

// lambda too large for the requested cutoff band inside the tube.
struct BandError : std::runtime_error {
  explicit BandError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gelap
