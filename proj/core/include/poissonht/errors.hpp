#pragma once

#include <stdexcept>
#include <string>

namespace poissonht {

// Error categories map onto the CLI exit codes: config errors exit with 2,
// numerical failures with 3, invariant violations with 4.

// Invalid or inconsistent user input: bad model parameters, malformed
// configuration, out-of-range arguments.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A numerical procedure failed to produce a trustworthy result: quadrature
// did not converge, an integrand evaluated to a non-finite value, an
// iteration exceeded its budget.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// A mathematical invariant that must hold by construction was violated.
// Indicates a bug in the model definition or in this library, not bad input.
class invariant_error : public std::logic_error {
 public:
  explicit invariant_error(const std::string& what) : std::logic_error(what) {}
};

}  // namespace poissonht
