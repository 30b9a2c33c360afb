#pragma once

#include <stdexcept>
#include <string>

namespace gammarul {

// Error taxonomy shared by the library and the CLI. The CLI maps these to
// exit codes: config_error -> 2, validation_error -> 3, numeric_error -> 4.

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension / grid-pattern mismatch between two objects that must agree.
struct shape_error : validation_error {
  using validation_error::validation_error;
};

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside a function's mathematical domain.
struct domain_error : numeric_error {
  using numeric_error::numeric_error;
};

// Prior or posterior whose alpha marginal does not integrate.
struct properness_error : numeric_error {
  using numeric_error::numeric_error;
};

// Mode search or similar iteration failed to converge.
struct optimization_error : numeric_error {
  using numeric_error::numeric_error;
};

// Target density violates a structural assumption (e.g. log-concavity).
struct model_error : numeric_error {
  using numeric_error::numeric_error;
};

// Unit degradation already at or past the failure threshold.
struct already_failed_error : domain_error {
  using domain_error::domain_error;
};

// Path never reaches the failure threshold.
struct not_failed_error : validation_error {
  using validation_error::validation_error;
};

}  // namespace gammarul
