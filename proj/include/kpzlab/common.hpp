#pragma once

#include <stdexcept>
#include <string>

namespace kpzlab {

// Error taxonomy. Every throw site uses one of these so callers (and the CLI)
// can map failures to exit codes without string matching.
struct invalid_argument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

// Numerical routine failed an internal consistency check (quadrature
// disagreement, non-convergence, loss of positivity).
struct numeric_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A size/limit guard tripped (melon size cap, kappa too large, ...).
struct too_large : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Not enough data to honor a statistical contract (scale ladder too short,
// too few nonempty scales, empty flag set).
struct insufficient_data : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rejection sampler exceeded its attempt cap.
struct acceptance_too_low : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Conditioning window degenerated below representable width.
struct degenerate_input : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad config file / CLI flags.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "Should never happen" class: broken internal invariant.
struct internal_error : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace kpzlab
