#pragma once

#include <stdexcept>
#include <string>

namespace sbq {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class non_invertible_error : public error {
 public:
  using error::error;
};

class index_out_of_range_error : public error {
 public:
  using error::error;
};

/// Spin above the global cutoff (analytic continuation of high spins
/// amplifies coefficients like e^{2j|Im theta|}).
class spin_cutoff_error : public error {
 public:
  using error::error;
};

/// The heat-kernel series could not be certified to the requested tail.
class truncation_error : public error {
 public:
  using error::error;
};

/// Backward heat flow would amplify coefficients past the guard.
class ill_conditioned_error : public error {
 public:
  using error::error;
};

class parameter_domain_error : public error {
 public:
  using error::error;
};

class step_underflow_error : public error {
 public:
  using error::error;
};

/// Block-variance diagnostics say the Monte Carlo estimate is not
/// converging like n^{-1/2}.
class statistical_failure_error : public error {
 public:
  using error::error;
};

class config_error : public error {
 public:
  using error::error;
};

}  // namespace sbq
