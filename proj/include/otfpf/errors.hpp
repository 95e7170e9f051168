#pragma once

#include <stdexcept>

namespace otfpf {

/// Base class for every error thrown by this library.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: shape mismatches, non-symmetric input where symmetry is required.
struct invalid_input_error : error {
  using error::error;
};

/// A symmetric matrix has an eigenvalue below the PSD tolerance.
struct not_psd_error : error {
  using error::error;
};

/// Strict positive definiteness required but the matrix is singular at working precision.
struct singular_matrix_error : error {
  using error::error;
};

/// A time step destroyed positive definiteness; retry with a smaller dt.
struct numerical_instability_error : error {
  using error::error;
};

/// The empirical covariance of an ensemble collapsed below the PD floor.
struct degenerate_ensemble_error : error {
  using error::error;
};

/// No closed-form reference curve exists for the requested filter kind.
struct unsupported_reference_error : error {
  using error::error;
};

/// Invalid run configuration: missing or out-of-range fields, unknown keys.
struct config_error : error {
  using error::error;
};

/// Filesystem failure while reading configs or writing outputs.
struct io_error : error {
  using error::error;
};

}  // namespace otfpf
