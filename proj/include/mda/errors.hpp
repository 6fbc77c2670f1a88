#pragma once

#include <stdexcept>
#include <string>

namespace mda {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, malformed configuration, or violated preconditions.
/// CLI maps this to exit code 2.
struct config_error : error {
    using error::error;
};

/// A spectral copy order would fold through DC (f_in - n*f_c <= 0), so the
/// order is unusable under the odd-zone reconstruction model.
struct fold_error : config_error {
    using config_error::config_error;
};

/// The estimation pipeline could not recover a tone from the spectrum.
/// CLI maps this to exit code 3.
struct estimation_error : error {
    using error::error;
};

/// A detected peak is consistent with more than one tone cluster.
struct ambiguity_error : estimation_error {
    using estimation_error::estimation_error;
};

/// Failure writing or reading artifact files. CLI maps this to exit code 4.
struct io_error : error {
    using error::error;
};

} // namespace mda
