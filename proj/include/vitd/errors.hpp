#pragma once

#include <stdexcept>
#include <string>

namespace vitd {

// Error categories map 1:1 onto CLI exit codes (see cli.hpp).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input files, malformed rows, bad configuration. Exit code 2.
struct InputError : Error {
    using Error::Error;
};

// Training preconditions violated (single-class stage, empty corpus...). Exit code 3.
struct TrainingError : Error {
    using Error::Error;
};

// Serialized model fails validation (hash mismatch, corrupt manifest). Exit code 4.
struct ModelIntegrityError : Error {
    using Error::Error;
};

// Gold/prediction files do not align by id. Exit code 5.
struct AlignmentError : Error {
    using Error::Error;
};

// Translation failure. `transient` errors are retried, others abort immediately.
struct TranslationError : Error {
    bool transient;
    explicit TranslationError(const std::string& msg, bool transient_ = false)
        : Error(msg), transient(transient_) {}
};

}  // namespace vitd
