/**
 * @file
 * @brief Exception hierarchy shared by all modules.
 *
 * Every error thrown by the library derives from lstsvrpi::error. The three
 * subclasses map one-to-one onto the CLI exit codes (usage 1, data 2,
 * numerical 3).
 */

#pragma once

#include <stdexcept>
#include <string>

namespace lstsvrpi {

class error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual int exit_code() const noexcept { return 1; }
};

/// Bad arguments, malformed configuration or an invalid request.
class usage_error : public error {
  public:
    using error::error;
};

/// I/O failures, unparsable files, dimension or schema mismatches.
class data_error : public error {
  public:
    using error::error;
    [[nodiscard]] int exit_code() const noexcept override { return 2; }
};

/// Singular systems, failed verification of a solution, all tuning candidates failed.
class numerical_error : public error {
  public:
    using error::error;
    [[nodiscard]] int exit_code() const noexcept override { return 3; }
};

}  // namespace lstsvrpi
