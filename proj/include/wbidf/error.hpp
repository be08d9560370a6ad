#ifndef WBIDF_ERROR_HPP
#define WBIDF_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace wbidf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input data or configuration (unreadable file, malformed record,
/// invalid parameter). The CLI maps these to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage failed on otherwise well-formed input. The CLI maps
/// these to exit code 2.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, bool input_fault)
      : Error("[" + stage + "] " + what),
        stage_(std::move(stage)),
        input_fault_(input_fault) {}

  const std::string& stage() const noexcept { return stage_; }

  /// True when the underlying cause was an InputError.
  bool input_fault() const noexcept { return input_fault_; }

 private:
  std::string stage_;
  bool input_fault_;
};

}  // namespace wbidf

#endif  // WBIDF_ERROR_HPP
