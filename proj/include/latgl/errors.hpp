#pragma once

#include <stdexcept>
#include <string>

namespace latgl {

// Error categories map onto CLI exit codes: validation -> 1, numeric and
// inadmissibility -> 2. Verification failures are not exceptions.
enum class ErrorKind { domain, validation, numeric, inadmissible, structural, singular, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error(ErrorKind::validation, w) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorKind::numeric, w) {}
};
/// Spectral data that cannot define a positive measure on the polynomials.
struct InadmissibleError : Error {
  explicit InadmissibleError(const std::string& w) : Error(ErrorKind::inadmissible, w) {}
};
/// The orthogonalized polynomials do not respect the block-Jacobi cone structure.
struct StructuralError : Error {
  explicit StructuralError(const std::string& w) : Error(ErrorKind::structural, w) {}
};
/// A closed-form transform hit a vanishing denominator.
struct SingularTransformError : Error {
  explicit SingularTransformError(const std::string& w) : Error(ErrorKind::singular, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::io, w) {}
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain:
    case ErrorKind::validation:
    case ErrorKind::io:
      return 1;
    default:
      return 2;
  }
}

}  // namespace latgl
