#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace matsol {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A solve was requested on a numerically singular matrix.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, double pivot_magnitude)
      : Error(what), pivot_magnitude_(pivot_magnitude) {}
  double pivot_magnitude() const noexcept { return pivot_magnitude_; }

 private:
  double pivot_magnitude_;
};

/// exp() of an argument whose real part leaves double range.
class OverflowError : public Error {
 public:
  OverflowError(const std::string& what, double exponent_scale)
      : Error(what), exponent_scale_(exponent_scale) {}
  /// Largest real part of the exponent that was encountered.
  double exponent_scale() const noexcept { return exponent_scale_; }

 private:
  double exponent_scale_;
};

/// Evaluation point lies on (or numerically next to) the set det(I +- iL) = 0.
class SingularPointError : public Error {
 public:
  SingularPointError(const std::string& what, double det_plus, double det_minus)
      : Error(what), det_plus_(det_plus), det_minus_(det_minus) {}
  double det_plus() const noexcept { return det_plus_; }
  double det_minus() const noexcept { return det_minus_; }

 private:
  double det_plus_;
  double det_minus_;
};

/// A finite-difference stencil touched a masked point.
class StencilError : public Error {
 public:
  using Error::Error;
};

/// The d-covectors of the factorization are linearly dependent.
class DegenerateSpectralError : public Error {
 public:
  DegenerateSpectralError(const std::string& what, std::size_t rank)
      : Error(what), rank_(rank) {}
  std::size_t rank() const noexcept { return rank_; }

 private:
  std::size_t rank_;
};

/// Internal consistency check of a construction failed.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// Integration window does not reach the decay region of the field.
class WindowError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace matsol
