#ifndef GPCC_ERRORS_HPP_
#define GPCC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace gpcc {

// Root of every error raised by the library. Subclasses name the contract that
// was violated so callers can react selectively (e.g. skip a rolling step on
// FitError but abort on ConfigError).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Parameter outside its validity set.
class DomainError : public Error {
public:
  using Error::Error;
};

// Unit-square value on or outside the closed boundary.
class BoundaryError : public Error {
public:
  using Error::Error;
};

// Wrong number of latent values for a copula family.
class ArityError : public Error {
public:
  using Error::Error;
};

// Inconsistent matrix / input dimensions.
class ShapeError : public Error {
public:
  using Error::Error;
};

// Gram matrix could not be factorized even after jitter.
class ConditioningError : public Error {
public:
  using Error::Error;
};

// Quadrature produced a non-finite value.
class NumericError : public Error {
public:
  using Error::Error;
};

// EP failed to find proper cavities on most sites.
class DivergenceError : public Error {
public:
  using Error::Error;
};

class EvidenceUnavailable : public Error {
public:
  using Error::Error;
};

// Estimation failed; `best_value` holds the best objective seen (or NaN).
class FitError : public Error {
public:
  explicit FitError(const std::string &what, double best = 0.0 / 0.0)
      : Error(what), best_value(best) {}
  double best_value;
};

class AlignmentError : public Error {
public:
  using Error::Error;
};

class CsvError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace gpcc

#endif // GPCC_ERRORS_HPP_
