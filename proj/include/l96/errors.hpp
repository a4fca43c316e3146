#pragma once

#include <stdexcept>
#include <string>

namespace l96 {

// Bad shapes, out-of-range indices and malformed specs.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for failures that depend on where the model sits in (n, F, G) space.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnsupportedDimension : public DomainError {
 public:
  using DomainError::DomainError;
};

// No eigenvalue pair crossing for this (l, n): l = 0, l >= n/2 or l = n/3.
class NoCrossing : public DomainError {
 public:
  using DomainError::DomainError;
};

class NoTrappingGuarantee : public DomainError {
 public:
  using DomainError::DomainError;
};

class ExcludedParameter : public DomainError {
 public:
  using DomainError::DomainError;
};

class DegenerateUnfolding : public DomainError {
 public:
  using DomainError::DomainError;
};

class DegenerateHopf : public DomainError {
 public:
  using DomainError::DomainError;
};

class PreOnset : public DomainError {
 public:
  using DomainError::DomainError;
};

// Runtime failures of the numerical machinery.
class Divergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoCycle : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPeriodic : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UndefinedWave : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace l96
