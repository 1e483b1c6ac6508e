#pragma once

#include <stdexcept>
#include <string>

namespace tumorseg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Errors caused by the caller's inputs: unreadable files, malformed
/// headers, invalid parameters, mismatched shapes.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Errors raised while computing on otherwise well-formed inputs.
class ComputeError : public Error {
 public:
  using Error::Error;
};

class IoError : public InputError {
 public:
  using InputError::InputError;
};

class FormatError : public InputError {
 public:
  using InputError::InputError;
};

class UnsupportedDatatype : public InputError {
 public:
  using InputError::InputError;
};

class LabelDomainError : public InputError {
 public:
  using InputError::InputError;
};

class FiniteValueError : public InputError {
 public:
  using InputError::InputError;
};

class ShapeError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class DegenerateInput : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

class RegionNestingError : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

class EmptyMaskError : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

}  // namespace tumorseg
