#pragma once

#include <stdexcept>
#include <string>

namespace msld {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or inconsistent inputs (dimension mismatch, empty ROI, bad window).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or unwritable files, malformed file contents.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Numerically undefined results, e.g. a single-class ROI for AUC.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace msld
