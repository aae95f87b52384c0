#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iaffect {

/// Root of every error raised by the library. Callers that only need to
/// report a failure can catch this; the subclasses carry the kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define IAFFECT_DEFINE_ERROR(Name, Base)      \
  class Name : public Base {                  \
   public:                                    \
    using Base::Base;                         \
  }

// core
IAFFECT_DEFINE_ERROR(MixedSession, Error);
IAFFECT_DEFINE_ERROR(NonMonotonicTime, Error);

// ingest
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line_no, const std::string& reason)
      : Error("line " + std::to_string(line_no) + ": " + reason), line_no_(line_no) {}
  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};
class PointCountError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};
/// A session whose input files are incomplete. It is reported and left out
/// of the dataset rather than aborting the load.
IAFFECT_DEFINE_ERROR(SessionExcluded, Error);
IAFFECT_DEFINE_ERROR(MissingLabels, SessionExcluded);
IAFFECT_DEFINE_ERROR(MissingFrames, SessionExcluded);
IAFFECT_DEFINE_ERROR(DiskError, Error);

// preprocess
IAFFECT_DEFINE_ERROR(AnchorOutOfRange, Error);
IAFFECT_DEFINE_ERROR(DegenerateScale, Error);
IAFFECT_DEFINE_ERROR(LengthMismatch, Error);

// windows
IAFFECT_DEFINE_ERROR(EmptyWindow, Error);
IAFFECT_DEFINE_ERROR(WindowOutOfRange, Error);
IAFFECT_DEFINE_ERROR(SessionTooShort, Error);
IAFFECT_DEFINE_ERROR(InvalidWindowConfig, Error);

// select / model / eval
IAFFECT_DEFINE_ERROR(InsufficientData, Error);
IAFFECT_DEFINE_ERROR(SingleClassFold, Error);
IAFFECT_DEFINE_ERROR(DimensionMismatch, Error);
IAFFECT_DEFINE_ERROR(VersionMismatch, Error);
IAFFECT_DEFINE_ERROR(CorruptFile, Error);
IAFFECT_DEFINE_ERROR(TooFewInfants, Error);
IAFFECT_DEFINE_ERROR(SingleClass, Error);

// cli / config
IAFFECT_DEFINE_ERROR(ConfigError, Error);

#undef IAFFECT_DEFINE_ERROR

}  // namespace iaffect
