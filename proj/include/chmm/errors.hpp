#pragma once

#include <stdexcept>
#include <string>

namespace chmm {

// Two families: data errors (bad inputs, malformed files, violated
// invariants) and numerical errors (solver/conditioning failures). The CLI
// maps them to distinct exit codes.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

#define CHMM_DATA_ERROR(NAME)                            \
  class NAME : public DataError {                        \
   public:                                               \
    explicit NAME(const std::string& msg)                \
        : DataError(#NAME, msg) {}                       \
  }

#define CHMM_NUMERICAL_ERROR(NAME)                       \
  class NAME : public NumericalError {                   \
   public:                                               \
    explicit NAME(const std::string& msg)                \
        : NumericalError(#NAME, msg) {}                  \
  }

CHMM_DATA_ERROR(DisconnectedGraph);
CHMM_DATA_ERROR(DuplicateEdge);
CHMM_DATA_ERROR(NonpositiveConductance);
CHMM_DATA_ERROR(UnknownNode);
CHMM_DATA_ERROR(OverlappingTerminals);
CHMM_DATA_ERROR(EmptyTerminalSet);
CHMM_DATA_ERROR(CoincidentCentroids);
CHMM_DATA_ERROR(InvalidInput);
CHMM_DATA_ERROR(InvariantViolation);
CHMM_DATA_ERROR(InvalidConfig);
CHMM_DATA_ERROR(ParseError);

CHMM_NUMERICAL_ERROR(IllConditioned);
CHMM_NUMERICAL_ERROR(SolveFailed);
CHMM_NUMERICAL_ERROR(DivideByZero);
CHMM_NUMERICAL_ERROR(DegenerateMean);

#undef CHMM_DATA_ERROR
#undef CHMM_NUMERICAL_ERROR

}  // namespace chmm
