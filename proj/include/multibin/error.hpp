#pragma once

#include <stdexcept>
#include <string>

namespace multibin {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MULTIBIN_DEFINE_ERROR(Name)          \
  class Name : public Error {                \
   public:                                   \
    explicit Name(const std::string& what)   \
        : Error(#Name ": " + what) {}        \
  }

MULTIBIN_DEFINE_ERROR(InvalidArgument);
MULTIBIN_DEFINE_ERROR(DimensionMismatch);
MULTIBIN_DEFINE_ERROR(InfeasibleCorrelation);
MULTIBIN_DEFINE_ERROR(DegenerateMargin);
MULTIBIN_DEFINE_ERROR(InvalidParams);
MULTIBIN_DEFINE_ERROR(EmptyDraws);
MULTIBIN_DEFINE_ERROR(ZeroEffect);
MULTIBIN_DEFINE_ERROR(InfeasibleRule);
MULTIBIN_DEFINE_ERROR(EmptyCounts);
MULTIBIN_DEFINE_ERROR(DegenerateVariance);
MULTIBIN_DEFINE_ERROR(NoPositiveDirection);
MULTIBIN_DEFINE_ERROR(CountMismatch);
MULTIBIN_DEFINE_ERROR(StreamExhausted);
MULTIBIN_DEFINE_ERROR(InvalidRatios);

#undef MULTIBIN_DEFINE_ERROR

}  // namespace multibin
