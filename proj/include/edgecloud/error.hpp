#pragma once

#include <stdexcept>
#include <string>

namespace edgecloud {

/// Base of every error raised by the library. The CLI maps ConfigError to
/// exit code 2 and everything else to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define EDGECLOUD_DEFINE_ERROR(Name)   \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

EDGECLOUD_DEFINE_ERROR(DimensionError);
EDGECLOUD_DEFINE_ERROR(IndexError);
EDGECLOUD_DEFINE_ERROR(RangeError);
EDGECLOUD_DEFINE_ERROR(ShapeError);
EDGECLOUD_DEFINE_ERROR(DomainError);
EDGECLOUD_DEFINE_ERROR(DivergenceError);
EDGECLOUD_DEFINE_ERROR(EmptyHistoryError);
EDGECLOUD_DEFINE_ERROR(NoServerError);
EDGECLOUD_DEFINE_ERROR(MismatchError);
EDGECLOUD_DEFINE_ERROR(ConfigError);
EDGECLOUD_DEFINE_ERROR(EmptyTraceError);
EDGECLOUD_DEFINE_ERROR(IncomparableError);

#undef EDGECLOUD_DEFINE_ERROR

}  // namespace edgecloud
