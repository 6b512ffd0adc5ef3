#pragma once

#include <stdexcept>
#include <string>

namespace cltlab {

/// Base class for every validation failure raised by the library. `code()` is
/// a stable machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define CLTLAB_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

CLTLAB_DEFINE_ERROR(InvalidRegion);
CLTLAB_DEFINE_ERROR(InvalidCoefficients);
CLTLAB_DEFINE_ERROR(DegenerateVariance);
CLTLAB_DEFINE_ERROR(CapacityExceeded);
CLTLAB_DEFINE_ERROR(InvalidParameter);
CLTLAB_DEFINE_ERROR(NotRectUnion);
CLTLAB_DEFINE_ERROR(InvalidSample);
CLTLAB_DEFINE_ERROR(InvalidInstance);

#undef CLTLAB_DEFINE_ERROR

}  // namespace cltlab
