#pragma once

#include <stdexcept>
#include <string>

namespace anchorloc {

// Stable failure categories. The C API maps these 1:1 onto status codes,
// so values must not be reordered.
enum class ErrorCode : int {
  Ok = 0,
  InvalidArgument = 1,
  PointBehindCamera = 2,
  NoConvergence = 3,
  DegenerateHomography = 4,
  SingularSystem = 5,
  EmptyAnchorList = 6,
  NoVisibleCamera = 7,
  MissingWeights = 8,
  LengthMismatch = 9,
  NoValidProbes = 10,
  FovSamplingExhausted = 11,
  IoError = 12,
  ParseError = 13,
  Internal = 14,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

#define ANCHORLOC_DEFINE_ERROR(Name)                      \
  class Name : public Error {                             \
   public:                                                \
    explicit Name(const std::string& message)             \
        : Error(ErrorCode::Name, message) {}              \
  }

ANCHORLOC_DEFINE_ERROR(InvalidArgument);
ANCHORLOC_DEFINE_ERROR(PointBehindCamera);
ANCHORLOC_DEFINE_ERROR(NoConvergence);
ANCHORLOC_DEFINE_ERROR(DegenerateHomography);
ANCHORLOC_DEFINE_ERROR(SingularSystem);
ANCHORLOC_DEFINE_ERROR(EmptyAnchorList);
ANCHORLOC_DEFINE_ERROR(NoVisibleCamera);
ANCHORLOC_DEFINE_ERROR(MissingWeights);
ANCHORLOC_DEFINE_ERROR(LengthMismatch);
ANCHORLOC_DEFINE_ERROR(NoValidProbes);
ANCHORLOC_DEFINE_ERROR(FovSamplingExhausted);
ANCHORLOC_DEFINE_ERROR(IoError);
ANCHORLOC_DEFINE_ERROR(ParseError);
ANCHORLOC_DEFINE_ERROR(Internal);

#undef ANCHORLOC_DEFINE_ERROR

}  // namespace anchorloc
