#pragma once

#include <stdexcept>
#include <string>

namespace clt {

// Base for every domain error raised by the engine. The CLI maps these to
// exit code 1; anything else escaping a command is a bug.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message);

  const std::string& kind() const noexcept { return kind_; }
  // The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string kind_;
  std::string message_;
};

#define CLT_DECLARE_ERROR(Name)                                      \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

CLT_DECLARE_ERROR(MalformedRecord);
CLT_DECLARE_ERROR(InvariantViolation);
CLT_DECLARE_ERROR(UnsupportedVersion);
CLT_DECLARE_ERROR(IoFailure);
CLT_DECLARE_ERROR(MissingField);
CLT_DECLARE_ERROR(LengthMismatch);
CLT_DECLARE_ERROR(DegenerateLabels);
CLT_DECLARE_ERROR(ConstantCli);
CLT_DECLARE_ERROR(TooFewPoints);
CLT_DECLARE_ERROR(TooFewTraces);
CLT_DECLARE_ERROR(NoInterventionForTier);
CLT_DECLARE_ERROR(UnknownParameter);
CLT_DECLARE_ERROR(RangeError);
CLT_DECLARE_ERROR(ConfigError);

#undef CLT_DECLARE_ERROR

}  // namespace clt
