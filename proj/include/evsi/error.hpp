#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evsi {

// Every library error names the module and the operation that raised it so
// the CLI can print a useful diagnostic without extra context.
class Error : public std::runtime_error {
 public:
  Error(std::string_view module, std::string_view operation,
        const std::string& message)
      : std::runtime_error(std::string(module) + "/" + std::string(operation) +
                           ": " + message),
        module_(module),
        operation_(operation) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& operation() const noexcept { return operation_; }

 private:
  std::string module_;
  std::string operation_;
};

#define EVSI_DEFINE_ERROR(Name)       \
  class Name : public Error {         \
   public:                            \
    using Error::Error;               \
  };

EVSI_DEFINE_ERROR(SchemaError)
EVSI_DEFINE_ERROR(ParseError)
EVSI_DEFINE_ERROR(IndexError)
EVSI_DEFINE_ERROR(InsufficientDataError)
EVSI_DEFINE_ERROR(DomainError)
EVSI_DEFINE_ERROR(ShapeError)
EVSI_DEFINE_ERROR(DegeneratePredictorError)
EVSI_DEFINE_ERROR(UnderdeterminedFitError)
EVSI_DEFINE_ERROR(SingularFitError)
EVSI_DEFINE_ERROR(UnsupportedFamilyError)
EVSI_DEFINE_ERROR(NumericInstabilityError)
EVSI_DEFINE_ERROR(ValidationError)
EVSI_DEFINE_ERROR(IoError)

#undef EVSI_DEFINE_ERROR

}  // namespace evsi
