#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fgeo {

// Base of every error raised by the library. `kind()` is a stable tag used by
// the CLI to name the failing stage and by tests to discriminate errors.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error("SyntaxError", what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

#define FGEO_DECLARE_ERROR(Name)                                      \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(#Name, what) {}    \
  }

FGEO_DECLARE_ERROR(SchemaError);
FGEO_DECLARE_ERROR(DuplicateName);
FGEO_DECLARE_ERROR(UnboundConclusionVariable);
FGEO_DECLARE_ERROR(UnknownTheorem);
FGEO_DECLARE_ERROR(UnknownTheoremCode);
FGEO_DECLARE_ERROR(NonGroundFact);
FGEO_DECLARE_ERROR(InvalidBinding);
FGEO_DECLARE_ERROR(InconsistentSystem);
FGEO_DECLARE_ERROR(NotRepresentable);
FGEO_DECLARE_ERROR(EmptyTrainingSet);
FGEO_DECLARE_ERROR(EmptyAnnotation);
FGEO_DECLARE_ERROR(MissingAnnotation);
FGEO_DECLARE_ERROR(DuplicateId);
FGEO_DECLARE_ERROR(BadRatios);
FGEO_DECLARE_ERROR(EmptyRecords);
FGEO_DECLARE_ERROR(IoError);

#undef FGEO_DECLARE_ERROR

}  // namespace fgeo
